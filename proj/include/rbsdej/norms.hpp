#pragma once

#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rbsdej/backward.hpp"
#include "rbsdej/exec.hpp"
#include "rbsdej/model.hpp"
#include "rbsdej/simulate.hpp"

namespace rbsdej {

/// Monte Carlo estimates (p-th powers, i.e. expectations) of the weighted
/// norms of a discrete solution, each with its standard error.
struct NormReport {
    double s_p_beta = 0.0;         // E[sup_t e^{(p/2)βA_t} |Y_t|^p]
    double s_pA_beta = 0.0;        // E[∫ e^{(p/2)βA} |Y|^p dA]
    double h_p_beta = 0.0;         // E[(∫ e^{βA} |Z|² ds)^{p/2}]
    double l_p_lambda_beta = 0.0;  // E[(∫ e^{βA} ‖U‖²_λ ds)^{p/2}]
    double l_p_mu_beta = 0.0;      // E[(∫∫ e^{βA} |U|² μ(ds,de))^{p/2}]
    double k_p = 0.0;              // E[|K_T|^p]

    double s_p_beta_se = 0.0;
    double s_pA_beta_se = 0.0;
    double h_p_beta_se = 0.0;
    double l_p_lambda_beta_se = 0.0;
    double l_p_mu_beta_se = 0.0;
    double k_p_se = 0.0;

    /// Values in CSV column order.
    std::vector<double> values() const;
    /// Sum of the six estimates.
    double total() const;
};

/// Per-path contributions whose means make up a NormReport.
struct NormSamples {
    std::vector<double> s_p, s_pA, h_p, l_lambda, l_mu, k_p;
};

NormSamples norm_samples(const BackwardSolution& sol, const PathBundle& bundle,
                         const Exponents& exponents, const MarkSpace& marks,
                         const Exec& exec = {});

/// Riemann/realized-jump sums over the grid; sup over grid nodes.
NormReport estimate_norms(const BackwardSolution& sol, const PathBundle& bundle,
                          const Exponents& exponents, const MarkSpace& marks,
                          const Exec& exec = {});

struct LenglartResult {
    double lhs = 0.0;     // E[(∫∫ e^{βA}|U|² μ)^{p/2}]
    double rhs = 0.0;     // E[(∫ e^{βA}‖U‖²_λ ds)^{p/2}]
    double joint_se = 0.0;  // standard error of the per-path lhs - 2 rhs
    bool pass = false;    // lhs <= 2 rhs + 3 joint_se
};

LenglartResult lenglart_check(const BackwardSolution& sol, const PathBundle& bundle,
                              const Exponents& exponents, const MarkSpace& marks,
                              const Exec& exec = {});

/// ((Σ|x_i|)^p, n^{p-1} Σ|x_i|^p); throws DomainError for p < 1.
std::pair<double, double> power_sum_bound(std::span<const double> xs, double p);

/// (‖Δy‖^p_{S^{p,A}_β} + ‖Δz‖^p_{H^p_β} + ‖Δu‖^p_{L^p_{λ,β}})^{1/p} between
/// two solutions on the same bundle.
double picard_distance(const BackwardSolution& a, const BackwardSolution& b,
                       const PathBundle& bundle, const Exponents& exponents,
                       const MarkSpace& marks, const Exec& exec = {});

/// Column header and row writer for NormReport CSV output.
std::string norm_csv_header();
void write_norm_csv_row(std::ostream& os, const std::string& label, const NormReport& r);

}  // namespace rbsdej
