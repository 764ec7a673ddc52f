#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "rbsdej/backward.hpp"
#include "rbsdej/exec.hpp"
#include "rbsdej/model.hpp"
#include "rbsdej/regression.hpp"
#include "rbsdej/simulate.hpp"

namespace rbsdej {

struct PenalizationSchedule {
    std::vector<double> n_values;  // strictly increasing, > 0
    double stop_tol = 1e-3;

    /// n0 * 2^k for k = 0..levels-1.
    static PenalizationSchedule geometric(double n0, std::size_t levels, double stop_tol);
    /// Throws DomainError if the invariants do not hold.
    void validate() const;
};

struct SkorokhodReport {
    /// Mean over paths of |Σ_i (y_i - L_i) ΔK^c_i|.
    double flat_integral = 0.0;
    /// Mean of |ΔK^d_T - (Y_T - L_{T-})^- 1{Y_{T-} = L_{T-}}|, Y_{T-} read at the last interior node.
    double jump_condition_residual = 0.0;
    /// Fraction of (path, step) with ΔK_i > tol_K while y_i - L_i > tol_Y.
    double complementarity_violation_fraction = 0.0;
};

/// |y - L| <= 1e-8 (1 + |L|)
bool touches(double y, double L);

SkorokhodReport skorokhod_report(const BackwardSolution& sol, const ProblemSpec& spec,
                                 const PathBundle& bundle, const Exec& exec = {});

/// E[sup_i e^{(p/2)βA_i} ((y_i - L_i)^-)^p] over all grid nodes.
struct PenaltyError {
    double mean = 0.0;
    double se = 0.0;
    std::vector<double> per_path;
};
PenaltyError penalty_error(const BackwardSolution& sol, const ProblemSpec& spec,
                           const PathBundle& bundle, const Exec& exec = {});

struct ConvergenceRow {
    double n = 0.0;
    double penalty_error = 0.0;
    double penalty_error_se = 0.0;
    double y0_mean = 0.0;
    double y0_stderr = 0.0;
    double k_T_mean = 0.0;
    double flat_integral = 0.0;
    double wall_time = 0.0;
};

struct ReflectOptions {
    /// Used when the driver depends on (z,u).
    double picard_tol = 1e-8;
    std::size_t picard_max_iter = 50;
    Exec exec{};
};

struct ReflectedResult {
    BackwardSolution solution;
    SkorokhodReport report;
    std::vector<ConvergenceRow> table;
    bool reached_tol = false;
    /// Per-level penalty errors nonincreasing within 2 standard errors of
    /// the per-path differences.
    bool errors_monotone = true;
    std::string warning;
};

/// Penalized solve at one level with the terminal predictable jump applied:
/// one-pass when the driver ignores (z,u), Picard otherwise.
BackwardSolution solve_reflected_level(const ProblemSpec& spec, const PathBundle& bundle,
                                       const RegressionBasis& basis, double n_penalty,
                                       const ReflectOptions& options = {});

/// Runs the schedule until the penalty error drops below stop_tol. Running
/// out of levels is not an error; `warning` is set instead.
ReflectedResult solve_reflected_penalization(const ProblemSpec& spec, const PathBundle& bundle,
                                             const RegressionBasis& basis,
                                             const PenalizationSchedule& schedule,
                                             const ReflectOptions& options = {});

/// Discrete reflected recursion y_i = max(L_i, c_i + f Δ_i). The increment
/// of the last step is reclassified as the terminal predictable jump, up to
/// (ξ - L_{T-})^-, when the last interior value sits on L_{T-}.
BackwardSolution solve_reflected_dp_oracle(const ProblemSpec& spec, const PathBundle& bundle,
                                           const RegressionBasis& basis, const Exec& exec = {});

/// CSV columns: n,penalty_error,Y0_mean,Y0_stderr,K_T_mean,flat_integral,wall_time
std::string convergence_csv_header();
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows);

}  // namespace rbsdej
