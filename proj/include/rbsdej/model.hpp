#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rbsdej/errors.hpp"

namespace rbsdej {

class TimeGrid;

/// Integrability exponent p in (1,2), its conjugate q, the weight β of the
/// A-weighted norms and the lower bound ε on a² = φ + η² + δ².
class Exponents {
public:
    /// Throws DomainError unless 1 < p < 2, beta >= 0 and eps > 0.
    Exponents(double p, double beta, double eps);

    double p() const noexcept { return p_; }
    double q() const noexcept { return q_; }
    double beta() const noexcept { return beta_; }
    double eps() const noexcept { return eps_; }
    /// c(p) = p(p-1)/2
    double cp() const noexcept { return cp_; }

    bool operator==(const Exponents&) const = default;

private:
    double p_;
    double q_;
    double beta_;
    double eps_;
    double cp_;
};

/// q = p/(p-1); throws DomainError unless 1 < p < 2.
double conjugate_exponent(double p);

/// Default weight: 1 + 2(p-1)/p plus a margin of 1.0.
double default_beta(double p, double margin = 1.0);

using StateFn = std::function<double(double t, double x)>;

/// Stochastic coefficients, evaluated along the forward state.
struct CoefficientSpec {
    StateFn alpha;      // monotonicity rate in y
    StateFn eta;        // Lipschitz rate in z, >= 0
    StateFn delta;      // Lipschitz rate in u (λ-norm), >= 0
    StateFn phi_small;  // linear growth rate in y, > 0
    StateFn varphi;     // inhomogeneity |f(t,0,0,0)| bound, >= 0

    static CoefficientSpec constant(double alpha, double eta, double delta, double phi_small,
                                    double varphi);
};

/// Coefficients at one (t, x) together with a² and ζ² = (a²)^{q/2}.
struct CoefficientSample {
    double alpha = 0.0;
    double eta = 0.0;
    double delta = 0.0;
    double phi = 0.0;
    double varphi = 0.0;
    double a2 = 0.0;
    double zeta2 = 0.0;
};

/// Throws AssumptionViolation if a² < eps.
CoefficientSample aggregate_coefficients(const CoefficientSpec& coeffs, const Exponents& exponents,
                                         double t, double x);

/// Finite mark space standing in for the Lévy measure λ: point masses
/// `weights[j]` at `marks[j]`.
class MarkSpace {
public:
    MarkSpace() = default;
    /// Throws DomainError on size mismatch or a non-positive/non-finite weight.
    MarkSpace(std::vector<double> marks, std::vector<double> weights);

    std::size_t size() const noexcept { return marks_.size(); }
    bool empty() const noexcept { return marks_.empty(); }
    std::span<const double> marks() const noexcept { return marks_; }
    std::span<const double> weights() const noexcept { return weights_; }
    double total_intensity() const noexcept { return total_; }
    /// Σ λ_j min(1, e_j²)
    double small_jump_mass() const;

    /// ‖u‖²_λ = Σ λ_j u_j²
    double norm2(std::span<const double> u) const;
    /// Γ = Σ λ_j u_j
    double integrate(std::span<const double> u) const;

private:
    std::vector<double> marks_;
    std::vector<double> weights_;
    double total_ = 0.0;
};

/// Markovian carrier X of the terminal value, obstacle and coefficients.
struct ForwardModel {
    double x0 = 0.0;
    StateFn drift;
    StateFn vol;
    std::function<double(double t, double x, double mark)> jump_size;
};

/// Generator f(t, x, y, z, u) where u holds U(e_1..e_m).
struct Driver {
    std::function<double(double t, double x, double y, double z, std::span<const double> u)> fn;
    bool uses_z = false;
    bool uses_u = false;
    /// f(t,x,·,z,u) is affine on every step; enables the closed-form implicit step.
    bool affine_in_y = false;

    double operator()(double t, double x, double y, double z, std::span<const double> u) const {
        return fn(t, x, y, z, u);
    }
    bool frozen_independent() const noexcept { return !uses_z && !uses_u; }
};

/// Complete reflected BSDE instance on [0, horizon].
struct ProblemSpec {
    std::string name;
    Exponents exponents{1.5, 0.0, 1.0};
    CoefficientSpec coeffs;
    MarkSpace marks;
    ForwardModel forward;
    Driver driver;
    std::function<double(double x)> terminal;
    StateFn obstacle;
    /// L_{T-} as a function of the state at T.
    std::function<double(double x)> obstacle_left_T;
    double horizon = 1.0;
};

/// A_i with A_0 = 0 and A_{i+1} = A_i + ζ²_i Δ_i. Throws AssumptionViolation
/// on a non-positive ζ² sample and DomainError on a size mismatch.
std::vector<double> cumulative_A(const TimeGrid& grid, std::span<const double> zeta2);

/// Problem rewritten for Ỹ = e^{R} Y, with the discrete rate transform
/// e^{R_{i+1} - R_i} = 1/(1 - r_i Δ_i), r = α + ε a², so that
/// α̃ = -ε a² ≤ 0. `R` is indexed by grid node.
struct NormalizedProblem {
    ProblemSpec spec;
    std::shared_ptr<const std::vector<double>> R;
    std::shared_ptr<const std::vector<double>> nodes;
    double eps_shift = 0.0;
    bool already_normalized = false;

    double R_at(double t) const;
};

/// Requires α and a² that do not depend on the state (the transformed data
/// must remain functions of (t, X_t)); throws DomainError otherwise, or if
/// some r_i Δ_i >= 1.
NormalizedProblem normalize_driver(const ProblemSpec& spec, const TimeGrid& grid,
                                   double eps_shift = 0.0);

struct AssumptionCheck {
    std::string name;
    bool passed = true;
    double worst = 0.0;  // largest violation margin (or secant ratio for Lipschitz)
    std::string witness;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;

    bool all_passed() const;
    const AssumptionCheck& at(const std::string& name) const;
};

struct ProbeBox {
    double x_lo = -1.0;
    double x_hi = 1.0;
    double y_abs = 10.0;  // y, y', z, z', u, u' drawn from [-y_abs, y_abs]
};

/// Sampled probes of the standing assumptions: "monotonicity", "lipschitz",
/// "growth", "a2_lower_bound", "terminal_dominates_obstacle",
/// "continuity_in_y". Deterministic for a given seed.
AssumptionReport validate_assumptions(const ProblemSpec& spec, std::size_t probe_budget,
                                      std::uint64_t seed = 1, const ProbeBox& box = {});

}  // namespace rbsdej
