#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rbsdej/exec.hpp"

namespace rbsdej {

/// Polynomial basis in the state. With `standardize`, states of each time
/// slice are mapped affinely onto [-1, 1] and Legendre polynomials of that
/// variable are used; without it, Legendre polynomials of the raw state.
struct RegressionBasis {
    std::size_t degree = 2;
    bool standardize = true;

    std::size_t size() const noexcept { return degree + 1; }
};

/// Least-squares projection onto the basis; callable at any state.
class RegressionFit {
public:
    RegressionFit() = default;
    RegressionFit(std::vector<double> coefficients, double center, double half_width,
                  double residual_sd, bool degenerate);

    double operator()(double x) const;

    /// Coefficients of the Legendre basis in the standardized variable.
    std::span<const double> coefficients() const noexcept { return coefficients_; }
    /// Same fit as Σ_k c_k x^k in the raw state.
    std::vector<double> monomial_coefficients() const;

    double center() const noexcept { return center_; }
    double half_width() const noexcept { return half_width_; }
    /// Residual standard deviation (dof-corrected).
    double residual_sd() const noexcept { return residual_sd_; }
    /// All states coincided; the fit collapsed to the sample mean.
    bool degenerate() const noexcept { return degenerate_; }

private:
    std::vector<double> coefficients_{0.0};
    double center_ = 0.0;
    double half_width_ = 1.0;
    double residual_sd_ = 0.0;
    bool degenerate_ = false;
};

struct CondExp {
    RegressionFit fit;
    std::vector<double> fitted;
};

/// Regress `targets` on `states`. A slice whose states all coincide is
/// fitted by its mean. Throws RegressionError if there are fewer samples
/// than basis functions or the design matrix is rank deficient.
RegressionFit fit_regression(std::span<const double> targets, std::span<const double> states,
                             const RegressionBasis& basis, const Exec& exec = {});

CondExp condexp_regression(std::span<const double> targets, std::span<const double> states,
                           const RegressionBasis& basis, const Exec& exec = {});

/// Legendre values P_0..P_degree at s, written to `out`.
void legendre(double s, std::span<double> out);

/// Normal equations G = Σ φφᵀ (row-major k×k) and b = Σ φ y with φ the
/// Legendre basis at (x - center)/half_width. The OpenMP backend reduces
/// over fixed blocks; the serial backend is the plain reference loop.
struct NormalEquations {
    std::size_t k = 0;
    std::vector<double> gram;
    std::vector<double> rhs;
};
NormalEquations assemble_normal_equations(const Exec& exec, std::span<const double> states,
                                          std::span<const double> targets, double center,
                                          double half_width, std::size_t degree);

}  // namespace rbsdej
