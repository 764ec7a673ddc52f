#include "rbsdej/regression.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "rbsdej/errors.hpp"

namespace rbsdej {

namespace {

constexpr std::size_t kMaxDegree = 16;

void accumulate(std::span<const double> states, std::span<const double> targets, double center,
                double half_width, std::size_t k, std::size_t lo, std::size_t hi, double* gram,
                double* rhs) {
    std::array<double, kMaxDegree + 1> phi{};
    for (std::size_t i = lo; i < hi; ++i) {
        legendre((states[i] - center) / half_width, std::span<double>(phi.data(), k));
        for (std::size_t r = 0; r < k; ++r) {
            rhs[r] += phi[r] * targets[i];
            for (std::size_t c = r; c < k; ++c) gram[r * k + c] += phi[r] * phi[c];
        }
    }
}

}  // namespace

void legendre(double s, std::span<double> out) {
    if (out.empty()) return;
    out[0] = 1.0;
    if (out.size() == 1) return;
    out[1] = s;
    for (std::size_t n = 1; n + 1 < out.size(); ++n) {
        const double nn = static_cast<double>(n);
        out[n + 1] = ((2.0 * nn + 1.0) * s * out[n] - nn * out[n - 1]) / (nn + 1.0);
    }
}

NormalEquations assemble_normal_equations(const Exec& exec, std::span<const double> states,
                                          std::span<const double> targets, double center,
                                          double half_width, std::size_t degree) {
    if (degree > kMaxDegree) throw RegressionError("basis degree above 16 is not supported");
    const std::size_t k = degree + 1;
    const std::size_t n = states.size();
    NormalEquations ne{k, std::vector<double>(k * k, 0.0), std::vector<double>(k, 0.0)};

    if (exec.backend == Backend::serial) {
        accumulate(states, targets, center, half_width, k, 0, n, ne.gram.data(), ne.rhs.data());
    } else {
        const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
        std::vector<double> g(blocks * k * k, 0.0), r(blocks * k, 0.0);
        for_each_index(exec, blocks, [&](std::size_t b) {
            const std::size_t lo = b * kReductionBlock;
            accumulate(states, targets, center, half_width, k, lo,
                       std::min(n, lo + kReductionBlock), &g[b * k * k], &r[b * k]);
        });
        for (std::size_t b = 0; b < blocks; ++b) {
            for (std::size_t i = 0; i < k * k; ++i) ne.gram[i] += g[b * k * k + i];
            for (std::size_t i = 0; i < k; ++i) ne.rhs[i] += r[b * k + i];
        }
    }
    for (std::size_t row = 0; row < k; ++row) {
        for (std::size_t c = 0; c < row; ++c) ne.gram[row * k + c] = ne.gram[c * k + row];
    }
    return ne;
}

RegressionFit::RegressionFit(std::vector<double> coefficients, double center, double half_width,
                             double residual_sd, bool degenerate)
    : coefficients_(std::move(coefficients)),
      center_(center),
      half_width_(half_width),
      residual_sd_(residual_sd),
      degenerate_(degenerate) {}

double RegressionFit::operator()(double x) const {
    const std::size_t k = coefficients_.size();
    if (k == 1) return coefficients_[0];
    std::array<double, kMaxDegree + 1> phi{};
    legendre((x - center_) / half_width_, std::span<double>(phi.data(), k));
    double v = 0.0;
    for (std::size_t i = 0; i < k; ++i) v += coefficients_[i] * phi[i];
    return v;
}

std::vector<double> RegressionFit::monomial_coefficients() const {
    const std::size_t k = coefficients_.size();
    // Legendre polynomials as monomials in s.
    std::vector<std::vector<double>> P(k, std::vector<double>(k, 0.0));
    P[0][0] = 1.0;
    if (k > 1) P[1][1] = 1.0;
    for (std::size_t n = 1; n + 1 < k; ++n) {
        const double nn = static_cast<double>(n);
        for (std::size_t j = 0; j < k; ++j) {
            double v = -nn * P[n - 1][j];
            if (j > 0) v += (2.0 * nn + 1.0) * P[n][j - 1];
            P[n + 1][j] = v / (nn + 1.0);
        }
    }
    std::vector<double> in_s(k, 0.0);
    for (std::size_t n = 0; n < k; ++n) {
        for (std::size_t j = 0; j < k; ++j) in_s[j] += coefficients_[n] * P[n][j];
    }
    // s = (x - c)/h; expand Σ a_j (x - c)^j / h^j.
    std::vector<double> out(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        const double scale = in_s[j] / std::pow(half_width_, static_cast<double>(j));
        double binom = 1.0;
        for (std::size_t i = 0; i <= j; ++i) {
            out[i] += scale * binom * std::pow(-center_, static_cast<double>(j - i));
            binom = binom * static_cast<double>(j - i) / static_cast<double>(i + 1);
        }
    }
    return out;
}

RegressionFit fit_regression(std::span<const double> targets, std::span<const double> states,
                             const RegressionBasis& basis, const Exec& exec) {
    const std::size_t n = states.size();
    if (targets.size() != n) throw RegressionError("targets and states differ in length");
    if (n == 0) throw RegressionError("no samples to regress");

    const auto [lo_it, hi_it] = std::minmax_element(states.begin(), states.end());
    const double lo = *lo_it, hi = *hi_it;
    double center = 0.0, half = 1.0;
    if (basis.standardize) {
        center = 0.5 * (lo + hi);
        half = 0.5 * (hi - lo);
    }
    const bool degenerate = (hi - lo) <= 1e-12 * (1.0 + std::abs(0.5 * (lo + hi)));
    if (degenerate || basis.degree == 0) {
        const MeanSe m = mean_se(exec, targets);
        const double sd = m.se * std::sqrt(static_cast<double>(n));
        return RegressionFit({m.mean}, degenerate ? lo : center, half > 0.0 ? half : 1.0, sd,
                             degenerate);
    }

    const std::size_t k = basis.size();
    if (n < k) {
        throw RegressionError("need at least " + std::to_string(k) + " samples for degree " +
                              std::to_string(basis.degree) + ", got " + std::to_string(n) +
                              "; use a smaller basis degree");
    }
    const NormalEquations ne = assemble_normal_equations(exec, states, targets, center, half,
                                                         basis.degree);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> G(
        ne.gram.data(), k, k);
    Eigen::Map<const Eigen::VectorXd> b(ne.rhs.data(), k);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G);
    qr.setThreshold(1e-11);
    if (static_cast<std::size_t>(qr.rank()) < k) {
        throw RegressionError("design matrix has rank " + std::to_string(qr.rank()) + " < " +
                              std::to_string(k) + "; use a smaller basis degree");
    }
    const Eigen::VectorXd coef = qr.solve(b);
    std::vector<double> c(coef.data(), coef.data() + k);

    RegressionFit fit(std::move(c), center, half, 0.0, false);
    std::vector<double> resid2(n);
    for_each_index(exec, n, [&](std::size_t i) {
        const double r = targets[i] - fit(states[i]);
        resid2[i] = r * r;
    });
    const double dof = static_cast<double>(n > k ? n - k : 1);
    const double sd = std::sqrt(sum(exec, resid2) / dof);
    return RegressionFit(std::vector<double>(fit.coefficients().begin(), fit.coefficients().end()),
                         center, half, sd, false);
}

CondExp condexp_regression(std::span<const double> targets, std::span<const double> states,
                           const RegressionBasis& basis, const Exec& exec) {
    CondExp out{fit_regression(targets, states, basis, exec), std::vector<double>(states.size())};
    for_each_index(exec, states.size(), [&](std::size_t i) { out.fitted[i] = out.fit(states[i]); });
    return out;
}

}  // namespace rbsdej
