#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rbsdej/exec.hpp"
#include "rbsdej/model.hpp"
#include "rbsdej/regression.hpp"
#include "rbsdej/simulate.hpp"

namespace rbsdej {

struct RunRecord {
    double n_penalty = 0.0;
    std::size_t picard_iters = 0;
    std::vector<double> residual_history;
    std::uint64_t seed = 0;
    double wall_time = 0.0;
    double beta = 0.0;
    /// Residuals failed to decrease for three consecutive iterations.
    bool non_contraction = false;
    std::string diagnostic;
};

/// Discrete (Y, Z, U, Γ, K) on the grid, path-major. Row `node` of z, u and
/// gamma holds the value used on [t_node, t_node+1); the row at T is zero.
/// k_cum[path][i+1] - k_cum[path][i] is the increment attributed to step i;
/// the predictable jump at T is kept apart in k_jump_T.
struct BackwardSolution {
    std::size_t n_paths = 0;
    std::size_t n_nodes = 0;
    std::size_t n_marks = 0;

    std::vector<double> y;
    std::vector<double> z;
    std::vector<double> u;  // [path][node][mark]
    std::vector<double> gamma;
    std::vector<double> k_cum;
    std::vector<double> k_jump_T;  // [path]
    /// Standard error of the continuation estimate at each node.
    std::vector<double> fit_stderr;
    RunRecord run;

    BackwardSolution() = default;
    BackwardSolution(std::size_t paths, std::size_t nodes, std::size_t marks);

    std::size_t idx(std::size_t path, std::size_t node) const { return path * n_nodes + node; }
    double Y(std::size_t path, std::size_t node) const { return y[idx(path, node)]; }
    double Z(std::size_t path, std::size_t node) const { return z[idx(path, node)]; }
    double U(std::size_t path, std::size_t node, std::size_t mark) const {
        return u[idx(path, node) * n_marks + mark];
    }
    std::span<const double> U_row(std::size_t path, std::size_t node) const {
        return {u.data() + idx(path, node) * n_marks, n_marks};
    }
    double K(std::size_t path, std::size_t node) const { return k_cum[idx(path, node)]; }
    /// K_T including the terminal predictable jump.
    double K_T(std::size_t path) const { return K(path, n_nodes - 1) + k_jump_T[path]; }

    /// Mean of Y at t_0.
    double y0() const;
    double y0_stderr() const { return fit_stderr.empty() ? 0.0 : fit_stderr.front(); }
};

/// (z, u) fields at which the driver is evaluated in frozen mode.
struct FrozenFields {
    std::vector<double> z;  // same layout as BackwardSolution::z
    std::vector<double> u;  // same layout as BackwardSolution::u

    static FrozenFields zeros(std::size_t paths, std::size_t nodes, std::size_t marks);
    static FrozenFields from(const BackwardSolution& sol);
};

enum class TerminalMode {
    /// Y_T = ξ and the recursion starts from ξ.
    plain,
    /// The recursion starts from Y_{T-} = max(ξ, L_{T-}); the difference is
    /// recorded as the predictable jump ΔK_T = (ξ - L_{T-})^-.
    reflected,
};

/// How the obstacle enters each backward step.
enum class ObstacleRule {
    /// y = c + f dt + n dt (y - L)^-
    penalty,
    /// y = max(L, c + f dt): the discrete reflected (dynamic programming) step
    projection,
};

struct PenalizedOptions {
    const FrozenFields* frozen = nullptr;
    TerminalMode terminal = TerminalMode::plain;
    ObstacleRule rule = ObstacleRule::penalty;
    Exec exec{};
};

/// x n / max(|x|, n)
double truncate_qn(double x, double n);

/// Root of y = c + f(y) dt + n dt (y - L)^-: closed form when `affine`,
/// bracketed bisection to 1e-12 otherwise. Returns false if no root was
/// bracketed or the step is not monotone.
template <typename F>
bool solve_implicit_step(F&& f, double c, double dt, double n, double L, bool affine, double& out);

/// Backward induction for the penalized equation with generator
/// f(t, y, z, u) + n (y - L_t)^-.
BackwardSolution solve_penalized(const ProblemSpec& spec, const PathBundle& bundle,
                                 const RegressionBasis& basis, double n_penalty,
                                 const PenalizedOptions& options = {});

struct PicardOptions {
    double tol = 1e-8;
    std::size_t max_iter = 50;
    TerminalMode terminal = TerminalMode::plain;
    Exec exec{};
};

/// Fixed-point iteration of the frozen-(z,u) solve. The first solve uses
/// (z,u) = 0; every following solve freezes the previous iterate's fields.
/// Stops once the weighted distance between successive iterates drops
/// below `tol`; RunRecord::residual_history holds those distances.
BackwardSolution picard_solve(const ProblemSpec& spec, const PathBundle& bundle,
                              const RegressionBasis& basis, double n_penalty,
                              const PicardOptions& options = {});

/// Y with frozen (z,u) and the truncation q_n applied to ξ and f(t,0,z,u):
/// f_n(y) = f(y,z,u) - f(0,z,u) + q_n(f(0,z,u)), ξ_n = q_n(ξ).
ProblemSpec truncated_problem(const ProblemSpec& spec, double level);

// --- implementation ---------------------------------------------------------

template <typename F>
bool solve_implicit_step(F&& f, double c, double dt, double n, double L, bool affine,
                         double& out) {
    if (affine) {
        const double a = f(0.0);
        const double b = f(1.0) - a;
        const double free_denom = 1.0 - b * dt;
        if (!(free_denom > 0.0)) return false;
        const double inactive = (c + a * dt) / free_denom;
        if (inactive >= L) {
            out = inactive;
            return true;
        }
        out = (c + a * dt + n * dt * L) / (free_denom + n * dt);
        return std::isfinite(out);
    }
    auto g = [&](double y) {
        const double pen = y < L ? L - y : 0.0;
        return y - c - f(y) * dt - n * dt * pen;
    };
    double width = 1.0 + std::abs(c);
    double lo = c - width, hi = c + width;
    double glo = g(lo), ghi = g(hi);
    for (int k = 0; k < 200 && !(glo <= 0.0 && ghi >= 0.0); ++k) {
        width *= 2.0;
        if (glo > 0.0) {
            lo = c - width;
            glo = g(lo);
        }
        if (ghi < 0.0) {
            hi = c + width;
            ghi = g(hi);
        }
        if (!std::isfinite(glo) || !std::isfinite(ghi)) return false;
    }
    if (!(glo <= 0.0 && ghi >= 0.0)) return false;
    for (int k = 0; k < 400; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-12 * (1.0 + std::abs(mid))) break;
        const double gm = g(mid);
        if (gm == 0.0) {
            lo = hi = mid;
            break;
        }
        if (gm < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    out = 0.5 * (lo + hi);
    return true;
}

}  // namespace rbsdej
