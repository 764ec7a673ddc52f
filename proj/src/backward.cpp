#include "rbsdej/backward.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "rbsdej/norms.hpp"

namespace rbsdej {

BackwardSolution::BackwardSolution(std::size_t paths, std::size_t nodes, std::size_t marks)
    : n_paths(paths),
      n_nodes(nodes),
      n_marks(marks),
      y(paths * nodes, 0.0),
      z(paths * nodes, 0.0),
      u(paths * nodes * marks, 0.0),
      gamma(paths * nodes, 0.0),
      k_cum(paths * nodes, 0.0),
      k_jump_T(paths, 0.0),
      fit_stderr(nodes, 0.0) {}

double BackwardSolution::y0() const {
    double s = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) s += Y(p, 0);
    return n_paths ? s / static_cast<double>(n_paths) : 0.0;
}

FrozenFields FrozenFields::zeros(std::size_t paths, std::size_t nodes, std::size_t marks) {
    return {std::vector<double>(paths * nodes, 0.0),
            std::vector<double>(paths * nodes * marks, 0.0)};
}

FrozenFields FrozenFields::from(const BackwardSolution& sol) { return {sol.z, sol.u}; }

double truncate_qn(double x, double n) {
    if (!(n > 0.0)) throw DomainError("truncate_qn: n must be > 0");
    return std::abs(x) <= n ? x : std::copysign(n, x);
}

ProblemSpec truncated_problem(const ProblemSpec& spec, double level) {
    if (!(level > 0.0)) throw DomainError("truncated_problem: level must be > 0");
    ProblemSpec out = spec;
    out.terminal = [f = spec.terminal, level](double x) { return truncate_qn(f(x), level); };
    out.driver.fn = [f = spec.driver.fn, level](double t, double x, double y, double z,
                                                std::span<const double> u) {
        const double f0 = f(t, x, 0.0, z, u);
        return f(t, x, y, z, u) - f0 + truncate_qn(f0, level);
    };
    return out;
}

namespace {

void check_inputs(const ProblemSpec& spec, const PathBundle& bundle, double n_penalty) {
    if (bundle.n_marks != spec.marks.size()) {
        throw DomainError("bundle and problem disagree on the number of marks");
    }
    if (std::abs(bundle.grid.horizon() - spec.horizon) > 1e-12 * std::max(1.0, spec.horizon)) {
        throw DomainError("bundle grid horizon differs from the problem horizon");
    }
    if (!(n_penalty >= 0.0) || !std::isfinite(n_penalty)) {
        throw DomainError("penalty level must be finite and >= 0");
    }
}

}  // namespace

BackwardSolution solve_penalized(const ProblemSpec& spec, const PathBundle& bundle,
                                 const RegressionBasis& basis, double n_penalty,
                                 const PenalizedOptions& options) {
    check_inputs(spec, bundle, n_penalty);
    const auto start = std::chrono::steady_clock::now();
    const Exec& exec = options.exec;
    const std::size_t M = bundle.n_paths;
    const std::size_t N = bundle.n_steps();
    const std::size_t nodes = N + 1;
    const std::size_t m = bundle.n_marks;
    const FrozenFields* frozen = options.frozen;
    if (frozen && (frozen->z.size() != M * nodes || frozen->u.size() != M * nodes * m)) {
        throw DomainError("frozen (z,u) fields do not match the bundle");
    }

    BackwardSolution sol(M, nodes, m);
    std::vector<double> next(M), states(M), ztargets(M), dk(M * N, 0.0);

    for_each_index(exec, M, [&](std::size_t p) {
        const double x = bundle.x(p, N);
        const double xi = spec.terminal(x);
        sol.y[sol.idx(p, N)] = xi;
        double start_value = xi;
        if (options.terminal == TerminalMode::reflected) {
            const double jump = std::max(spec.obstacle_left_T(x) - xi, 0.0);
            sol.k_jump_T[p] = jump;
            start_value = xi + jump;
        }
        next[p] = start_value;
    });

    const auto marks = spec.marks.marks();
    const auto weights = spec.marks.weights();
    const bool affine = spec.driver.affine_in_y;

    for (std::size_t step = N; step-- > 0;) {
        const double t = bundle.grid.t(step);
        const double dt = bundle.grid.dt(step);
        bundle.slice(step, states);

        const RegressionFit cont = fit_regression(next, states, basis, exec);
        for_each_index(exec, M, [&](std::size_t p) {
            ztargets[p] = next[p] * bundle.dB(p, step) / dt;
        });
        const RegressionFit zfit = fit_regression(ztargets, states, basis, exec);
        sol.fit_stderr[step] =
            cont.residual_sd() *
            std::sqrt(static_cast<double>(cont.coefficients().size()) / static_cast<double>(M));

        for_each_index(exec, M, [&](std::size_t p) {
            const double x = states[p];
            const double c = cont(x);
            const std::size_t row = sol.idx(p, step);
            double* u_row = sol.u.data() + row * m;
            double gamma = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                u_row[j] = cont(x + spec.forward.jump_size(t, x, marks[j])) - c;
                gamma += weights[j] * u_row[j];
            }
            sol.gamma[row] = gamma;
            sol.z[row] = zfit(x);

            const double zd = frozen ? frozen->z[row] : sol.z[row];
            const std::span<const double> ud =
                frozen ? std::span<const double>(frozen->u.data() + row * m, m)
                       : std::span<const double>(u_row, m);
            const double L = spec.obstacle(t, x);
            auto f = [&](double yv) { return spec.driver(t, x, yv, zd, ud); };
            double yv = 0.0;
            if (options.rule == ObstacleRule::projection) {
                if (!solve_implicit_step(f, c, dt, 0.0, L, affine, yv) || !std::isfinite(yv)) {
                    throw SolverError("implicit step failed", step, p);
                }
                dk[p * N + step] = std::max(L - yv, 0.0);
                yv = std::max(L, yv);
            } else {
                if (!solve_implicit_step(f, c, dt, n_penalty, L, affine, yv) ||
                    !std::isfinite(yv)) {
                    throw SolverError("implicit penalized step failed", step, p);
                }
                dk[p * N + step] = n_penalty * dt * std::max(L - yv, 0.0);
            }
            sol.y[row] = yv;
        });

        for (std::size_t p = 0; p < M; ++p) next[p] = sol.y[sol.idx(p, step)];
    }

    for_each_index(exec, M, [&](std::size_t p) {
        double k = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            k += dk[p * N + i];
            sol.k_cum[sol.idx(p, i + 1)] = k;
        }
    });

    sol.run.n_penalty = n_penalty;
    sol.run.seed = bundle.seed;
    sol.run.beta = spec.exponents.beta();
    sol.run.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

BackwardSolution picard_solve(const ProblemSpec& spec, const PathBundle& bundle,
                              const RegressionBasis& basis, double n_penalty,
                              const PicardOptions& options) {
    if (!(options.tol > 0.0)) throw DomainError("picard_solve: tol must be > 0");
    if (options.max_iter < 1) throw DomainError("picard_solve: max_iter must be >= 1");
    const auto start = std::chrono::steady_clock::now();

    FrozenFields frozen =
        FrozenFields::zeros(bundle.n_paths, bundle.n_nodes(), bundle.n_marks);
    PenalizedOptions po{&frozen, options.terminal, ObstacleRule::penalty, options.exec};
    BackwardSolution prev = solve_penalized(spec, bundle, basis, n_penalty, po);

    std::vector<double> history;
    std::size_t rising = 0;
    bool non_contraction = false;
    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        frozen = FrozenFields::from(prev);
        BackwardSolution cur = solve_penalized(spec, bundle, basis, n_penalty, po);
        const double d =
            picard_distance(cur, prev, bundle, spec.exponents, spec.marks, options.exec);
        history.push_back(d);
        prev = std::move(cur);
        if (d < options.tol) break;
        if (history.size() >= 2 && d >= history[history.size() - 2]) {
            if (++rising >= 3) {
                non_contraction = true;
                break;
            }
        } else {
            rising = 0;
        }
    }

    prev.run.picard_iters = history.size();
    prev.run.residual_history = std::move(history);
    prev.run.non_contraction = non_contraction;
    if (non_contraction) {
        prev.run.diagnostic = "Picard residuals failed to decrease for 3 consecutive iterations "
                              "at beta = " + std::to_string(spec.exponents.beta());
    }
    prev.run.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return prev;
}

}  // namespace rbsdej
