#include "rbsdej/reflect.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>

namespace rbsdej {

namespace {

constexpr double kTolK = 1e-12;

}  // namespace

PenalizationSchedule PenalizationSchedule::geometric(double n0, std::size_t levels,
                                                     double stop_tol) {
    PenalizationSchedule s;
    s.stop_tol = stop_tol;
    for (std::size_t k = 0; k < levels; ++k) s.n_values.push_back(std::ldexp(n0, static_cast<int>(k)));
    s.validate();
    return s;
}

void PenalizationSchedule::validate() const {
    if (n_values.empty()) throw DomainError("schedule: no penalty levels");
    if (!(stop_tol > 0.0)) throw DomainError("schedule: stop_tol must be > 0");
    for (std::size_t k = 0; k < n_values.size(); ++k) {
        if (!(n_values[k] > 0.0) || !std::isfinite(n_values[k])) {
            throw DomainError("schedule: penalty levels must be finite and > 0");
        }
        if (k > 0 && !(n_values[k] > n_values[k - 1])) {
            throw DomainError("schedule: penalty levels must be strictly increasing");
        }
    }
}

bool touches(double y, double L) { return std::abs(y - L) <= 1e-8 * (1.0 + std::abs(L)); }

SkorokhodReport skorokhod_report(const BackwardSolution& sol, const ProblemSpec& spec,
                                 const PathBundle& bundle, const Exec& exec) {
    const std::size_t M = sol.n_paths;
    const std::size_t N = sol.n_nodes - 1;
    std::vector<double> flat(M), jump(M), viol(M);
    for_each_index(exec, M, [&](std::size_t p) {
        double s = 0.0, bad = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double L = spec.obstacle(bundle.grid.t(i), bundle.x(p, i));
            const double dk = sol.K(p, i + 1) - sol.K(p, i);
            const double gap = sol.Y(p, i) - L;
            s += gap * dk;
            if (dk > kTolK && gap > 1e-8 * (1.0 + std::abs(L))) bad += 1.0;
        }
        flat[p] = std::abs(s);
        viol[p] = bad;

        const double xN = bundle.x(p, N);
        const double L_left = spec.obstacle_left_T(xN);
        const double expected =
            N >= 1 && touches(sol.Y(p, N - 1), L_left) ? std::max(L_left - sol.Y(p, N), 0.0) : 0.0;
        jump[p] = std::abs(sol.k_jump_T[p] - expected);
    });
    SkorokhodReport r;
    r.flat_integral = mean_se(exec, flat).mean;
    r.jump_condition_residual = mean_se(exec, jump).mean;
    r.complementarity_violation_fraction =
        N ? sum(exec, viol) / static_cast<double>(M * N) : 0.0;
    return r;
}

PenaltyError penalty_error(const BackwardSolution& sol, const ProblemSpec& spec,
                           const PathBundle& bundle, const Exec& exec) {
    const std::size_t M = sol.n_paths;
    const double p = spec.exponents.p();
    const double beta = spec.exponents.beta();
    PenaltyError e;
    e.per_path.assign(M, 0.0);
    for_each_index(exec, M, [&](std::size_t path) {
        double sup = 0.0;
        for (std::size_t i = 0; i < sol.n_nodes; ++i) {
            const double L = spec.obstacle(bundle.grid.t(i), bundle.x(path, i));
            const double short_by = std::max(L - sol.Y(path, i), 0.0);
            if (short_by > 0.0) {
                sup = std::max(sup, std::exp(0.5 * p * beta * bundle.a(path, i)) *
                                        std::pow(short_by, p));
            }
        }
        e.per_path[path] = sup;
    });
    const MeanSe ms = mean_se(exec, e.per_path);
    e.mean = ms.mean;
    e.se = ms.se;
    return e;
}

BackwardSolution solve_reflected_level(const ProblemSpec& spec, const PathBundle& bundle,
                                       const RegressionBasis& basis, double n_penalty,
                                       const ReflectOptions& options) {
    if (spec.driver.frozen_independent()) {
        PenalizedOptions po;
        po.terminal = TerminalMode::reflected;
        po.exec = options.exec;
        return solve_penalized(spec, bundle, basis, n_penalty, po);
    }
    PicardOptions po;
    po.tol = options.picard_tol;
    po.max_iter = options.picard_max_iter;
    po.terminal = TerminalMode::reflected;
    po.exec = options.exec;
    return picard_solve(spec, bundle, basis, n_penalty, po);
}

ReflectedResult solve_reflected_penalization(const ProblemSpec& spec, const PathBundle& bundle,
                                             const RegressionBasis& basis,
                                             const PenalizationSchedule& schedule,
                                             const ReflectOptions& options) {
    schedule.validate();
    const Exec& exec = options.exec;
    ReflectedResult out;
    std::vector<double> prev_errors;

    for (double n : schedule.n_values) {
        const auto start = std::chrono::steady_clock::now();
        BackwardSolution sol = solve_reflected_level(spec, bundle, basis, n, options);
        PenaltyError err = penalty_error(sol, spec, bundle, exec);
        const SkorokhodReport rep = skorokhod_report(sol, spec, bundle, exec);

        std::vector<double> kT(sol.n_paths);
        for (std::size_t p = 0; p < sol.n_paths; ++p) kT[p] = sol.K_T(p);

        ConvergenceRow row;
        row.n = n;
        row.penalty_error = err.mean;
        row.penalty_error_se = err.se;
        row.y0_mean = sol.y0();
        row.y0_stderr = sol.y0_stderr();
        row.k_T_mean = mean_se(exec, kT).mean;
        row.flat_integral = rep.flat_integral;
        row.wall_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        if (!prev_errors.empty()) {
            std::vector<double> diff(err.per_path.size());
            for (std::size_t p = 0; p < diff.size(); ++p) diff[p] = err.per_path[p] - prev_errors[p];
            const MeanSe d = mean_se(exec, diff);
            if (d.mean > 2.0 * d.se) out.errors_monotone = false;
        }
        prev_errors = std::move(err.per_path);
        out.table.push_back(row);
        out.solution = std::move(sol);
        out.report = rep;
        if (row.penalty_error < schedule.stop_tol) {
            out.reached_tol = true;
            break;
        }
    }
    if (!out.reached_tol) {
        out.warning = fmt::format("penalty error {:.3g} above stop_tol {:.3g} after n = {:g}",
                                  out.table.back().penalty_error, schedule.stop_tol,
                                  out.table.back().n);
    }
    return out;
}

BackwardSolution solve_reflected_dp_oracle(const ProblemSpec& spec, const PathBundle& bundle,
                                           const RegressionBasis& basis, const Exec& exec) {
    PenalizedOptions po;
    po.rule = ObstacleRule::projection;
    po.exec = exec;
    BackwardSolution sol = solve_penalized(spec, bundle, basis, 0.0, po);

    const std::size_t N = sol.n_nodes - 1;
    for_each_index(exec, sol.n_paths, [&](std::size_t p) {
        const double xN = bundle.x(p, N);
        const double L_left = spec.obstacle_left_T(xN);
        const double cap = std::max(L_left - sol.Y(p, N), 0.0);
        if (cap <= 0.0 || !touches(sol.Y(p, N - 1), L_left)) return;
        const double last = sol.K(p, N) - sol.K(p, N - 1);
        const double jump = std::min(last, cap);
        sol.k_jump_T[p] = jump;
        sol.k_cum[sol.idx(p, N)] -= jump;
    });
    return sol;
}

std::string convergence_csv_header() {
    return "n,penalty_error,Y0_mean,Y0_stderr,K_T_mean,flat_integral,wall_time";
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
    os << convergence_csv_header() << '\n';
    for (const auto& r : rows) {
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.6f}\n", r.n,
                          r.penalty_error, r.y0_mean, r.y0_stderr, r.k_T_mean, r.flat_integral,
                          r.wall_time);
    }
}

}  // namespace rbsdej
