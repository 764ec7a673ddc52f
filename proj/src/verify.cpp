#include "rbsdej/verify.hpp"

#include <cmath>
#include <fmt/format.h>
#include <random>

namespace rbsdej {

void PropertyResult::absorb(const PropertyResult& other) {
    trials += other.trials;
    failures += other.failures;
    worst_margin = std::max(worst_margin, other.worst_margin);
    for (const auto& w : other.witnesses) {
        if (witnesses.size() < kMaxWitnesses) witnesses.push_back(w);
    }
    passed = passed && other.passed;
}

JumpInequality check_jump_inequality(double y, double u, double p) {
    if (!(p > 1.0 && p < 2.0)) throw DomainError("check_jump_inequality: p must lie in (1,2)");
    const double ay = std::abs(y);
    const double ayu = std::abs(y + u);
    const double sign = y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0);
    JumpInequality r;
    r.lhs = std::pow(ayu, p) - std::pow(ay, p) - p * std::pow(ay, p - 1.0) * sign * u;
    const double big = std::max(ay, ayu);
    r.rhs = big != 0.0 ? 0.5 * p * (p - 1.0) * u * u * std::pow(big, p - 2.0) : 0.0;
    r.slack = r.lhs - r.rhs + 1e-12 * (1.0 + std::abs(r.lhs));
    r.pass = r.slack >= 0.0;
    return r;
}

PropertyResult jump_inequality_suite(std::size_t samples_per_p, const std::vector<double>& ps,
                                     std::uint64_t seed, double range) {
    PropertyResult res;
    res.name = "jump_inequality";
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> draw(-range, range);
    for (double p : ps) {
        for (std::size_t k = 0; k < samples_per_p; ++k) {
            const double y = draw(gen);
            const double u = draw(gen);
            const JumpInequality j = check_jump_inequality(y, u, p);
            res.record(j.pass, -j.slack, [&] {
                return fmt::format("y={:.17g} u={:.17g} p={:g} lhs={:.17g} rhs={:.17g}", y, u, p,
                                   j.lhs, j.rhs);
            });
        }
    }
    res.passed = res.failures == 0;
    return res;
}

PropertyResult comparison_suite(const ProblemSpec& spec, const PathBundle& bundle,
                                const RegressionBasis& basis,
                                const std::vector<std::pair<double, double>>& n_pairs,
                                const Exec& exec) {
    if (!spec.driver.frozen_independent()) {
        throw DomainError("comparison_suite: driver must not depend on (z, u)");
    }
    PropertyResult res;
    res.name = "comparison";
    PenalizedOptions po;
    po.exec = exec;
    bool all_exact = true;
    for (const auto& [n, n2] : n_pairs) {
        if (!(n < n2)) throw DomainError("comparison_suite: pairs must satisfy n < n'");
        const BackwardSolution lo = solve_penalized(spec, bundle, basis, n, po);
        const BackwardSolution hi = solve_penalized(spec, bundle, basis, n2, po);
        for (std::size_t i = 0; i < lo.n_nodes; ++i) {
            const double se = std::hypot(lo.fit_stderr[i], hi.fit_stderr[i]);
            if (se != 0.0) all_exact = false;
            for (std::size_t p = 0; p < lo.n_paths; ++p) {
                const double excess = lo.Y(p, i) - hi.Y(p, i) - 3.0 * se;
                res.record(excess <= 0.0, excess, [&] {
                    return fmt::format("n={:g} n'={:g} path={} node={} y={:.17g} y'={:.17g}", n,
                                       n2, p, i, lo.Y(p, i), hi.Y(p, i));
                });
            }
        }
    }
    const double allowed = all_exact ? 0.0 : 1e-3 * static_cast<double>(res.trials);
    res.passed = static_cast<double>(res.failures) <= allowed;
    return res;
}

PenaltyDecay penalty_decay_suite(const ProblemSpec& spec, const PathBundle& bundle,
                                 const RegressionBasis& basis, const PenalizationSchedule& schedule,
                                 const ReflectOptions& options) {
    schedule.validate();
    if (schedule.n_values.size() < 3) throw DomainError("penalty_decay_suite: needs >= 3 levels");
    PenaltyDecay out;
    out.result.name = "penalty_decay";
    std::vector<double> prev;
    for (double n : schedule.n_values) {
        const BackwardSolution sol = solve_reflected_level(spec, bundle, basis, n, options);
        PenaltyError err = penalty_error(sol, spec, bundle, options.exec);
        if (!prev.empty()) {
            std::vector<double> diff(prev.size());
            for (std::size_t p = 0; p < diff.size(); ++p) diff[p] = err.per_path[p] - prev[p];
            const MeanSe d = mean_se(options.exec, diff);
            const double excess = d.mean - 2.0 * d.se;
            out.result.record(excess <= 0.0, excess, [&] {
                return fmt::format("n={:g} error={:.6g} previous={:.6g} diff_se={:.3g}", n,
                                   err.mean, out.errors.back().mean, d.se);
            });
        }
        prev = std::move(err.per_path);
        err.per_path.clear();
        out.errors.push_back(err);
    }
    const double first = out.errors.front().mean;
    const double last = out.errors.back().mean;
    out.final_over_first = first > 0.0 ? last / first : 0.0;
    if (first > 0.0) {
        out.result.record(last < first, last - first, [&] {
            return fmt::format("final error {:.6g} not below first {:.6g}", last, first);
        });
    }
    out.result.passed = out.result.failures == 0;
    return out;
}

ProblemSpec scale_data(const ProblemSpec& spec, double s) {
    if (!(s > 0.0)) throw DomainError("scale_data: s must be > 0");
    ProblemSpec out = spec;
    out.terminal = [f = spec.terminal, s](double x) { return s * f(x); };
    out.obstacle = [f = spec.obstacle, s](double t, double x) { return s * f(t, x); };
    out.obstacle_left_T = [f = spec.obstacle_left_T, s](double x) { return s * f(x); };
    out.coeffs.varphi = [f = spec.coeffs.varphi, s](double t, double x) { return s * f(t, x); };
    out.driver.fn = [f = spec.driver.fn, s](double t, double x, double y, double z,
                                            std::span<const double> u) {
        std::vector<double> us(u.begin(), u.end());
        for (double& v : us) v /= s;
        return s * f(t, x, y / s, z / s, us);
    };
    return out;
}

double data_norm(const ProblemSpec& spec, const PathBundle& bundle, const Exec& exec) {
    const double p = spec.exponents.p();
    const double beta = spec.exponents.beta();
    const std::size_t N = bundle.n_steps();
    std::vector<double> v(bundle.n_paths);
    for_each_index(exec, bundle.n_paths, [&](std::size_t path) {
        const double xi = spec.terminal(bundle.x(path, N));
        double total = std::exp(0.5 * p * beta * bundle.a(path, N)) * std::pow(std::abs(xi), p);
        double integral = 0.0, sup = 0.0;
        for (std::size_t i = 0; i <= N; ++i) {
            const double t = bundle.grid.t(i);
            const double x = bundle.x(path, i);
            const double w = std::exp(0.5 * p * beta * bundle.a(path, i));
            sup = std::max(sup, w * std::pow(std::max(spec.obstacle(t, x), 0.0), p));
            if (i < N) {
                integral += std::exp(0.5 * beta * bundle.a(path, i)) *
                            std::abs(spec.coeffs.varphi(t, x)) * bundle.grid.dt(i);
            }
        }
        v[path] = total + std::pow(integral, p) + sup;
    });
    return mean_se(exec, v).mean;
}

namespace {

bool stable_ratio(double a, double b) {
    if (a == 0.0 && b == 0.0) return true;
    if (!(a > 0.0) || !(b > 0.0)) return false;
    return std::abs(std::log(a / b)) <= std::log(2.0);
}

double ratio_of(double lhs, double rhs) {
    if (rhs == 0.0) return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return lhs / rhs;
}

const char* const kNormNames[] = {"s_p_beta", "s_pA_beta", "h_p_beta",
                                  "l_p_lambda_beta", "l_p_mu_beta", "k_p"};

std::vector<double> means(const NormReport& r) {
    return {r.s_p_beta, r.s_pA_beta, r.h_p_beta, r.l_p_lambda_beta, r.l_p_mu_beta, r.k_p};
}

}  // namespace

Apriori apriori_suite(const ProblemSpec& spec, const PathBundle& bundle,
                      const RegressionBasis& basis, bool deterministic,
                      const AprioriOptions& options) {
    const Exec& exec = options.reflect.exec;
    const double p = spec.exponents.p();
    Apriori out;
    out.result.name = "apriori";

    auto norms_of = [&](const ProblemSpec& s, const PathBundle& b) {
        const BackwardSolution sol = solve_reflected_level(s, b, basis, options.n_penalty, options.reflect);
        return estimate_norms(sol, b, s.exponents, s.marks, exec);
    };

    out.base = norms_of(spec, bundle);
    const std::vector<double> base = means(out.base);
    for (std::size_t k = 0; k < base.size(); ++k) {
        out.result.record(std::isfinite(base[k]), -std::numeric_limits<double>::infinity(), [&] {
            return fmt::format("{} is not finite", kNormNames[k]);
        });
    }

    const double tol = deterministic ? options.exact_tolerance : options.mc_tolerance;
    for (double s : options.scales) {
        const std::vector<double> scaled = means(norms_of(scale_data(spec, s), bundle));
        const double factor = std::pow(s, p);
        for (std::size_t k = 0; k < base.size(); ++k) {
            const double expected = factor * base[k];
            const double dev = std::abs(scaled[k] - expected);
            const double allowance = tol * std::abs(expected) + 1e-300;
            out.result.record(dev <= allowance, dev - allowance, [&] {
                return fmt::format("s={:g} {}: {:.17g} vs {:.17g}", s, kNormNames[k], scaled[k],
                                   expected);
            });
        }
    }

    out.ratio_N = ratio_of(out.base.total(), data_norm(spec, bundle, exec));
    if (options.refinement) {
        const TimeGrid fine = build_grid(bundle.grid.horizon(), 2 * bundle.n_steps());
        const PathBundle b2 = sample_paths(spec, fine, bundle.n_paths, bundle.seed, exec);
        out.ratio_2N = ratio_of(norms_of(spec, b2).total(), data_norm(spec, b2, exec));
        const bool ok = stable_ratio(out.ratio_N, out.ratio_2N);
        const double margin = ok && out.ratio_N > 0.0
                                  ? std::abs(std::log(out.ratio_N / out.ratio_2N)) - std::log(2.0)
                                  : (ok ? 0.0 : std::numeric_limits<double>::infinity());
        out.result.record(ok, margin, [&] {
            return fmt::format("ratio N={:.6g} 2N={:.6g}", out.ratio_N, out.ratio_2N);
        });
    }
    out.result.passed = out.result.failures == 0;
    return out;
}

Contraction contraction_suite(const ProblemSpec& spec, const PathBundle& bundle,
                              const RegressionBasis& basis, const std::vector<double>& beta_values,
                              double n_penalty, const PicardOptions& options) {
    if (beta_values.empty()) throw DomainError("contraction_suite: no beta values");
    Contraction out;
    out.result.name = "contraction";
    const double p = spec.exponents.p();
    const double beta_max = *std::max_element(beta_values.begin(), beta_values.end());
    BackwardSolution at_max;

    for (double beta : beta_values) {
        if (!(beta > 2.0 * (p - 1.0) / p)) {
            throw DomainError("contraction_suite: beta must exceed 2(p-1)/p");
        }
        ProblemSpec s = spec;
        s.exponents = Exponents(p, beta, spec.exponents.eps());
        BackwardSolution sol = picard_solve(s, bundle, basis, n_penalty, options);
        const auto& h = sol.run.residual_history;
        ContractionRow row;
        row.beta = beta;
        row.iterations = sol.run.picard_iters;
        row.non_contraction = sol.run.non_contraction;
        for (std::size_t k = 0; k + 1 < h.size(); ++k) {
            if (h[k] > 0.0) row.max_ratio = std::max(row.max_ratio, h[k + 1] / h[k]);
        }
        if (beta == beta_max) {
            for (std::size_t k = 0; k + 1 < h.size(); ++k) {
                const double r = h[k] > 0.0 ? h[k + 1] / h[k] : 0.0;
                out.result.record(r < 1.0, r - 1.0, [&] {
                    return fmt::format("beta={:g} k={} ratio={:.6g}", beta, k + 1, r);
                });
            }
            if (sol.run.non_contraction) {
                out.result.record(false, 0.0, [&] { return sol.run.diagnostic; });
            }
            at_max = std::move(sol);
        }
        out.table.push_back(row);
    }

    PenalizedOptions po;
    po.terminal = options.terminal;
    po.exec = options.exec;
    const BackwardSolution one = solve_penalized(spec, bundle, basis, n_penalty, po);
    out.y0_picard = at_max.y0();
    out.y0_one_pass = one.y0();
    out.y0_stderr = std::hypot(at_max.y0_stderr(), one.y0_stderr());
    const double gap = std::abs(out.y0_picard - out.y0_one_pass);
    const double allowance = 2.0 * out.y0_stderr + 1e-12 * (1.0 + std::abs(out.y0_one_pass));
    out.result.record(gap <= allowance, gap - allowance, [&] {
        return fmt::format("picard Y0={:.17g} one-pass Y0={:.17g} se={:.3g}", out.y0_picard,
                           out.y0_one_pass, out.y0_stderr);
    });
    out.result.passed = out.result.failures == 0;
    return out;
}

PropertyResult lenglart_suite(std::size_t configs, std::size_t n_paths, std::uint64_t seed,
                              const Exec& exec) {
    PropertyResult res;
    res.name = "lenglart";
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto in = [&](double lo, double hi) { return lo + (hi - lo) * unit(gen); };

    for (std::size_t c = 0; c < configs; ++c) {
        const std::size_t m = 1 + static_cast<std::size_t>(unit(gen) * 3.0) % 3;
        std::vector<double> marks(m), weights(m), scale(m);
        for (std::size_t j = 0; j < m; ++j) {
            marks[j] = in(-1.0, 1.0);
            weights[j] = in(0.05, 2.0);
            scale[j] = in(-2.0, 2.0);
        }
        const double p = in(1.1, 1.9);
        const double beta = in(0.0, 3.0);
        const double T = in(0.5, 2.0);
        const std::size_t N = 10 + static_cast<std::size_t>(unit(gen) * 20.0);

        ProblemSpec spec;
        spec.name = "lenglart";
        spec.exponents = Exponents(p, beta, 0.1);
        spec.horizon = T;
        spec.marks = MarkSpace(marks, weights);
        spec.coeffs = CoefficientSpec::constant(0.0, in(0.0, 1.0), 0.0, in(0.5, 2.0), 0.0);
        spec.forward = {0.0, [](double, double) { return 0.0; }, [](double, double) { return 1.0; },
                        [](double, double, double e) { return e; }};

        const PathBundle bundle =
            sample_paths(spec, build_grid(T, N), n_paths, seed + 7919 * (c + 1), exec);
        BackwardSolution sol(n_paths, N + 1, m);
        for (std::size_t path = 0; path < n_paths; ++path) {
            for (std::size_t i = 0; i < N; ++i) {
                const double shape = 1.0 + 0.5 * std::sin(bundle.x(path, i));
                for (std::size_t j = 0; j < m; ++j) {
                    sol.u[sol.idx(path, i) * m + j] = scale[j] * shape;
                }
            }
        }
        const LenglartResult l = lenglart_check(sol, bundle, spec.exponents, spec.marks, exec);
        res.record(l.pass, l.lhs - 2.0 * l.rhs - 3.0 * l.joint_se, [&] {
            return fmt::format("config={} p={:.4g} beta={:.4g} lhs={:.6g} rhs={:.6g} se={:.3g}", c,
                               p, beta, l.lhs, l.rhs, l.joint_se);
        });
    }
    res.passed = res.failures == 0;
    return res;
}

std::string property_csv_header() { return "name,trials,failures,worst_margin,passed"; }

void write_property_csv(std::ostream& os, const std::vector<PropertyResult>& results) {
    os << property_csv_header() << '\n';
    for (const auto& r : results) {
        os << fmt::format("{},{},{},{:.17g},{}\n", r.name, r.trials, r.failures, r.trials ? r.worst_margin : 0.0,
                          r.passed ? 1 : 0);
    }
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_junit_summary(std::ostream& os, const std::string& suite_name,
                         const std::vector<PropertyResult>& results) {
    std::size_t failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    os << fmt::format("<testsuite name=\"{}\" tests=\"{}\" failures=\"{}\">\n",
                      xml_escape(suite_name), results.size(), failed);
    for (const auto& r : results) {
        os << fmt::format("  <testcase name=\"{}\" trials=\"{}\" failures=\"{}\">", xml_escape(r.name),
                          r.trials, r.failures);
        if (!r.passed) {
            os << "\n    <failure>";
            for (const auto& w : r.witnesses) os << xml_escape(w) << "; ";
            os << "</failure>\n  ";
        }
        os << "</testcase>\n";
    }
    os << "</testsuite>\n";
}

}  // namespace rbsdej
