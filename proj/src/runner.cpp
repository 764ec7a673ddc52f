#include "rbsdej/runner.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "rbsdej/backward.hpp"
#include "rbsdej/norms.hpp"
#include "rbsdej/reflect.hpp"
#include "rbsdej/registry.hpp"
#include "rbsdej/simulate.hpp"
#include "rbsdej/verify.hpp"

namespace rbsdej {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

class Timings {
public:
    template <typename F>
    auto time(const std::string& label, F&& f) {
        const auto start = Clock::now();
        auto result = f();
        entries_.emplace_back(label,
                              std::chrono::duration<double>(Clock::now() - start).count());
        return result;
    }
    const std::vector<std::pair<std::string, double>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, double>> entries_;
};

void write_file(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << text;
}

PenalizationSchedule schedule_of(const ExperimentConfig& c) {
    return PenalizationSchedule::geometric(c.n0, c.levels, c.stop_tol);
}

ReflectOptions reflect_options(const ExperimentConfig& c, const Exec& exec) {
    ReflectOptions o;
    o.picard_tol = c.picard_tol;
    o.picard_max_iter = c.picard_max_iter;
    o.exec = exec;
    return o;
}

std::string norms_csv(const std::vector<std::pair<std::string, NormReport>>& rows) {
    std::ostringstream os;
    os << norm_csv_header() << '\n';
    for (const auto& [label, r] : rows) write_norm_csv_row(os, label, r);
    return os.str();
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
    std::ostringstream os;
    write_convergence_csv(os, rows);
    return os.str();
}

std::string manifest(const ExperimentConfig& c, const Exec& exec, const Timings& timings,
                     const RunOutcome& outcome) {
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    std::ostringstream os;
    os << "tool = rbsdej " << kVersion << '\n';
    os << "timestamp = " << stamp << '\n';
    os << "mode = " << to_string(c.mode) << '\n';
    os << "problem = " << c.problem << '\n';
    os << "seed = " << c.seed << '\n';
    os << "backend = " << to_string(exec.backend) << '\n';
    os << "threads = " << exec.threads << '\n';
    os << "compiler = " << __VERSION__ << '\n';
    os << fmt::format("eigen = {}.{}.{}\n", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
                      EIGEN_MINOR_VERSION);
    os << fmt::format("fmt = {}\n", FMT_VERSION);
    os << fmt::format("boost = {}.{}.{}\n", BOOST_VERSION / 100000, BOOST_VERSION / 100 % 1000,
                      BOOST_VERSION % 100);
    for (const auto& [label, seconds] : timings.entries()) {
        os << fmt::format("time.{} = {:.6f}\n", label, seconds);
    }
    os << "exit_code = " << outcome.exit_code << '\n';
    return os.str();
}

std::string describe(const SkorokhodReport& r) {
    return fmt::format(
        "skorokhod.flat_integral = {:.6g}\nskorokhod.jump_condition_residual = {:.6g}\n"
        "skorokhod.complementarity_violation_fraction = {:.6g}\n",
        r.flat_integral, r.jump_condition_residual, r.complementarity_violation_fraction);
}

double mean_k_jump(const BackwardSolution& sol) {
    double s = 0.0;
    for (double v : sol.k_jump_T) s += v;
    return sol.n_paths ? s / static_cast<double>(sol.n_paths) : 0.0;
}

double mean_k_T(const BackwardSolution& sol) {
    double s = 0.0;
    for (std::size_t p = 0; p < sol.n_paths; ++p) s += sol.K_T(p);
    return sol.n_paths ? s / static_cast<double>(sol.n_paths) : 0.0;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& c, const fs::path& out_dir, const Exec& exec) {
    fs::create_directories(out_dir);
    {
        std::ostringstream echo;
        write_config(echo, c);
        write_file(out_dir / "config_echo.ini", echo.str());
    }

    const ProblemSpec spec = c.build_problem();
    const ProblemEntry* entry = find_problem(c.problem);
    const RegressionBasis basis{c.degree, true};
    const ReflectOptions ropt = reflect_options(c, exec);
    Timings timings;
    RunOutcome outcome;
    std::ostringstream summary;
    summary << fmt::format("problem = {}\nmode = {}\nseed = {}\n", c.problem, to_string(c.mode),
                           c.seed);

    const PathBundle bundle = timings.time("simulate", [&] {
        return sample_paths(spec, build_grid(c.T, c.N), c.n_paths, c.seed, exec);
    });
    if (!bundle.flagged_paths.empty()) {
        summary << "flagged_paths = " << bundle.flagged_paths.size() << '\n';
    }

    auto fail = [&](const std::string& suite) {
        outcome.exit_code = 1;
        outcome.failed_suites.push_back(suite);
    };

    switch (c.mode) {
        case RunMode::penalized: {
            const BackwardSolution sol = timings.time("solve", [&] {
                if (spec.driver.frozen_independent()) {
                    PenalizedOptions po;
                    po.exec = exec;
                    return solve_penalized(spec, bundle, basis, c.n_penalty, po);
                }
                PicardOptions po;
                po.tol = c.picard_tol;
                po.max_iter = c.picard_max_iter;
                po.exec = exec;
                return picard_solve(spec, bundle, basis, c.n_penalty, po);
            });
            const PenaltyError err = penalty_error(sol, spec, bundle, exec);
            const SkorokhodReport rep = skorokhod_report(sol, spec, bundle, exec);
            ConvergenceRow row{c.n_penalty, err.mean,       err.se, sol.y0(), sol.y0_stderr(),
                               mean_k_T(sol), rep.flat_integral, sol.run.wall_time};
            write_file(out_dir / "convergence.csv", convergence_csv({row}));
            write_file(out_dir / "norms.csv",
                       norms_csv({{"penalized",
                                   estimate_norms(sol, bundle, spec.exponents, spec.marks, exec)}}));
            summary << fmt::format("Y0 = {:.10g}\nY0_stderr = {:.3g}\nK_T = {:.10g}\n", sol.y0(),
                                   sol.y0_stderr(), row.k_T_mean);
            if (sol.run.non_contraction) fail("picard");
            break;
        }
        case RunMode::reflected:
        case RunMode::oracle:
        case RunMode::norms: {
            const ReflectedResult res = timings.time("reflect", [&] {
                return solve_reflected_penalization(spec, bundle, basis, schedule_of(c), ropt);
            });
            write_file(out_dir / "convergence.csv", convergence_csv(res.table));
            std::vector<std::pair<std::string, NormReport>> rows{
                {"reflected",
                 estimate_norms(res.solution, bundle, spec.exponents, spec.marks, exec)}};
            summary << fmt::format(
                "Y0 = {:.10g}\nY0_stderr = {:.3g}\nK_T = {:.10g}\nK_jump_T = {:.10g}\n",
                res.solution.y0(), res.solution.y0_stderr(), mean_k_T(res.solution),
                mean_k_jump(res.solution));
            summary << describe(res.report);
            summary << "penalty_errors_monotone = " << (res.errors_monotone ? 1 : 0) << '\n';
            if (!res.warning.empty()) summary << "warning = " << res.warning << '\n';

            if (c.mode == RunMode::oracle) {
                const BackwardSolution dp = timings.time(
                    "oracle", [&] { return solve_reflected_dp_oracle(spec, bundle, basis, exec); });
                rows.emplace_back("oracle",
                                  estimate_norms(dp, bundle, spec.exponents, spec.marks, exec));
                const double gap = res.solution.y0() - dp.y0();
                summary << fmt::format("oracle.Y0 = {:.10g}\noracle.K_T = {:.10g}\n"
                                       "oracle.K_jump_T = {:.10g}\noracle.gap = {:.6g}\n",
                                       dp.y0(), mean_k_T(dp), mean_k_jump(dp), gap);
            }
            if (c.mode == RunMode::norms) {
                const LenglartResult l =
                    lenglart_check(res.solution, bundle, spec.exponents, spec.marks, exec);
                summary << fmt::format("lenglart.lhs = {:.10g}\nlenglart.rhs = {:.10g}\n"
                                       "lenglart.joint_se = {:.3g}\nlenglart.pass = {}\n",
                                       l.lhs, l.rhs, l.joint_se, l.pass ? 1 : 0);
                if (!l.pass) fail("lenglart");
            }
            write_file(out_dir / "norms.csv", norms_csv(rows));
            break;
        }
        case RunMode::verify_all: {
            std::vector<PropertyResult> results;
            results.push_back(timings.time("jump_inequality", [&] {
                return jump_inequality_suite(100000, {1.1, 1.5, 1.9}, c.seed);
            }));
            if (spec.driver.frozen_independent() && c.levels >= 2) {
                std::vector<std::pair<double, double>> pairs;
                const auto& n = schedule_of(c).n_values;
                for (std::size_t k = 0; k + 1 < n.size(); ++k) pairs.emplace_back(n[k], n[k + 1]);
                results.push_back(timings.time("comparison", [&] {
                    return comparison_suite(spec, bundle, basis, pairs, exec);
                }));
            }
            if (c.levels >= 3) {
                const PenaltyDecay d = timings.time("penalty_decay", [&] {
                    return penalty_decay_suite(spec, bundle, basis, schedule_of(c), ropt);
                });
                summary << fmt::format("penalty_decay.final_over_first = {:.6g}\n",
                                       d.final_over_first);
                results.push_back(d.result);
            }
            {
                AprioriOptions ao;
                ao.n_penalty = schedule_of(c).n_values.back();
                ao.reflect = ropt;
                const Apriori a = timings.time("apriori", [&] {
                    return apriori_suite(spec, bundle, basis, entry->deterministic, ao);
                });
                summary << fmt::format("apriori.ratio_N = {:.6g}\napriori.ratio_2N = {:.6g}\n",
                                       a.ratio_N, a.ratio_2N);
                results.push_back(a.result);
            }
            if (!spec.driver.frozen_independent()) {
                const double threshold = 2.0 * (c.p - 1.0) / c.p;
                std::vector<double> betas{c.beta};
                if (c.beta > threshold) betas.insert(betas.begin(), 0.5 * (threshold + c.beta));
                PicardOptions po;
                po.tol = c.picard_tol;
                po.max_iter = c.picard_max_iter;
                po.terminal = TerminalMode::reflected;
                po.exec = exec;
                const Contraction k = timings.time("contraction", [&] {
                    return contraction_suite(spec, bundle, basis, betas, c.n_penalty, po);
                });
                for (const auto& row : k.table) {
                    summary << fmt::format("contraction.beta_{:g} = iterations {} max_ratio {:.6g}\n",
                                           row.beta, row.iterations, row.max_ratio);
                }
                results.push_back(k.result);
            }
            results.push_back(timings.time("lenglart", [&] {
                return lenglart_suite(5, std::min<std::size_t>(c.n_paths, 5000), c.seed, exec);
            }));

            std::ostringstream props, junit;
            write_property_csv(props, results);
            write_junit_summary(junit, "verify-all", results);
            write_file(out_dir / "properties.csv", props.str());
            write_file(out_dir / "junit.xml", junit.str());
            for (const auto& r : results) {
                summary << fmt::format("suite.{} = {} ({} / {} failures)\n", r.name,
                                       r.passed ? "PASS" : "FAIL", r.failures, r.trials);
                for (const auto& w : r.witnesses) summary << "  witness: " << w << '\n';
                if (!r.passed) fail(r.name);
            }
            break;
        }
    }

    summary << "exit_code = " << outcome.exit_code << '\n';
    outcome.summary = summary.str();
    write_file(out_dir / "summary.txt", outcome.summary);
    write_file(out_dir / "manifest.txt", manifest(c, exec, timings, outcome));
    return outcome;
}

}  // namespace rbsdej
