// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rbsdej/backward.hpp"
#include "rbsdej/config.hpp"
#include "rbsdej/norms.hpp"
#include "rbsdej/reflect.hpp"
#include "rbsdej/registry.hpp"
#include "rbsdej/runner.hpp"
#include "rbsdej/simulate.hpp"
#include "rbsdej/verify.hpp"

using namespace rbsdej;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Exponents default_exponents() { return {1.5, default_beta(1.5), 1.0}; }

ProblemSpec problem(const std::string& name, double T = 1.0, const ParamMap& params = {}) {
    return make_problem(name, params, default_exponents(), T);
}

double mean_k_T(const BackwardSolution& s) {
    double k = 0.0;
    for (std::size_t p = 0; p < s.n_paths; ++p) k += s.K_T(p);
    return k / static_cast<double>(s.n_paths);
}

double mean_k_jump(const BackwardSolution& s) {
    double k = 0.0;
    for (double v : s.k_jump_T) k += v;
    return k / static_cast<double>(s.n_paths);
}

Verdict deterministic_penalization() {
    const auto start = std::chrono::steady_clock::now();
    const ProblemSpec spec = problem("deterministic_obstacle");
    const PathBundle b = sample_paths(spec, build_grid(1.0, 1000), 4, 1);
    const BackwardSolution s = solve_penalized(spec, b, {2, true}, 10.0);
    const double t = elapsed(start);
    const double target = 1.0 - std::exp(-10.0);
    const double ey = std::abs(s.y0() - target);
    const double ek = std::abs(mean_k_T(s) - target);
    return {ey <= 2e-2 && ek <= 2e-2 && t < 1.0,
            fmt::format("|Y0-(1-e^-10)|={:.3g} |K_T-(1-e^-10)|={:.3g} time={:.3f}s", ey, ek, t)};
}

Verdict reflected_limit() {
    const ProblemSpec spec = problem("deterministic_obstacle");
    const PathBundle b = sample_paths(spec, build_grid(1.0, 1000), 4, 1);
    const ReflectedResult r = solve_reflected_penalization(
        spec, b, {2, true}, PenalizationSchedule::geometric(1.0, 11, 1e-3));
    const double ey = std::abs(r.solution.y0() - 1.0);
    const double ek = std::abs(mean_k_T(r.solution) - 1.0);
    const double jump = mean_k_jump(r.solution);
    return {ey <= 5e-3 && ek <= 5e-3 && jump >= 0.99,
            fmt::format("|Y0-1|={:.3g} |K_T-1|={:.3g} jump mass={:.6g} levels run={}", ey, ek, jump,
                        r.table.size())};
}

Verdict oracle_equivalence(const std::string& name, double budget) {
    const auto start = std::chrono::steady_clock::now();
    const ProblemSpec spec = problem(name);
    const PathBundle b = sample_paths(spec, build_grid(1.0, 50), 20000, 11);
    const RegressionBasis basis{4, true};
    const BackwardSolution pen = solve_reflected_level(spec, b, basis, 1024.0);
    const BackwardSolution dp = solve_reflected_dp_oracle(spec, b, basis);
    const double t = elapsed(start);
    const double rel = std::abs(pen.y0() - dp.y0()) / dp.y0();
    return {rel <= 0.01 && t < budget,
            fmt::format("Y0 penalized={:.6g} oracle={:.6g} rel gap={:.3g} time={:.2f}s", pen.y0(),
                        dp.y0(), rel, t)};
}

std::vector<std::pair<double, double>> doubling_pairs(double n0, std::size_t levels) {
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t k = 0; k + 1 < levels; ++k) {
        pairs.emplace_back(std::ldexp(n0, static_cast<int>(k)), std::ldexp(n0, static_cast<int>(k + 1)));
    }
    return pairs;
}

Verdict comparison() {
    bool ok = true;
    std::string detail;
    for (const char* name : {"deterministic_obstacle", "linear_decay"}) {
        const ProblemSpec spec = problem(name);
        const PathBundle b = sample_paths(spec, build_grid(1.0, 200), 8, 1);
        const PropertyResult r = comparison_suite(spec, b, {2, true}, doubling_pairs(1.0, 11));
        ok = ok && r.failures == 0;
        detail += fmt::format("{}: {}/{} ", name, r.failures, r.trials);
    }
    for (const char* name : {"bermudan_put", "bermudan_put_jumps"}) {
        const ProblemSpec spec = problem(name);
        const PathBundle b = sample_paths(spec, build_grid(1.0, 50), 10000, 3);
        const PropertyResult r = comparison_suite(spec, b, {4, true}, doubling_pairs(1.0, 11));
        const double frac = static_cast<double>(r.failures) / static_cast<double>(r.trials);
        ok = ok && frac <= 1e-3;
        detail += fmt::format("{}: {}/{} ", name, r.failures, r.trials);
    }
    return {ok, detail};
}

Verdict penalty_decay() {
    bool ok = true;
    std::string detail;
    for (const auto& entry : problem_registry()) {
        const ProblemSpec spec = problem(entry.name);
        const std::size_t paths = entry.deterministic ? 8 : 5000;
        const PathBundle b = sample_paths(spec, build_grid(1.0, 50), paths, 5);
        const PenaltyDecay d = penalty_decay_suite(spec, b, {3, true},
                                                   PenalizationSchedule::geometric(1.0, 11, 1e-3));
        const bool binds = d.errors.front().mean > 0.0;
        const bool good = d.result.passed && (!binds || d.final_over_first <= 0.05);
        ok = ok && good;
        detail += fmt::format("{}:{}{} ", entry.name,
                              binds ? fmt::format("{:.3g}", d.final_over_first) : std::string("0"),
                              good ? "" : "!");
    }
    return {ok, detail};
}

Verdict jump_inequality() {
    const auto start = std::chrono::steady_clock::now();
    const PropertyResult r = jump_inequality_suite(1000000, {1.1, 1.5, 1.9}, 2024);
    const double t = elapsed(start);
    return {r.failures == 0 && t < 5.0,
            fmt::format("{} samples, {} failures, time={:.2f}s", r.trials, r.failures, t)};
}

Verdict lenglart() {
    const PropertyResult r = lenglart_suite(100, 10000, 99);
    return {r.passed, fmt::format("{} configurations, {} failures, worst margin {:.3g}", r.trials,
                                  r.failures, r.worst_margin)};
}

Verdict homogeneity() {
    bool ok = true;
    std::string detail;
    AprioriOptions opt;
    opt.refinement = false;
    opt.exact_tolerance = 1e-12;
    for (const auto& entry : problem_registry()) {
        const ProblemSpec spec = problem(entry.name);
        const std::size_t paths = entry.deterministic ? 8 : 4000;
        const PathBundle b = sample_paths(spec, build_grid(1.0, 50), paths, 9);
        const Apriori a = apriori_suite(spec, b, {3, true}, entry.deterministic, opt);
        ok = ok && a.result.passed;
        detail += fmt::format("{}:{:.2g}{} ", entry.name, a.result.worst_margin,
                              a.result.passed ? "" : "!");
    }
    return {ok, detail};
}

Verdict contraction() {
    bool ok = true;
    std::string detail;
    for (const char* name : {"z_driver", "gamma_driver"}) {
        const ProblemSpec spec = problem(name);
        const PathBundle b = sample_paths(spec, build_grid(1.0, 50), 10000, 13);
        PicardOptions po;
        po.terminal = TerminalMode::reflected;
        const Contraction c =
            contraction_suite(spec, b, {3, true}, {spec.exponents.beta()}, 1024.0, po);
        ok = ok && c.result.passed;
        detail += fmt::format("{}: iters={} max ratio={:.3g} |dY0|={:.3g} (se {:.3g}) ", name,
                              c.table.front().iterations, c.table.front().max_ratio,
                              std::abs(c.y0_picard - c.y0_one_pass), c.y0_stderr);
    }
    return {ok, detail};
}

std::string read(const std::filesystem::path& f) {
    std::ifstream in(f, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string drop_wall_time(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
    return out;
}

Verdict reproducibility() {
    const auto root = std::filesystem::temp_directory_path() / "rbsdej_acceptance_repro";
    std::filesystem::remove_all(root);
    std::vector<ExperimentConfig> configs(3);
    configs[0].problem = "bermudan_put_jumps";
    configs[0].N = 20;
    configs[0].n_paths = 3000;
    configs[0].mode = RunMode::oracle;
    configs[1].problem = "gamma_driver";
    configs[1].N = 20;
    configs[1].n_paths = 2000;
    configs[1].levels = 4;
    configs[1].mode = RunMode::verify_all;
    configs[2].problem = "z_driver";
    configs[2].N = 20;
    configs[2].n_paths = 2000;
    configs[2].mode = RunMode::penalized;
    bool ok = true;
    std::size_t compared = 0;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        std::vector<std::string> reference;
        for (int threads : {1, 2, 8}) {
            const auto dir = root / fmt::format("c{}_t{}", c, threads);
            run_experiment(configs[c], dir, Exec::parallel(threads));
            std::vector<std::string> files;
            for (const char* name : {"convergence.csv", "norms.csv", "properties.csv"}) {
                if (!std::filesystem::exists(dir / name)) continue;
                std::string text = read(dir / name);
                if (std::string(name) == "convergence.csv") text = drop_wall_time(text);
                files.push_back(text);
            }
            if (reference.empty()) {
                reference = files;
            } else {
                ok = ok && files == reference;
            }
            compared += files.size();
        }
    }
    std::filesystem::remove_all(root);
    return {ok, fmt::format("{} CSV files compared across 1, 2 and 8 threads (wall_time column "
                            "excluded)",
                            compared)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"deterministic penalization closed form", deterministic_penalization},
        {"reflected limit", reflected_limit},
        {"oracle equivalence (diffusion)", [] { return oracle_equivalence("bermudan_put", 60.0); }},
        {"oracle equivalence (jumps)", [] { return oracle_equivalence("bermudan_put_jumps", 120.0); }},
        {"comparison monotonicity", comparison},
        {"penalty decay", penalty_decay},
        {"jump inequality", jump_inequality},
        {"Lenglart factor-2 bound", lenglart},
        {"homogeneity under data scaling", homogeneity},
        {"Picard contraction", contraction},
        {"reproducibility across threads", reproducibility},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += v.pass ? 0 : 1;
        std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    v.detail.c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
