#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "rbsdej/backward.hpp"
#include "rbsdej/config.hpp"
#include "rbsdej/errors.hpp"
#include "rbsdej/runner.hpp"
#include "rbsdej/simulate.hpp"

namespace {

using namespace rbsdej;

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string backend = "openmp";
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "experiment file")->required();
    sub->add_option("--out", c.out, "results directory (default: $RBSDEJ_OUT_DIR or ./results)");
    sub->add_option("--seed", c.seed, "overrides mc.seed");
    sub->add_option("--threads", c.threads, "worker cap, 0 = all")->check(CLI::NonNegativeNumber);
    sub->add_option("--backend", c.backend, "openmp or serial")
        ->check(CLI::IsMember({"openmp", "serial"}));
}

Exec exec_of(const Common& c) {
    if (c.backend == "serial") return Exec::serial();
    return Exec::parallel(c.threads);
}

std::filesystem::path out_dir_of(const Common& c) {
    if (!c.out.empty()) return c.out;
    if (const char* env = std::getenv("RBSDEJ_OUT_DIR"); env && *env) return env;
    return "results";
}

ExperimentConfig load(const Common& c) {
    ExperimentConfig cfg = load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    return cfg;
}

int run(const Common& c, std::optional<RunMode> forced) {
    ExperimentConfig cfg = load(c);
    if (forced) cfg.mode = *forced;
    const auto dir = out_dir_of(c);
    const RunOutcome r = run_experiment(cfg, dir, exec_of(c));
    std::cout << r.summary;
    for (const auto& s : r.failed_suites) std::cerr << "suite failed: " << s << '\n';
    std::cout << "results: " << dir.string() << '\n';
    return r.exit_code;
}

template <typename F>
double seconds(F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int bench(const Common& c) {
    const ExperimentConfig cfg = load(c);
    const ProblemSpec spec = cfg.build_problem();
    const TimeGrid grid = build_grid(cfg.T, cfg.N);
    const RegressionBasis basis{cfg.degree, true};
    std::ostringstream os;
    os << "backend,threads,simulate_s,solve_s,Y0\n";
    for (const Exec& e : {Exec::serial(), Exec::parallel(c.threads)}) {
        PathBundle b;
        BackwardSolution sol;
        const double ts = seconds([&] { b = sample_paths(spec, grid, cfg.n_paths, cfg.seed, e); });
        PenalizedOptions po;
        po.exec = e;
        const double tv = seconds([&] { sol = solve_penalized(spec, b, basis, cfg.n_penalty, po); });
        os << fmt::format("{},{},{:.6f},{:.6f},{:.17g}\n", to_string(e.backend), e.threads, ts, tv,
                          sol.y0());
    }
    const auto dir = out_dir_of(c);
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "bench.txt") << os.str();
    std::cout << os.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reflected BSDE with jumps: solvers and property suites"};
    app.require_subcommand(1);
    Common common;
    auto* solve = app.add_subcommand("solve", "run the configured mode (penalized, reflected, oracle)");
    auto* verify = app.add_subcommand("verify", "run every property suite on the configured problem");
    auto* norms = app.add_subcommand("norms", "reflected solve, weighted norms and Lenglart check");
    auto* bench_cmd = app.add_subcommand("bench", "time serial against OpenMP kernels");
    for (auto* sub : {solve, verify, norms, bench_cmd}) add_common(sub, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*solve) {
            std::optional<RunMode> mode;
            const ExperimentConfig cfg = load(common);
            if (cfg.mode == RunMode::verify_all || cfg.mode == RunMode::norms) mode = RunMode::reflected;
            return run(common, mode);
        }
        if (*verify) return run(common, RunMode::verify_all);
        if (*norms) return run(common, RunMode::norms);
        return bench(common);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
