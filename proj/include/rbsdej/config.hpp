#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "rbsdej/model.hpp"
#include "rbsdej/registry.hpp"

namespace rbsdej {

enum class RunMode { penalized, reflected, oracle, verify_all, norms };

std::string to_string(RunMode mode);
/// Throws ConfigError naming `run.mode`.
RunMode parse_run_mode(const std::string& text);

/// INI-style experiment description:
///
///   [problem]   name = <registry name>, any other key overrides a parameter
///   [grid]      T, N
///   [mc]        n_paths, seed
///   [basis]     degree
///   [exponents] p, beta (default 1 + 2(p-1)/p + 1), eps
///   [schedule]  n0, levels, stop_tol
///   [picard]    tol, max_iter
///   [run]       mode, n_penalty
struct ExperimentConfig {
    std::string problem = "deterministic_obstacle";
    ParamMap params;
    double T = 1.0;
    std::size_t N = 100;
    std::size_t n_paths = 1000;
    std::uint64_t seed = 1;
    std::size_t degree = 2;
    double p = 1.5;
    double beta = default_beta(1.5);
    double eps = 1.0;
    double n0 = 1.0;
    std::size_t levels = 11;
    double stop_tol = 1e-3;
    double picard_tol = 1e-8;
    std::size_t picard_max_iter = 50;
    RunMode mode = RunMode::reflected;
    double n_penalty = 1024.0;

    Exponents exponents() const { return {p, beta, eps}; }
    ProblemSpec build_problem() const;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parse and validate; throws ConfigError naming the offending `section.key`.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& file);
/// Range checks only (called by the parsers).
void validate(const ExperimentConfig& config);

/// Writes every field explicitly; parse_config reads it back to an equal value.
void write_config(std::ostream& os, const ExperimentConfig& config);

}  // namespace rbsdej
