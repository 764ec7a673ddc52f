#pragma once

#include <random>
#include <string>

#include "rbsdej/model.hpp"
#include "rbsdej/registry.hpp"
#include "rbsdej/simulate.hpp"

namespace rbsdej::test {

inline Exponents exps(double p = 1.5) { return {p, default_beta(p), 1.0}; }

inline ProblemSpec problem(const std::string& name, const ParamMap& params = {}, double T = 1.0,
                           double p = 1.5) {
    return make_problem(name, params, exps(p), T);
}

inline PathBundle bundle(const ProblemSpec& spec, std::size_t N, std::size_t paths,
                         std::uint64_t seed = 1, const Exec& exec = {}) {
    return sample_paths(spec, build_grid(spec.horizon, N), paths, seed, exec);
}

/// Small hand-rolled generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

}  // namespace rbsdej::test
