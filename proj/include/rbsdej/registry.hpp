#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rbsdej/model.hpp"

namespace rbsdej {

using ParamMap = std::map<std::string, double>;

/// Named built-in problem with numeric parameters.
struct ProblemEntry {
    std::string name;
    std::string summary;
    ParamMap defaults;
    /// No Brownian or jump noise: Y is deterministic on every path.
    bool deterministic = false;
    std::function<ProblemSpec(const ParamMap& params, const Exponents& exponents, double horizon)>
        build;
};

const std::vector<ProblemEntry>& problem_registry();

/// nullptr if unknown.
const ProblemEntry* find_problem(const std::string& name);

/// Defaults merged with `overrides`. Throws ConfigError naming `problem.name`
/// for an unknown problem and `problem.<key>` for an unknown parameter.
ProblemSpec make_problem(const std::string& name, const ParamMap& overrides,
                         const Exponents& exponents, double horizon);

/// Coefficients of a driver a_y y + a_z z + a_g Γ + g(t,x):
/// α = a_y, η = |a_z|, δ = |a_g| sqrt(Λ), φ = max(|a_y|, 1), varphi = |g|.
CoefficientSpec linear_driver_coefficients(double a_y, double a_z, double a_g,
                                           double total_intensity, StateFn g = {});

}  // namespace rbsdej
