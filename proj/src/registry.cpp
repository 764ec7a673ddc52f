#include "rbsdej/registry.hpp"

#include <algorithm>
#include <cmath>

namespace rbsdej {

namespace {

double get(const ParamMap& params, const std::string& key) { return params.at(key); }

StateFn constant(double v) {
    return [v](double, double) { return v; };
}

bool before_horizon(double t, double horizon) { return t < horizon - 1e-12 * std::max(1.0, horizon); }

ForwardModel still(double x0) {
    return {x0, constant(0.0), constant(0.0), [](double, double, double) { return 0.0; }};
}

ForwardModel brownian(double x0, double sigma) {
    return {x0, constant(0.0), constant(sigma), [](double, double, double mark) { return mark; }};
}

ForwardModel geometric(double x0, double r, double sigma) {
    return {x0, [r](double, double x) { return r * x; }, [sigma](double, double x) { return sigma * x; },
            [](double, double x, double mark) { return mark * x; }};
}

Driver zero_driver() {
    Driver d;
    d.fn = [](double, double, double, double, std::span<const double>) { return 0.0; };
    d.affine_in_y = true;
    return d;
}

ProblemSpec base(const std::string& name, const Exponents& exponents, double horizon) {
    ProblemSpec s;
    s.name = name;
    s.exponents = exponents;
    s.horizon = horizon;
    return s;
}

std::vector<ProblemEntry> build_registry() {
    std::vector<ProblemEntry> r;

    r.push_back({"deterministic_obstacle",
                 "xi = xi0, f = 0, L = level on [0,T) and xi0 at T, no noise",
                 {{"level", 1.0}, {"xi", 0.0}},
                 true,
                 [](const ParamMap& p, const Exponents& e, double T) {
                     const double level = get(p, "level"), xi = get(p, "xi");
                     ProblemSpec s = base("deterministic_obstacle", e, T);
                     s.coeffs = linear_driver_coefficients(0.0, 0.0, 0.0, 0.0);
                     s.forward = still(0.0);
                     s.driver = zero_driver();
                     s.terminal = [xi](double) { return xi; };
                     s.obstacle = [level, xi, T](double t, double) {
                         return before_horizon(t, T) ? level : xi;
                     };
                     s.obstacle_left_T = [level](double) { return level; };
                     return s;
                 }});

    r.push_back({"linear_decay",
                 "f = -rate y, xi = xi0, L = level (constant), no noise",
                 {{"rate", 1.0}, {"xi", 1.0}, {"level", 0.5}},
                 true,
                 [](const ParamMap& p, const Exponents& e, double T) {
                     const double rate = get(p, "rate"), xi = get(p, "xi"), level = get(p, "level");
                     ProblemSpec s = base("linear_decay", e, T);
                     s.coeffs = linear_driver_coefficients(-rate, 0.0, 0.0, 0.0);
                     s.forward = still(0.0);
                     s.driver.fn = [rate](double, double, double y, double, std::span<const double>) {
                         return -rate * y;
                     };
                     s.driver.affine_in_y = true;
                     s.terminal = [xi](double) { return xi; };
                     s.obstacle = [level](double, double) { return level; };
                     s.obstacle_left_T = [level](double) { return level; };
                     return s;
                 }});

    r.push_back({"zero_data",
                 "xi = 0, f = 0, L = level <= 0, Brownian forward",
                 {{"level", -1.0}, {"sigma", 1.0}},
                 false,
                 [](const ParamMap& p, const Exponents& e, double T) {
                     const double level = get(p, "level");
                     ProblemSpec s = base("zero_data", e, T);
                     s.coeffs = linear_driver_coefficients(0.0, 0.0, 0.0, 0.0);
                     s.forward = brownian(0.0, get(p, "sigma"));
                     s.driver = zero_driver();
                     s.terminal = [](double) { return 0.0; };
                     s.obstacle = [level](double, double) { return level; };
                     s.obstacle_left_T = [level](double) { return level; };
                     return s;
                 }});

    r.push_back({"never_binding",
                 "xi = X_T, f = 0, L = level far below, Brownian forward",
                 {{"level", -1e9}, {"sigma", 1.0}},
                 false,
                 [](const ParamMap& p, const Exponents& e, double T) {
                     const double level = get(p, "level");
                     ProblemSpec s = base("never_binding", e, T);
                     s.coeffs = linear_driver_coefficients(0.0, 0.0, 0.0, 0.0);
                     s.forward = brownian(0.0, get(p, "sigma"));
                     s.driver = zero_driver();
                     s.terminal = [](double x) { return x; };
                     s.obstacle = [level](double, double) { return level; };
                     s.obstacle_left_T = [level](double) { return level; };
                     return s;
                 }});

    auto put = [](const std::string& name, const ParamMap& p, const Exponents& e, double T,
                  bool jumps) {
        const double kappa = get(p, "kappa");
        ProblemSpec s = base(name, e, T);
        if (jumps) {
            const double size = get(p, "jump"), lambda = get(p, "lambda");
            s.marks = MarkSpace({size, -size}, {lambda, lambda});
        }
        s.coeffs = linear_driver_coefficients(0.0, 0.0, 0.0, s.marks.total_intensity());
        s.forward = geometric(get(p, "x0"), get(p, "r"), get(p, "sigma"));
        s.driver = zero_driver();
        auto payoff = [kappa](double x) { return std::max(kappa - x, 0.0); };
        s.terminal = payoff;
        s.obstacle = [payoff](double, double x) { return payoff(x); };
        s.obstacle_left_T = payoff;
        return s;
    };

    r.push_back({"bermudan_put",
                 "xi = L = (kappa - X)^+, f = 0, geometric Brownian forward",
                 {{"kappa", 100.0}, {"x0", 100.0}, {"r", 0.05}, {"sigma", 0.2}},
                 false,
                 [put](const ParamMap& p, const Exponents& e, double T) {
                     return put("bermudan_put", p, e, T, false);
                 }});

    r.push_back({"bermudan_put_jumps",
                 "bermudan_put with relative jumps of +-jump at rate lambda each",
                 {{"kappa", 100.0}, {"x0", 100.0}, {"r", 0.05}, {"sigma", 0.2}, {"jump", 0.1},
                  {"lambda", 0.5}},
                 false,
                 [put](const ParamMap& p, const Exponents& e, double T) {
                     return put("bermudan_put_jumps", p, e, T, true);
                 }});

    r.push_back({"z_driver",
                 "f = a z, xi = max(X_T, level), L = level, Brownian forward",
                 {{"a", 0.2}, {"level", -0.5}, {"sigma", 1.0}},
                 false,
                 [](const ParamMap& p, const Exponents& e, double T) {
                     const double a = get(p, "a"), level = get(p, "level");
                     ProblemSpec s = base("z_driver", e, T);
                     s.coeffs = linear_driver_coefficients(0.0, a, 0.0, 0.0);
                     s.forward = brownian(0.0, get(p, "sigma"));
                     s.driver.fn = [a](double, double, double, double z, std::span<const double>) {
                         return a * z;
                     };
                     s.driver.uses_z = true;
                     s.driver.affine_in_y = true;
                     s.terminal = [level](double x) { return std::max(x, level); };
                     s.obstacle = [level](double, double) { return level; };
                     s.obstacle_left_T = [level](double) { return level; };
                     return s;
                 }});

    r.push_back({"gamma_driver",
                 "f = a Gamma, xi = max(X_T, level), L = level, Brownian forward with "
                 "additive jumps up and down",
                 {{"a", 0.2}, {"level", -0.5}, {"sigma", 0.5}, {"up", 0.3}, {"down", 0.2},
                  {"lambda_up", 0.6}, {"lambda_down", 0.4}},
                 false,
                 [](const ParamMap& p, const Exponents& e, double T) {
                     const double a = get(p, "a"), level = get(p, "level");
                     ProblemSpec s = base("gamma_driver", e, T);
                     s.marks = MarkSpace({get(p, "up"), -get(p, "down")},
                                         {get(p, "lambda_up"), get(p, "lambda_down")});
                     s.coeffs = linear_driver_coefficients(0.0, 0.0, a, s.marks.total_intensity());
                     s.forward = brownian(0.0, get(p, "sigma"));
                     const std::vector<double> w(s.marks.weights().begin(), s.marks.weights().end());
                     s.driver.fn = [a, w](double, double, double, double, std::span<const double> u) {
                         double g = 0.0;
                         for (std::size_t j = 0; j < u.size(); ++j) g += w[j] * u[j];
                         return a * g;
                     };
                     s.driver.uses_u = true;
                     s.driver.affine_in_y = true;
                     s.terminal = [level](double x) { return std::max(x, level); };
                     s.obstacle = [level](double, double) { return level; };
                     s.obstacle_left_T = [level](double) { return level; };
                     return s;
                 }});

    return r;
}

}  // namespace

const std::vector<ProblemEntry>& problem_registry() {
    static const std::vector<ProblemEntry> registry = build_registry();
    return registry;
}

const ProblemEntry* find_problem(const std::string& name) {
    for (const auto& e : problem_registry()) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

ProblemSpec make_problem(const std::string& name, const ParamMap& overrides,
                         const Exponents& exponents, double horizon) {
    const ProblemEntry* entry = find_problem(name);
    if (!entry) throw ConfigError("problem.name", "unknown problem '" + name + "'");
    ParamMap params = entry->defaults;
    for (const auto& [key, value] : overrides) {
        if (!params.count(key)) {
            throw ConfigError("problem." + key, "not a parameter of '" + name + "'");
        }
        if (!std::isfinite(value)) throw ConfigError("problem." + key, "must be finite");
        params[key] = value;
    }
    try {
        return entry->build(params, exponents, horizon);
    } catch (const DomainError& e) {
        throw ConfigError("problem", e.what());
    }
}

CoefficientSpec linear_driver_coefficients(double a_y, double a_z, double a_g,
                                           double total_intensity, StateFn g) {
    CoefficientSpec c = CoefficientSpec::constant(a_y, std::abs(a_z),
                                                  std::abs(a_g) * std::sqrt(total_intensity),
                                                  std::max(std::abs(a_y), 1.0), 0.0);
    if (g) c.varphi = [g](double t, double x) { return std::abs(g(t, x)); };
    return c;
}

}  // namespace rbsdej
