#include "rbsdej/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "rbsdej/simulate.hpp"

namespace rbsdej {

Exponents::Exponents(double p, double beta, double eps)
    : p_(p), q_(conjugate_exponent(p)), beta_(beta), eps_(eps), cp_(p * (p - 1.0) / 2.0) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw DomainError("beta must be finite and >= 0");
    }
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw DomainError("eps must be finite and > 0");
    }
}

double conjugate_exponent(double p) {
    if (!(p > 1.0 && p < 2.0)) {
        throw DomainError("p must lie in the open interval (1, 2)");
    }
    return p / (p - 1.0);
}

double default_beta(double p, double margin) {
    conjugate_exponent(p);
    return 1.0 + 2.0 * (p - 1.0) / p + margin;
}

CoefficientSpec CoefficientSpec::constant(double alpha, double eta, double delta, double phi_small,
                                          double varphi) {
    return {
        [alpha](double, double) { return alpha; },
        [eta](double, double) { return eta; },
        [delta](double, double) { return delta; },
        [phi_small](double, double) { return phi_small; },
        [varphi](double, double) { return varphi; },
    };
}

CoefficientSample aggregate_coefficients(const CoefficientSpec& coeffs, const Exponents& exponents,
                                         double t, double x) {
    CoefficientSample s;
    s.alpha = coeffs.alpha(t, x);
    s.eta = coeffs.eta(t, x);
    s.delta = coeffs.delta(t, x);
    s.phi = coeffs.phi_small(t, x);
    s.varphi = coeffs.varphi(t, x);
    s.a2 = s.phi + s.eta * s.eta + s.delta * s.delta;
    if (!(s.a2 >= exponents.eps())) {
        std::ostringstream os;
        os << "a^2 = " << s.a2 << " < eps = " << exponents.eps() << " at (t=" << t << ", x=" << x
           << ")";
        throw AssumptionViolation(os.str());
    }
    s.zeta2 = std::pow(s.a2, exponents.q() / 2.0);
    return s;
}

MarkSpace::MarkSpace(std::vector<double> marks, std::vector<double> weights)
    : marks_(std::move(marks)), weights_(std::move(weights)) {
    if (marks_.size() != weights_.size()) {
        throw DomainError("mark space: marks and weights differ in length");
    }
    for (double w : weights_) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw DomainError("mark space: weights must be finite and > 0");
        }
    }
    for (double e : marks_) {
        if (!std::isfinite(e)) throw DomainError("mark space: marks must be finite");
    }
    total_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

double MarkSpace::small_jump_mass() const {
    double s = 0.0;
    for (std::size_t j = 0; j < size(); ++j) {
        s += weights_[j] * std::min(1.0, marks_[j] * marks_[j]);
    }
    return s;
}

double MarkSpace::norm2(std::span<const double> u) const {
    double s = 0.0;
    for (std::size_t j = 0; j < size(); ++j) s += weights_[j] * u[j] * u[j];
    return s;
}

double MarkSpace::integrate(std::span<const double> u) const {
    double s = 0.0;
    for (std::size_t j = 0; j < size(); ++j) s += weights_[j] * u[j];
    return s;
}

std::vector<double> cumulative_A(const TimeGrid& grid, std::span<const double> zeta2) {
    const std::size_t n = grid.steps();
    if (zeta2.size() < n) {
        throw DomainError("cumulative_A: need one zeta^2 sample per step");
    }
    std::vector<double> a(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(zeta2[i] > 0.0)) {
            throw AssumptionViolation("cumulative_A: zeta^2 must be positive");
        }
        a[i + 1] = a[i] + zeta2[i] * grid.dt(i);
    }
    return a;
}

namespace {

std::size_t node_index(const std::vector<double>& nodes, double t) {
    const double tol = 1e-12 * std::max(1.0, nodes.back());
    auto it = std::lower_bound(nodes.begin(), nodes.end(), t - tol);
    if (it == nodes.end()) return nodes.size() - 1;
    return static_cast<std::size_t>(it - nodes.begin());
}

}  // namespace

double NormalizedProblem::R_at(double t) const {
    const auto& ns = *nodes;
    const auto& r = *R;
    const std::size_t i = node_index(ns, t);
    if (i == 0 || std::abs(ns[i] - t) <= 1e-12 * std::max(1.0, ns.back())) return r[i];
    const double w = (t - ns[i - 1]) / (ns[i] - ns[i - 1]);
    return (1.0 - w) * r[i - 1] + w * r[i];
}

NormalizedProblem normalize_driver(const ProblemSpec& spec, const TimeGrid& grid,
                                   double eps_shift) {
    if (!(eps_shift >= 0.0)) throw DomainError("normalize_driver: eps_shift must be >= 0");
    const auto& nodes = grid.nodes();
    const std::size_t n = grid.steps();

    // Probe state dependence of the rate r = α + ε a².
    const double x0 = spec.forward.x0;
    const double probes[] = {x0, x0 - 1.0, x0 + 1.0, x0 - 10.0, x0 + 10.0};
    auto rate = [&](double t, double x) {
        const double a2 = spec.coeffs.phi_small(t, x) + std::pow(spec.coeffs.eta(t, x), 2) +
                          std::pow(spec.coeffs.delta(t, x), 2);
        return spec.coeffs.alpha(t, x) + eps_shift * a2;
    };

    std::vector<double> r(n + 1);
    bool already = true;
    for (std::size_t i = 0; i <= n; ++i) {
        r[i] = rate(nodes[i], x0);
        for (double x : probes) {
            if (std::abs(rate(nodes[i], x) - r[i]) > 1e-12 * (1.0 + std::abs(r[i]))) {
                throw DomainError("normalize_driver: alpha + eps a^2 depends on the state");
            }
        }
        if (r[i] > 0.0) already = false;
    }

    auto R = std::make_shared<std::vector<double>>(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double denom = 1.0 - r[i] * grid.dt(i);
        if (!(denom > 0.0)) throw DomainError("normalize_driver: rate step r*dt >= 1");
        (*R)[i + 1] = (*R)[i] - std::log(denom);
    }
    auto ns = std::make_shared<std::vector<double>>(nodes.begin(), nodes.end());
    auto rates = std::make_shared<std::vector<double>>(std::move(r));

    NormalizedProblem out;
    out.R = R;
    out.nodes = ns;
    out.eps_shift = eps_shift;
    out.already_normalized = already;

    ProblemSpec& t = out.spec;
    t = spec;
    t.name = spec.name + "+normalized";

    const auto lookup = [ns](double time) { return node_index(*ns, time); };
    const double RT = R->back();

    t.terminal = [f = spec.terminal, RT](double x) { return std::exp(RT) * f(x); };
    t.obstacle_left_T = [f = spec.obstacle_left_T, RT](double x) { return std::exp(RT) * f(x); };
    {
        NormalizedProblem probe;
        probe.R = R;
        probe.nodes = ns;
        t.obstacle = [f = spec.obstacle, probe](double time, double x) {
            return std::exp(probe.R_at(time)) * f(time, x);
        };
    }
    t.driver.fn = [f = spec.driver.fn, R, rates, lookup](double time, double x, double y, double z,
                                                         std::span<const double> u) {
        const std::size_t i = lookup(time);
        const std::size_t next = std::min(i + 1, R->size() - 1);
        const double ei = std::exp((*R)[i]);
        const double inv_next = std::exp(-(*R)[next]);
        std::vector<double> us(u.begin(), u.end());
        for (double& v : us) v *= inv_next;
        return ei * f(time, x, y / ei, z * inv_next, us) - (*rates)[i] * y;
    };
    t.coeffs.alpha = [c = spec.coeffs, eps_shift](double time, double x) {
        const double a2 = c.phi_small(time, x) + std::pow(c.eta(time, x), 2) +
                          std::pow(c.delta(time, x), 2);
        return -eps_shift * a2;
    };
    t.coeffs.varphi = [c = spec.coeffs, R, lookup](double time, double x) {
        return std::exp((*R)[lookup(time)]) * c.varphi(time, x);
    };
    return out;
}

bool AssumptionReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const AssumptionCheck& AssumptionReport::at(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return c;
    }
    throw std::out_of_range("no assumption check named " + name);
}

AssumptionReport validate_assumptions(const ProblemSpec& spec, std::size_t probe_budget,
                                      std::uint64_t seed, const ProbeBox& box) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> ut(0.0, spec.horizon);
    std::uniform_real_distribution<double> ux(box.x_lo, box.x_hi);
    std::uniform_real_distribution<double> uv(-box.y_abs, box.y_abs);
    const std::size_t m = spec.marks.size();
    const double tol = 1e-9;

    auto named = [](const char* name) {
        AssumptionCheck c;
        c.name = name;
        return c;
    };
    AssumptionCheck mono = named("monotonicity"), lip = named("lipschitz"),
                    growth = named("growth"), lower = named("a2_lower_bound"),
                    term = named("terminal_dominates_obstacle"), cont = named("continuity_in_y");

    auto fmt_tuple = [](std::initializer_list<std::pair<const char*, double>> kv) {
        std::ostringstream os;
        os.precision(6);
        bool first = true;
        for (const auto& [k, v] : kv) {
            os << (first ? "" : ", ") << k << "=" << v;
            first = false;
        }
        return os.str();
    };

    std::vector<double> u(m), u2(m), du(m), zeros(m, 0.0);
    for (std::size_t k = 0; k < probe_budget; ++k) {
        const double t = ut(gen);
        const double x = ux(gen);
        const double y = uv(gen), y2 = uv(gen), z = uv(gen), z2 = uv(gen);
        for (std::size_t j = 0; j < m; ++j) {
            u[j] = uv(gen);
            u2[j] = uv(gen);
            du[j] = u[j] - u2[j];
        }
        const auto& f = spec.driver;
        const double alpha = spec.coeffs.alpha(t, x);
        const double eta = spec.coeffs.eta(t, x);
        const double delta = spec.coeffs.delta(t, x);
        const double phi = spec.coeffs.phi_small(t, x);
        const double varphi = spec.coeffs.varphi(t, x);

        // (y - y')(f(y) - f(y')) <= α |y - y'|²
        const double fy = f(t, x, y, z, u), fy2 = f(t, x, y2, z, u);
        const double excess = (y - y2) * (fy - fy2) - alpha * (y - y2) * (y - y2);
        const double mono_scale = tol * (1.0 + (y - y2) * (y - y2));
        if (excess > mono_scale) {
            if (mono.passed || excess > mono.worst) {
                mono.witness = fmt_tuple({{"t", t}, {"x", x}, {"y", y}, {"y'", y2}, {"z", z}});
            }
            mono.passed = false;
        }
        mono.worst = std::max(mono.worst, excess);

        // |f(y,z,u) - f(y,z',u')| <= η|z - z'| + δ‖u - u'‖_λ
        const double df = std::abs(fy - f(t, x, y, z2, u2));
        const double bound = eta * std::abs(z - z2) + delta * std::sqrt(spec.marks.norm2(du));
        const double ratio = bound > 0.0 ? df / bound : (df > tol ? INFINITY : 0.0);
        if (ratio > 1.0 + 1e-9) {
            if (lip.passed || ratio > lip.worst) {
                lip.witness = fmt_tuple({{"t", t}, {"x", x}, {"y", y}, {"z", z}, {"z'", z2}});
            }
            lip.passed = false;
        }
        lip.worst = std::max(lip.worst, ratio);

        // |f(t,y,0,0)| <= varphi + φ|y|
        const double g = std::abs(f(t, x, y, 0.0, zeros)) - (varphi + phi * std::abs(y));
        if (g > tol * (1.0 + std::abs(y))) {
            if (growth.passed || g > growth.worst) {
                growth.witness = fmt_tuple({{"t", t}, {"x", x}, {"y", y}});
            }
            growth.passed = false;
        }
        growth.worst = std::max(growth.worst, g);

        const double a2 = phi + eta * eta + delta * delta;
        const double short_by = spec.exponents.eps() - a2;
        if (short_by > 0.0) {
            if (lower.passed || short_by > lower.worst) {
                lower.witness = fmt_tuple({{"t", t}, {"x", x}, {"a2", a2}});
            }
            lower.passed = false;
        }
        lower.worst = std::max(lower.worst, short_by);

        const double gap = spec.obstacle(spec.horizon, x) - spec.terminal(x);
        if (gap > tol * (1.0 + std::abs(spec.terminal(x)))) {
            if (term.passed || gap > term.worst) term.witness = fmt_tuple({{"x", x}});
            term.passed = false;
        }
        term.worst = std::max(term.worst, gap);

        // Finite-difference continuity probe at a shrinking step.
        const double h = 1e-7 * (1.0 + std::abs(y));
        const double jump = std::abs(f(t, x, y + h, z, u) - fy);
        const double allowed = 1e-3 * (1.0 + std::abs(fy));
        if (jump > allowed) {
            if (cont.passed || jump > cont.worst) {
                cont.witness = fmt_tuple({{"t", t}, {"x", x}, {"y", y}, {"z", z}});
            }
            cont.passed = false;
        }
        cont.worst = std::max(cont.worst, jump);
    }

    AssumptionReport report;
    report.checks = {mono, lip, growth, lower, term, cont};
    return report;
}

}  // namespace rbsdej
