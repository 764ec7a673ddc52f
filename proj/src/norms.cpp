#include "rbsdej/norms.hpp"

#include <cmath>
#include <fmt/format.h>

namespace rbsdej {

std::vector<double> NormReport::values() const {
    return {s_p_beta,    s_p_beta_se,        s_pA_beta,       s_pA_beta_se,
            h_p_beta,    h_p_beta_se,        l_p_lambda_beta, l_p_lambda_beta_se,
            l_p_mu_beta, l_p_mu_beta_se,     k_p,             k_p_se};
}

double NormReport::total() const {
    return s_p_beta + s_pA_beta + h_p_beta + l_p_lambda_beta + l_p_mu_beta + k_p;
}

namespace {

void check_shapes(const BackwardSolution& sol, const PathBundle& bundle, const MarkSpace& marks) {
    if (sol.n_paths != bundle.n_paths || sol.n_nodes != bundle.n_nodes() ||
        sol.n_marks != bundle.n_marks || marks.size() != bundle.n_marks) {
        throw DomainError("solution, bundle and mark space shapes differ");
    }
}

}  // namespace

NormSamples norm_samples(const BackwardSolution& sol, const PathBundle& bundle,
                         const Exponents& exponents, const MarkSpace& marks, const Exec& exec) {
    check_shapes(sol, bundle, marks);
    const std::size_t M = sol.n_paths;
    const std::size_t N = bundle.n_steps();
    const std::size_t m = sol.n_marks;
    const double p = exponents.p();
    const double beta = exponents.beta();
    const auto w = marks.weights();

    NormSamples s;
    s.s_p.assign(M, 0.0);
    s.s_pA.assign(M, 0.0);
    s.h_p.assign(M, 0.0);
    s.l_lambda.assign(M, 0.0);
    s.l_mu.assign(M, 0.0);
    s.k_p.assign(M, 0.0);

    for_each_index(exec, M, [&](std::size_t path) {
        double sup = 0.0, ya = 0.0, zz = 0.0, ul = 0.0, um = 0.0;
        for (std::size_t i = 0; i <= N; ++i) {
            const double a = bundle.a(path, i);
            const double yp = std::exp(0.5 * p * beta * a) * std::pow(std::abs(sol.Y(path, i)), p);
            sup = std::max(sup, yp);
            if (i == N) break;
            const double dt = bundle.grid.dt(i);
            const double weight = std::exp(beta * a);
            ya += yp * (bundle.a(path, i + 1) - a);
            zz += weight * sol.Z(path, i) * sol.Z(path, i) * dt;
            double lam = 0.0, real = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                const double u2 = sol.U(path, i, j) * sol.U(path, i, j);
                lam += w[j] * u2;
                real += bundle.count(path, i, j) * u2;
            }
            ul += weight * lam * dt;
            um += weight * real;
        }
        s.s_p[path] = sup;
        s.s_pA[path] = ya;
        s.h_p[path] = std::pow(zz, 0.5 * p);
        s.l_lambda[path] = std::pow(ul, 0.5 * p);
        s.l_mu[path] = std::pow(um, 0.5 * p);
        s.k_p[path] = std::pow(std::abs(sol.K_T(path)), p);
    });
    return s;
}

NormReport estimate_norms(const BackwardSolution& sol, const PathBundle& bundle,
                          const Exponents& exponents, const MarkSpace& marks, const Exec& exec) {
    const NormSamples s = norm_samples(sol, bundle, exponents, marks, exec);
    NormReport r;
    auto fill = [&](const std::vector<double>& v, double& mean, double& se) {
        const MeanSe ms = mean_se(exec, v);
        mean = ms.mean;
        se = ms.se;
    };
    fill(s.s_p, r.s_p_beta, r.s_p_beta_se);
    fill(s.s_pA, r.s_pA_beta, r.s_pA_beta_se);
    fill(s.h_p, r.h_p_beta, r.h_p_beta_se);
    fill(s.l_lambda, r.l_p_lambda_beta, r.l_p_lambda_beta_se);
    fill(s.l_mu, r.l_p_mu_beta, r.l_p_mu_beta_se);
    fill(s.k_p, r.k_p, r.k_p_se);
    return r;
}

LenglartResult lenglart_check(const BackwardSolution& sol, const PathBundle& bundle,
                              const Exponents& exponents, const MarkSpace& marks,
                              const Exec& exec) {
    const NormSamples s = norm_samples(sol, bundle, exponents, marks, exec);
    std::vector<double> diff(s.l_mu.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = s.l_mu[i] - 2.0 * s.l_lambda[i];
    LenglartResult out;
    out.lhs = mean_se(exec, s.l_mu).mean;
    out.rhs = mean_se(exec, s.l_lambda).mean;
    out.joint_se = mean_se(exec, diff).se;
    out.pass = out.lhs <= 2.0 * out.rhs + 3.0 * out.joint_se;
    return out;
}

std::pair<double, double> power_sum_bound(std::span<const double> xs, double p) {
    if (!(p >= 1.0)) throw DomainError("power_sum_bound: p must be >= 1");
    double s1 = 0.0, sp = 0.0;
    for (double x : xs) {
        s1 += std::abs(x);
        sp += std::pow(std::abs(x), p);
    }
    const double n = static_cast<double>(xs.size());
    return {std::pow(s1, p), xs.empty() ? 0.0 : std::pow(n, p - 1.0) * sp};
}

double picard_distance(const BackwardSolution& a, const BackwardSolution& b,
                       const PathBundle& bundle, const Exponents& exponents,
                       const MarkSpace& marks, const Exec& exec) {
    if (a.y.size() != b.y.size() || a.u.size() != b.u.size()) {
        throw DomainError("picard_distance: solutions differ in shape");
    }
    BackwardSolution d(a.n_paths, a.n_nodes, a.n_marks);
    for (std::size_t i = 0; i < d.y.size(); ++i) {
        d.y[i] = a.y[i] - b.y[i];
        d.z[i] = a.z[i] - b.z[i];
    }
    for (std::size_t i = 0; i < d.u.size(); ++i) d.u[i] = a.u[i] - b.u[i];
    const NormReport r = estimate_norms(d, bundle, exponents, marks, exec);
    return std::pow(r.s_pA_beta + r.h_p_beta + r.l_p_lambda_beta, 1.0 / exponents.p());
}

std::string norm_csv_header() {
    return "label,s_p_beta,s_p_beta_se,s_pA_beta,s_pA_beta_se,h_p_beta,h_p_beta_se,"
           "l_p_lambda_beta,l_p_lambda_beta_se,l_p_mu_beta,l_p_mu_beta_se,k_p,k_p_se";
}

void write_norm_csv_row(std::ostream& os, const std::string& label, const NormReport& r) {
    os << label;
    for (double v : r.values()) os << fmt::format(",{:.17g}", v);
    os << '\n';
}

}  // namespace rbsdej
