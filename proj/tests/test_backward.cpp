#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "rbsdej/backward.hpp"

using namespace rbsdej;
using rbsdej::test::bundle;
using rbsdej::test::problem;

namespace {

const RegressionBasis kBasis{2, true};

/// y_i = y_{i+1} - y_i³ Δ solved by Newton, independently of the bisection.
double cubic_reference(double xi, double dt, std::size_t steps) {
    double y = xi;
    for (std::size_t k = 0; k < steps; ++k) {
        const double c = y;
        double v = c;
        for (int it = 0; it < 100; ++it) v -= (v + dt * v * v * v - c) / (1.0 + 3.0 * dt * v * v);
        y = v;
    }
    return y;
}

}  // namespace

TEST(TruncateQn, ClipsToTheBallAndKeepsSmallValues) {
    rbsdej::test::Gen g(1);
    for (int k = 0; k < 1000; ++k) {
        const double n = g.uniform(0.1, 10.0);
        const double x = g.uniform(-50.0, 50.0);
        const double q = truncate_qn(x, n);
        EXPECT_LE(std::abs(q), n * (1 + 1e-15));
        if (std::abs(x) <= n) EXPECT_EQ(q, x);
        EXPECT_GE(q * x, 0.0);
    }
    EXPECT_THROW(truncate_qn(1.0, 0.0), DomainError);
}

TEST(TruncatedProblem, BoundsTerminalValueAndInhomogeneity) {
    const ProblemSpec spec = truncated_problem(problem("never_binding"), 0.5);
    EXPECT_DOUBLE_EQ(spec.terminal(3.0), 0.5);
    EXPECT_DOUBLE_EQ(spec.terminal(-0.2), -0.2);
}

TEST(Penalized, DeterministicObstacleMatchesDiscreteClosedForm) {
    // y_i = (y_{i+1} + nΔ) / (1 + nΔ) from y_N = 0 gives 1 - (1 + nΔ)^{-(N-i)},
    // and the increments nΔ(1 - y_i) telescope to the same value for K_T.
    const ProblemSpec spec = problem("deterministic_obstacle");
    for (double n : {1.0, 10.0, 100.0}) {
        const std::size_t N = 400;
        const BackwardSolution s = solve_penalized(spec, bundle(spec, N, 3), kBasis, n);
        const double h = n / static_cast<double>(N);
        for (std::size_t i : {std::size_t{0}, std::size_t{150}, N - 1, N}) {
            const double expected = 1.0 - std::pow(1.0 + h, -static_cast<double>(N - i));
            EXPECT_NEAR(s.Y(1, i), expected, 1e-12);
        }
        EXPECT_NEAR(s.K_T(2), 1.0 - std::pow(1.0 + h, -static_cast<double>(N)), 1e-12);
        EXPECT_EQ(s.k_jump_T[0], 0.0);
        // Continuous limit 1 - e^{-n}, first order in Δ.
        EXPECT_NEAR(s.y0(), 1.0 - std::exp(-n), 0.5 * n * n / N * std::exp(-n) + 1e-3);
    }
}

TEST(Penalized, ReflectedTerminalStartsFromTheLeftLimit) {
    const ProblemSpec spec = problem("deterministic_obstacle");
    PenalizedOptions po;
    po.terminal = TerminalMode::reflected;
    const BackwardSolution s = solve_penalized(spec, bundle(spec, 50, 2), kBasis, 3.0, po);
    EXPECT_EQ(s.Y(0, 50), 0.0);
    EXPECT_DOUBLE_EQ(s.Y(0, 49), 1.0);
    EXPECT_DOUBLE_EQ(s.y0(), 1.0);
    EXPECT_DOUBLE_EQ(s.k_jump_T[1], 1.0);
    EXPECT_DOUBLE_EQ(s.K_T(1), 1.0);
}

TEST(Penalized, LinearDecayMatchesImplicitEuler) {
    const ProblemSpec spec = problem("linear_decay", {{"level", -1e9}, {"rate", 2.0}, {"xi", 3.0}});
    const BackwardSolution s = solve_penalized(spec, bundle(spec, 80, 2), kBasis, 1e3);
    EXPECT_NEAR(s.y0(), 3.0 * std::pow(1.0 + 2.0 / 80.0, -80.0), 1e-12);
    EXPECT_EQ(s.K_T(0), 0.0);
}

TEST(Penalized, NonAffineDriverUsesBisection) {
    ProblemSpec spec = problem("linear_decay", {{"level", -1e9}, {"xi", 1.5}});
    spec.driver.fn = [](double, double, double y, double, std::span<const double>) { return -y * y * y; };
    spec.driver.affine_in_y = false;
    const BackwardSolution s = solve_penalized(spec, bundle(spec, 40, 2), kBasis, 0.0);
    EXPECT_NEAR(s.y0(), cubic_reference(1.5, 1.0 / 40.0, 40), 1e-10);
}

TEST(Penalized, NonMonotoneStepRaisesSolverError) {
    ProblemSpec spec = problem("linear_decay", {{"rate", -200.0}});
    try {
        solve_penalized(spec, bundle(spec, 10, 2), kBasis, 1.0);
        FAIL();
    } catch (const SolverError& e) {
        EXPECT_EQ(e.step(), 9u);
    }
}

TEST(Penalized, MismatchedBundleIsRejected) {
    const ProblemSpec jumps = problem("gamma_driver");
    const PathBundle plain = bundle(problem("never_binding"), 5, 10);
    EXPECT_THROW(solve_penalized(jumps, plain, kBasis, 1.0), DomainError);
    EXPECT_THROW(solve_penalized(problem("never_binding"), plain, kBasis, -1.0), DomainError);
}

TEST(Penalized, ZAndUEstimatesRecoverTheMartingaleIntegrands) {
    // ξ = X_T with X = W + compound jumps: Y_t = X_t + (T - t) Σλ_j e_j, so Z = σ and U_j = e_j.
    const ProblemSpec spec = problem("gamma_driver", {{"a", 0.0}, {"level", -1e9}, {"sigma", 1.0}});
    const PathBundle b = bundle(spec, 10, 20000, 4);
    const BackwardSolution s = solve_penalized(spec, b, kBasis, 0.0);
    double z = 0.0;
    for (std::size_t p = 0; p < b.n_paths; ++p) z += s.Z(p, 5);
    EXPECT_NEAR(z / static_cast<double>(b.n_paths), 1.0, 0.05);
    EXPECT_NEAR(s.U(3, 5, 0), 0.3, 0.02);
    EXPECT_NEAR(s.U(3, 5, 1), -0.2, 0.02);
    EXPECT_NEAR(s.y0(), 0.6 * 0.3 - 0.4 * 0.2, 3.0 * s.y0_stderr() + 0.02);
}

TEST(Penalized, ThreadCountDoesNotChangeTheSolution) {
    const ProblemSpec spec = problem("bermudan_put_jumps");
    const PathBundle b = bundle(spec, 20, 3000, 2);
    PenalizedOptions po;
    po.exec = Exec::parallel(1);
    const BackwardSolution ref = solve_penalized(spec, b, {3, true}, 64.0, po);
    for (int t : {2, 8}) {
        po.exec = Exec::parallel(t);
        const BackwardSolution s = solve_penalized(spec, b, {3, true}, 64.0, po);
        EXPECT_EQ(s.y, ref.y);
        EXPECT_EQ(s.k_cum, ref.k_cum);
    }
    po.exec = Exec::serial();
    const BackwardSolution ser = solve_penalized(spec, b, {3, true}, 64.0, po);
    EXPECT_NEAR(ser.y0(), ref.y0(), 1e-9 * ref.y0());
}

TEST(Penalized, KIsNonnegativeAndNondecreasingOnEveryShippedProblem) {
    for (const auto& entry : problem_registry()) {
        const ProblemSpec spec = problem(entry.name);
        const PathBundle b = bundle(spec, 20, 400, 6);
        PicardOptions po;
        po.terminal = TerminalMode::reflected;
        const BackwardSolution s = picard_solve(spec, b, kBasis, 50.0, po);
        for (std::size_t p = 0; p < s.n_paths; ++p) {
            EXPECT_GE(s.k_jump_T[p], 0.0);
            for (std::size_t i = 0; i + 1 < s.n_nodes; ++i) {
                ASSERT_LE(s.K(p, i), s.K(p, i + 1)) << entry.name;
            }
            EXPECT_EQ(s.K(p, 0), 0.0);
        }
    }
}

TEST(Picard, FrozenIndependentDriverTakesOneIteration) {
    const ProblemSpec spec = problem("bermudan_put");
    const PathBundle b = bundle(spec, 10, 500, 1);
    const BackwardSolution s = picard_solve(spec, b, kBasis, 16.0);
    EXPECT_EQ(s.run.picard_iters, 1u);
    ASSERT_EQ(s.run.residual_history.size(), 1u);
    EXPECT_EQ(s.run.residual_history[0], 0.0);
    EXPECT_EQ(s.y, solve_penalized(spec, b, kBasis, 16.0).y);
}

TEST(Picard, FixedPointMatchesOnePassSolve) {
    for (const char* name : {"z_driver", "gamma_driver"}) {
        const ProblemSpec spec = problem(name);
        const PathBundle b = bundle(spec, 20, 4000, 3);
        PicardOptions po;
        po.tol = 1e-12;
        const BackwardSolution pic = picard_solve(spec, b, kBasis, 8.0, po);
        const BackwardSolution one = solve_penalized(spec, b, kBasis, 8.0);
        EXPECT_FALSE(pic.run.non_contraction) << name;
        EXPECT_NEAR(pic.y0(), one.y0(), 1e-10) << name;
        const auto& h = pic.run.residual_history;
        for (std::size_t k = 1; k < h.size(); ++k) EXPECT_LT(h[k], h[k - 1]) << name;
    }
}

TEST(Picard, RejectsBadOptions) {
    const ProblemSpec spec = problem("z_driver");
    const PathBundle b = bundle(spec, 5, 50, 3);
    PicardOptions po;
    po.tol = 0.0;
    EXPECT_THROW(picard_solve(spec, b, kBasis, 1.0, po), DomainError);
    po.tol = 1e-6;
    po.max_iter = 0;
    EXPECT_THROW(picard_solve(spec, b, kBasis, 1.0, po), DomainError);
}
