#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "rbsdej/backward.hpp"
#include "rbsdej/model.hpp"
#include "rbsdej/registry.hpp"

using namespace rbsdej;
using rbsdej::test::problem;

TEST(Exponents, RejectsOutOfRangeValues) {
    EXPECT_THROW(Exponents(1.0, 1.0, 1.0), DomainError);
    EXPECT_THROW(Exponents(2.0, 1.0, 1.0), DomainError);
    EXPECT_THROW(Exponents(1.5, -0.1, 1.0), DomainError);
    EXPECT_THROW(Exponents(1.5, 1.0, 0.0), DomainError);
    EXPECT_NO_THROW(Exponents(1.5, 0.0, 1.0));
}

TEST(Exponents, ConjugateAndItoConstant) {
    const Exponents e(1.5, 2.0, 1.0);
    EXPECT_DOUBLE_EQ(e.q(), 3.0);
    EXPECT_DOUBLE_EQ(e.cp(), 0.375);
    EXPECT_DOUBLE_EQ(conjugate_exponent(1.25), 5.0);
    EXPECT_THROW(conjugate_exponent(2.5), DomainError);
}

TEST(Exponents, DefaultBetaExceedsThreshold) {
    for (double p : {1.1, 1.5, 1.9}) {
        EXPECT_DOUBLE_EQ(default_beta(p), 1.0 + 2.0 * (p - 1.0) / p + 1.0);
        EXPECT_GT(default_beta(p), 2.0 * (p - 1.0) / p);
    }
}

TEST(Coefficients, AggregateComputesA2AndZeta2) {
    const auto c = CoefficientSpec::constant(-0.5, 0.3, 0.4, 1.0, 2.0);
    const auto s = aggregate_coefficients(c, Exponents(1.5, 1.0, 1.0), 0.0, 0.0);
    EXPECT_DOUBLE_EQ(s.a2, 1.0 + 0.09 + 0.16);
    EXPECT_NEAR(s.zeta2, std::pow(1.25, 1.5), 1e-15);
    EXPECT_THROW(aggregate_coefficients(c, Exponents(1.5, 1.0, 2.0), 0.0, 0.0), AssumptionViolation);
}

TEST(MarkSpace, NormsAndValidation) {
    const MarkSpace m({0.5, -2.0}, {1.0, 0.25});
    const std::vector<double> u{2.0, 4.0};
    EXPECT_DOUBLE_EQ(m.total_intensity(), 1.25);
    EXPECT_DOUBLE_EQ(m.norm2(u), 4.0 + 4.0);
    EXPECT_DOUBLE_EQ(m.integrate(u), 2.0 + 1.0);
    EXPECT_DOUBLE_EQ(m.small_jump_mass(), 0.25 + 0.25);
    EXPECT_THROW(MarkSpace({1.0}, {1.0, 2.0}), DomainError);
    EXPECT_THROW(MarkSpace({1.0}, {0.0}), DomainError);
}

TEST(CumulativeA, LeftEndpointSums) {
    const TimeGrid g = build_grid(1.0, 4);
    const std::vector<double> z{1.0, 2.0, 3.0, 4.0, 5.0};
    const auto A = cumulative_A(g, z);
    ASSERT_EQ(A.size(), 5u);
    EXPECT_DOUBLE_EQ(A[4], 0.25 * (1 + 2 + 3 + 4));
    EXPECT_THROW(cumulative_A(g, std::vector<double>{1.0, 0.0, 1.0, 1.0, 1.0}), AssumptionViolation);
}

TEST(Registry, EveryShippedProblemSatisfiesTheStandingAssumptions) {
    for (const auto& entry : problem_registry()) {
        const ProblemSpec spec = problem(entry.name);
        const AssumptionReport r = validate_assumptions(spec, 2000, 5, {-5.0, 5.0, 10.0});
        for (const auto& c : r.checks) {
            EXPECT_TRUE(c.passed) << entry.name << " " << c.name << " " << c.witness;
        }
    }
}

TEST(Registry, UnknownNamesAndParametersNameTheField) {
    try {
        problem("no_such_problem");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "problem.name");
    }
    try {
        problem("bermudan_put", {{"strike", 1.0}});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "problem.strike");
    }
}

TEST(Assumptions, DetectMisdeclaredMonotonicity) {
    ProblemSpec spec = problem("linear_decay");
    spec.driver.fn = [](double, double, double y, double, std::span<const double>) { return 3.0 * y; };
    const auto r = validate_assumptions(spec, 500);
    EXPECT_FALSE(r.at("monotonicity").passed);
    EXPECT_FALSE(r.at("monotonicity").witness.empty());
    EXPECT_FALSE(r.at("growth").passed);
}

TEST(Assumptions, DetectMisdeclaredLipschitzRate) {
    ProblemSpec spec = problem("z_driver");
    spec.coeffs = linear_driver_coefficients(0.0, 0.1, 0.0, 0.0);
    const auto r = validate_assumptions(spec, 500);
    EXPECT_FALSE(r.at("lipschitz").passed);
    EXPECT_NEAR(r.at("lipschitz").worst, 2.0, 1e-9);
}

TEST(Assumptions, DetectTerminalBelowObstacle) {
    const ProblemSpec spec = problem("deterministic_obstacle", {{"xi", -1.0}});
    ProblemSpec bad = spec;
    bad.obstacle = [](double, double) { return 1.0; };
    EXPECT_FALSE(validate_assumptions(bad, 100).at("terminal_dominates_obstacle").passed);
}

TEST(Assumptions, SameSeedSameReport) {
    const ProblemSpec spec = problem("gamma_driver");
    const auto a = validate_assumptions(spec, 300, 42);
    const auto b = validate_assumptions(spec, 300, 42);
    for (std::size_t k = 0; k < a.checks.size(); ++k) {
        EXPECT_EQ(a.checks[k].worst, b.checks[k].worst);
    }
}

TEST(Normalize, RoundTripIsExactForLinearDecay) {
    // f = -y without a binding obstacle: the transformed driver vanishes and
    // e^{-R_0} Ỹ_0 reproduces the implicit recursion y_0 = ξ (1 + Δ)^{-N}.
    const ProblemSpec spec = problem("linear_decay", {{"level", -1e9}, {"xi", 2.0}});
    const TimeGrid grid = build_grid(1.0, 64);
    const NormalizedProblem np = normalize_driver(spec, grid);
    EXPECT_TRUE(np.already_normalized);
    const PathBundle b = sample_paths(np.spec, grid, 4, 1);
    const BackwardSolution tilde = solve_penalized(np.spec, b, {1, true}, 0.0);
    const double y0 = std::exp(-np.R_at(0.0)) * tilde.y0();
    EXPECT_NEAR(y0, 2.0 * std::pow(1.0 + 1.0 / 64.0, -64.0), 1e-13);
    const BackwardSolution direct = solve_penalized(spec, b, {1, true}, 0.0);
    EXPECT_NEAR(y0, direct.y0(), 1e-13);
}

TEST(Normalize, ShiftedRateMakesAlphaNonPositive) {
    const ProblemSpec spec = problem("linear_decay", {{"rate", -0.5}});
    const TimeGrid grid = build_grid(1.0, 10);
    const NormalizedProblem np = normalize_driver(spec, grid, 0.25);
    for (double t : {0.0, 0.3, 1.0}) EXPECT_LE(np.spec.coeffs.alpha(t, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(np.R_at(0.0), 0.0);
}

TEST(Normalize, AlreadyNormalizedProblemIsFlagged) {
    const NormalizedProblem np =
        normalize_driver(problem("linear_decay", {{"rate", -0.5}}), build_grid(1.0, 10));
    EXPECT_FALSE(np.already_normalized);
    const NormalizedProblem zero = normalize_driver(problem("zero_data"), build_grid(1.0, 10));
    EXPECT_TRUE(zero.already_normalized);
    EXPECT_DOUBLE_EQ(zero.R_at(1.0), 0.0);
}

TEST(Normalize, StateDependentRateIsRejected) {
    ProblemSpec spec = problem("never_binding");
    spec.coeffs.alpha = [](double, double x) { return 0.1 * x; };
    EXPECT_THROW(normalize_driver(spec, build_grid(1.0, 10)), DomainError);
}
