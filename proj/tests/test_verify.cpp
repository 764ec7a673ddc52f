#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "rbsdej/verify.hpp"

using namespace rbsdej;
using rbsdej::test::bundle;
using rbsdej::test::problem;

namespace {
const RegressionBasis kBasis{2, true};
}

TEST(JumpInequality, DocumentedValues) {
    auto r = check_jump_inequality(1.0, 0.0, 1.5);
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_EQ(r.rhs, 0.0);
    EXPECT_TRUE(r.pass);
    r = check_jump_inequality(0.0, 1.0, 1.5);
    EXPECT_DOUBLE_EQ(r.lhs, 1.0);
    EXPECT_DOUBLE_EQ(r.rhs, 0.375);
    EXPECT_TRUE(r.pass);
    r = check_jump_inequality(1.0, -2.0, 1.5);
    EXPECT_DOUBLE_EQ(r.lhs, 3.0);
    EXPECT_DOUBLE_EQ(r.rhs, 1.5);
    EXPECT_TRUE(r.pass);
    EXPECT_THROW(check_jump_inequality(1.0, 1.0, 2.0), DomainError);
}

TEST(JumpInequality, BothEndpointsZeroHasZeroRightSide) {
    EXPECT_EQ(check_jump_inequality(0.0, 0.0, 1.3).rhs, 0.0);
}

TEST(JumpInequality, RandomSamplesNeverFail) {
    const PropertyResult r = jump_inequality_suite(100000, {1.1, 1.5, 1.9}, 77);
    EXPECT_EQ(r.trials, 300000u);
    EXPECT_EQ(r.failures, 0u);
    EXPECT_TRUE(r.witnesses.empty());
    EXPECT_LE(r.worst_margin, 0.0);
}

TEST(JumpInequality, SmallScaleSamplesNeverFail) {
    const PropertyResult r = jump_inequality_suite(50000, {1.01, 1.99}, 78, 1e-3);
    EXPECT_EQ(r.failures, 0u);
}

TEST(PropertyResult, WitnessesAreBoundedAndPresentIffFailures) {
    PropertyResult r;
    for (int k = 0; k < 20; ++k) r.record(k % 2 == 0, k, [&] { return std::to_string(k); });
    EXPECT_EQ(r.trials, 20u);
    EXPECT_EQ(r.failures, 10u);
    EXPECT_EQ(r.witnesses.size(), PropertyResult::kMaxWitnesses);
    EXPECT_EQ(r.witnesses.front(), "1");
    EXPECT_EQ(r.worst_margin, 19.0);
}

TEST(Comparison, DeterministicObstacleHasNoViolations) {
    const ProblemSpec spec = problem("deterministic_obstacle");
    const PropertyResult r =
        comparison_suite(spec, bundle(spec, 100, 2), kBasis, {{1.0, 2.0}, {2.0, 4.0}});
    EXPECT_EQ(r.failures, 0u);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.trials, 2u * 2u * 101u);
}

TEST(Comparison, NeverBindingSolutionsCoincide) {
    const ProblemSpec spec = problem("never_binding");
    const PropertyResult r =
        comparison_suite(spec, bundle(spec, 10, 500, 4), kBasis, {{1.0, 100.0}});
    EXPECT_EQ(r.failures, 0u);
}

TEST(Comparison, RejectsZDependentDrivers) {
    const ProblemSpec spec = problem("z_driver");
    EXPECT_THROW(comparison_suite(spec, bundle(spec, 5, 50), kBasis, {{1.0, 2.0}}), DomainError);
    const ProblemSpec det = problem("deterministic_obstacle");
    EXPECT_THROW(comparison_suite(det, bundle(det, 5, 2), kBasis, {{2.0, 1.0}}), DomainError);
}

TEST(PenaltyDecay, LinearDecayErrorsStrictlyDecrease) {
    const ProblemSpec spec = problem("linear_decay");
    const PenaltyDecay d = penalty_decay_suite(spec, bundle(spec, 100, 2), kBasis,
                                               PenalizationSchedule::geometric(1.0, 8, 1e-3));
    EXPECT_TRUE(d.result.passed);
    for (std::size_t k = 1; k < d.errors.size(); ++k) {
        EXPECT_LT(d.errors[k].mean, d.errors[k - 1].mean);
    }
    EXPECT_LT(d.final_over_first, 0.05);
}

TEST(PenaltyDecay, NeverBindingIsIdenticallyZero) {
    const ProblemSpec spec = problem("never_binding");
    const PenaltyDecay d = penalty_decay_suite(spec, bundle(spec, 10, 200), kBasis,
                                               PenalizationSchedule::geometric(1.0, 3, 1e-3));
    EXPECT_TRUE(d.result.passed);
    for (const auto& e : d.errors) EXPECT_EQ(e.mean, 0.0);
    EXPECT_THROW(penalty_decay_suite(spec, bundle(spec, 10, 200), kBasis,
                                     PenalizationSchedule::geometric(1.0, 2, 1e-3)),
                 DomainError);
}

TEST(PenaltyDecay, JumpProblemIsNonincreasingWithinGate) {
    const ProblemSpec spec = problem("bermudan_put_jumps");
    const PenaltyDecay d = penalty_decay_suite(spec, bundle(spec, 20, 3000, 2), kBasis,
                                               PenalizationSchedule::geometric(1.0, 6, 1e-3));
    EXPECT_TRUE(d.result.passed) << (d.result.witnesses.empty() ? "" : d.result.witnesses[0]);
}

TEST(ScaleData, ScalesDataAndKeepsLinearDriversLinear) {
    const ProblemSpec spec = problem("linear_decay", {{"rate", 2.0}});
    const ProblemSpec s = scale_data(spec, 3.0);
    EXPECT_DOUBLE_EQ(s.terminal(0.0), 3.0);
    EXPECT_DOUBLE_EQ(s.obstacle(0.1, 0.0), 1.5);
    EXPECT_DOUBLE_EQ(s.obstacle_left_T(0.0), 1.5);
    EXPECT_DOUBLE_EQ(s.driver(0.0, 0.0, 2.0, 0.0, {}), -4.0);
    EXPECT_THROW(scale_data(spec, 0.0), DomainError);
}

TEST(Apriori, DeterministicObstacleScalesExactly) {
    const ProblemSpec spec = problem("deterministic_obstacle");
    AprioriOptions o;
    o.exact_tolerance = 1e-12;
    const Apriori a = apriori_suite(spec, bundle(spec, 50, 2), kBasis, true, o);
    EXPECT_TRUE(a.result.passed) << (a.result.witnesses.empty() ? "" : a.result.witnesses[0]);
    EXPECT_GT(a.base.k_p, 0.0);
}

TEST(Apriori, ZeroDataGivesZeroSolution) {
    const ProblemSpec spec = problem("zero_data");
    const Apriori a = apriori_suite(spec, bundle(spec, 10, 500), kBasis, false);
    EXPECT_TRUE(a.result.passed);
    for (double v : a.base.values()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(a.ratio_N, 0.0);
}

TEST(Apriori, BermudanRatioIsStableUnderRefinement) {
    const ProblemSpec spec = problem("bermudan_put");
    const Apriori a = apriori_suite(spec, bundle(spec, 20, 4000, 3), {3, true}, false);
    EXPECT_TRUE(a.result.passed) << (a.result.witnesses.empty() ? "" : a.result.witnesses.back());
    EXPECT_GT(a.ratio_N, 0.0);
}

TEST(Contraction, FrozenIndependentDriverIsVacuous) {
    const ProblemSpec spec = problem("bermudan_put");
    const Contraction c = contraction_suite(spec, bundle(spec, 10, 500), kBasis, {2.0}, 16.0);
    EXPECT_TRUE(c.result.passed);
    EXPECT_EQ(c.table[0].iterations, 1u);
    EXPECT_EQ(c.y0_picard, c.y0_one_pass);
}

TEST(Contraction, ZDriverRatiosStayBelowGate) {
    const ProblemSpec spec = problem("z_driver");
    const double beta = spec.exponents.beta();
    PicardOptions po;
    po.terminal = TerminalMode::reflected;
    const Contraction c =
        contraction_suite(spec, bundle(spec, 20, 4000, 2), kBasis, {0.8, beta}, 64.0, po);
    EXPECT_TRUE(c.result.passed);
    ASSERT_EQ(c.table.size(), 2u);
    EXPECT_LT(c.table.back().max_ratio, 0.8);
    EXPECT_THROW(contraction_suite(spec, bundle(spec, 5, 100), kBasis, {0.1}, 1.0), DomainError);
}

TEST(Lenglart, RandomConfigurationsPass) {
    const PropertyResult r = lenglart_suite(10, 4000, 3);
    EXPECT_EQ(r.trials, 10u);
    EXPECT_TRUE(r.passed);
}

TEST(Suites, DeterministicUnderFixedSeeds) {
    const ProblemSpec spec = problem("bermudan_put_jumps");
    const PathBundle b = bundle(spec, 10, 1000, 5);
    const auto d1 = penalty_decay_suite(spec, b, kBasis, PenalizationSchedule::geometric(1.0, 4, 1e-3));
    const auto d2 = penalty_decay_suite(spec, b, kBasis, PenalizationSchedule::geometric(1.0, 4, 1e-3));
    EXPECT_EQ(d1.result.worst_margin, d2.result.worst_margin);
    EXPECT_EQ(lenglart_suite(3, 500, 4).worst_margin, lenglart_suite(3, 500, 4).worst_margin);
}

TEST(Reports, CsvAndJunitSummaries) {
    PropertyResult ok;
    ok.name = "a";
    ok.record(true, -1.0, [] { return std::string(); });
    PropertyResult bad;
    bad.name = "b<c";
    bad.record(false, 2.0, [] { return std::string("x&y"); });
    bad.passed = false;
    std::ostringstream csv, xml;
    write_property_csv(csv, {ok, bad});
    EXPECT_EQ(csv.str(), "name,trials,failures,worst_margin,passed\na,1,0,-1,1\nb<c,1,1,2,0\n");
    write_junit_summary(xml, "s", {ok, bad});
    EXPECT_NE(xml.str().find("failures=\"1\""), std::string::npos);
    EXPECT_NE(xml.str().find("x&amp;y"), std::string::npos);
    EXPECT_NE(xml.str().find("b&lt;c"), std::string::npos);
}
