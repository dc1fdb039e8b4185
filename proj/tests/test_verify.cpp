/*
 Copyright 2026 The ddrc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <gtest/gtest.h>

#include "test_util.hpp"

namespace ddrc {
namespace {

ClosedLoop scalar_loop(double a, double b, double c, double d) {
    return ClosedLoop{Mat::Constant(1, 1, a), Mat::Constant(1, 1, b), Mat::Constant(1, 1, c), Mat::Constant(1, 1, d)};
}

TEST(HinfNorm, FirstOrderLagHasPeakTwoAtDc) {
    // 1 / (z - 0.5) peaks at z = 1 with gain 2.
    const ClosedLoop cl = scalar_loop(0.5, 1.0, 1.0, 0.0);
    EXPECT_NEAR(frequency_gain(cl, 0.0), 2.0, 1e-12);
    EXPECT_NEAR(hinf_norm_grid(cl).gain, 2.0, 1e-9);
    EXPECT_NEAR(hinf_norm_levelset(cl), 2.0, 1e-5);
    EXPECT_NEAR(hinf_norm(cl), 2.0, 2e-3 * 2.0);
}

TEST(HinfNorm, PureDelayHasUnitGain) {
    const ClosedLoop cl = scalar_loop(0.0, 1.0, 1.0, 0.0);
    for (double th : {0.0, 0.7, 2.0, 3.1}) EXPECT_NEAR(frequency_gain(cl, th), 1.0, 1e-12);
    EXPECT_NEAR(hinf_norm_levelset(cl), 1.0, 1e-5);
    EXPECT_NEAR(hinf_norm(cl), 1.0, 2e-3);
}

TEST(HinfNorm, MethodsAgreeOnRandomLoops) {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 10; ++k) {
        const ClosedLoop cl = testing::random_stable_loop(3, 2, 2, rng);
        const double grid = hinf_norm_grid(cl).gain;
        EXPECT_NEAR(hinf_norm_levelset(cl), grid, 1e-5 * grid);
        EXPECT_NEAR(hinf_norm(cl), grid, 2e-3 * grid);
    }
}

TEST(Analysis, AgreesWithHinfNorm) {
    std::mt19937_64 rng(22);
    for (int k = 0; k < 6; ++k) {
        const ClosedLoop cl = testing::random_stable_loop(2, 1, 2, rng);
        const double h = hinf_norm_levelset(cl);
        EXPECT_TRUE(quadratic_performance_analysis(cl, PerformanceIndex::hinf(1.01 * h, 1, 2)).holds());
        EXPECT_FALSE(quadratic_performance_analysis(cl, PerformanceIndex::hinf(0.99 * h, 1, 2)).holds());
    }
}

TEST(Analysis, UnstableLoopFailsWithoutSolve) {
    const AnalysisResult r = quadratic_performance_analysis(scalar_loop(1.2, 1, 1, 0), PerformanceIndex::hinf(100, 1, 1));
    EXPECT_EQ(r.status, sdp::SdpStatus::Infeasible);
}

TEST(Baseline, DemoPlantOptimum) {
    const SynthesisResult r = nominal_hinf_baseline(demo_system());
    ASSERT_TRUE(r.feasible());
    EXPECT_GE(*r.gamma, 2.15);
    EXPECT_LE(*r.gamma, 2.25);
    EXPECT_LE(hinf_norm_levelset(closed_loop(demo_system(), r.K)), *r.gamma);
}

TEST(Audit, DesignPassesAndFlippedGainFails) {
    const LtiSystem sys = demo_system();
    const DataMatrices dm = build_data_matrices(generate_experiment(sys, 20, 1.0, 0.02, 3));
    const DisturbanceSet set = DisturbanceSet::from_sigma_bound(0.02, 3, 20);
    const PlantKnown pk = plant_known(sys);
    const PerformanceIndex P = PerformanceIndex::hinf(2.4, 3, 3);
    SynthesisResult r = quad_perf_search(dm, pk, set, P);
    ASSERT_TRUE(r.feasible());
    AuditOptions ao;
    ao.samples = 100;
    const AuditReport good = robust_audit(r, dm, pk, set, &P, ao);
    EXPECT_TRUE(good.passed()) << good.message;
    EXPECT_LE(good.max_hinf, 2.4);
    ASSERT_TRUE(good.certificate.has_value());
    EXPECT_LT(good.certificate->lmi_max_eig, 0.0);
    r.K = -r.K;
    const AuditReport bad = robust_audit(r, dm, pk, set, &P, ao);
    EXPECT_FALSE(bad.passed());
    EXPECT_EQ(bad.stable, 0u);
}

TEST(Audit, GainOnlyAuditOfReferenceGain) {
    const LtiSystem sys = demo_system();
    const DataMatrices dm = build_data_matrices(generate_experiment(sys, 20, 1.0, 0.02, 1));
    const DisturbanceSet set = DisturbanceSet::from_sigma_bound(0.02, 3, 20);
    const PerformanceIndex P = PerformanceIndex::hinf(2.4, 3, 3);
    AuditOptions ao;
    ao.samples = 100;
    const AuditReport rep = robust_audit_gain(reference_gain(), dm, plant_known(sys), set, &P, ao);
    EXPECT_TRUE(rep.passed());
    const DataMatrices short_dm = build_data_matrices(generate_experiment(sys, 4, 1.0, 0.02, 1));
    EXPECT_THROW(robust_audit_gain(reference_gain(), short_dm, plant_known(sys),
                                   DisturbanceSet::from_sigma_bound(0.02, 3, 4), &P, ao),
                 std::invalid_argument);
}

}  // namespace
}  // namespace ddrc
