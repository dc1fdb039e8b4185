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

TEST(LtiSystem, ValidateRejectsBadShapes) {
    LtiSystem sys = demo_system();
    EXPECT_NO_THROW(sys.validate());
    sys.D = Mat::Zero(2, 2);
    EXPECT_THROW(sys.validate(), std::invalid_argument);
}

TEST(Simulate, ScalarRecursion) {
    LtiSystem sys;
    sys.A = Mat::Constant(1, 1, 0.5);
    sys.B = Mat::Constant(1, 1, 1.0);
    sys.Bw = Mat::Constant(1, 1, 2.0);
    sys.C = Mat::Constant(1, 1, 1.0);
    sys.Dw = Mat::Zero(1, 1);
    sys.D = Mat::Zero(1, 1);
    const std::vector<Vec> u{Vec::Constant(1, 1.0), Vec::Constant(1, 0.0)};
    const std::vector<Vec> w{Vec::Constant(1, 0.0), Vec::Constant(1, 1.0)};
    const Trajectory t = simulate(sys, Vec::Constant(1, 4.0), u, w);
    ASSERT_EQ(t.states.size(), 3u);
    EXPECT_DOUBLE_EQ(t.states[1](0), 3.0);  // 0.5*4 + 1
    EXPECT_DOUBLE_EQ(t.states[2](0), 3.5);  // 0.5*3 + 2
    EXPECT_DOUBLE_EQ(t.outputs[1](0), 3.0);
}

TEST(GenerateExperiment, DeterministicUnderSeed) {
    const LtiSystem sys = demo_system();
    const DataRecord a = generate_experiment(sys, 10, 1.0, 0.02, 42);
    const DataRecord b = generate_experiment(sys, 10, 1.0, 0.02, 42);
    const DataRecord c = generate_experiment(sys, 10, 1.0, 0.02, 43);
    EXPECT_EQ(columns(a.states, 0, 11), columns(b.states, 0, 11));
    EXPECT_NE(columns(a.states, 0, 11), columns(c.states, 0, 11));
}

TEST(GenerateExperiment, RespectsBounds) {
    const LtiSystem sys = demo_system();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const DataRecord r = generate_experiment(sys, 20, 0.5, 0.02, seed);
        const Mat U = columns(r.inputs, 0, 20);
        const Mat W = columns(*r.true_disturbance, 0, 20);
        EXPECT_LE(U.cwiseAbs().maxCoeff(), 0.5);
        EXPECT_LE(W.norm(), 0.02 * (1.0 + 1e-12));
        EXPECT_LE(sigma_max(W), 0.02 * (1.0 + 1e-12));
    }
}

TEST(DisturbanceSet, MembershipBothDirections) {
    const DisturbanceSet set = DisturbanceSet::from_sigma_bound(0.1, 2, 5);
    std::mt19937_64 rng(9);
    for (int k = 0; k < 20; ++k) {
        Mat W = testing::gaussian(2, 5, rng);
        const Mat inside = W * (0.099 / sigma_max(W));
        const Mat outside = W * (0.101 / sigma_max(W));
        EXPECT_TRUE(membership(inside, set));
        EXPECT_FALSE(membership(outside, set));
    }
}

TEST(DisturbanceSet, GeneralQmiAgreesWithSigmaBound) {
    // Same set written without the sigma-bound shortcut.
    const DisturbanceSet general(-Mat::Identity(2, 2), Mat::Zero(2, 4), 0.04 * Mat::Identity(4, 4));
    std::mt19937_64 rng(10);
    for (int k = 0; k < 20; ++k) {
        Mat W = testing::gaussian(2, 4, rng);
        EXPECT_TRUE(general.contains(W * (0.199 / sigma_max(W))));
        EXPECT_FALSE(general.contains(W * (0.201 / sigma_max(W))));
    }
}

TEST(DisturbanceSet, RejectsIndefiniteRw) {
    EXPECT_THROW(DisturbanceSet(-Mat::Identity(1, 1), Mat::Zero(1, 2), -Mat::Identity(2, 2)), std::invalid_argument);
    EXPECT_THROW(DisturbanceSet::from_sigma_bound(0.0, 1, 2), std::invalid_argument);
}

}  // namespace
}  // namespace ddrc
