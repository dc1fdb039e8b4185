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

#include "ddrc/sdp.hpp"

namespace ddrc {
namespace {

using sdp::SdpProblem;
using sdp::SdpStatus;

TEST(Sdp, LyapunovForStableMatrixIsFeasible) {
    Mat A(2, 2);
    A << 0.5, 0.4, -0.2, 0.7;
    SdpProblem p;
    const sdp::Affine P = p.add_symmetric("P", 2);
    p.add_lmi(A.transpose() * P * A - P);
    p.add_lmi(-P);
    const sdp::SdpOutcome o = sdp::solve(p);
    ASSERT_EQ(o.status, SdpStatus::Feasible);
    const Mat Pv = o.value(P);
    EXPECT_GT(lambda_min_sym(Pv), 0.0);
    EXPECT_LT(lambda_max_sym(A.transpose() * Pv * A - Pv), 0.0);
}

TEST(Sdp, LyapunovForUnstableMatrixIsInfeasible) {
    const Mat A = 1.5 * Mat::Identity(2, 2);
    SdpProblem p;
    const sdp::Affine P = p.add_symmetric("P", 2);
    p.add_lmi(A.transpose() * P * A - P);
    p.add_lmi(-P);
    const sdp::SdpOutcome o = sdp::solve(p);
    EXPECT_EQ(o.status, SdpStatus::Infeasible);
    EXPECT_GT(o.info.lower_bound, 0.0);
}

TEST(Sdp, ContradictoryEqualityIsInfeasible) {
    SdpProblem p;
    const sdp::Affine x = p.add_scalar("x");
    p.add_lmi(x + Mat::Ones(1, 1));  // x < -1
    p.add_equality(x);               // x = 0
    EXPECT_EQ(sdp::solve(p).status, SdpStatus::Infeasible);
}

TEST(Sdp, EqualitiesHoldAtReturnedPoint) {
    SdpProblem p;
    const sdp::Affine M = p.add_matrix("M", 2, 2);
    const sdp::Affine Y = p.add_symmetric("Y", 2);
    p.add_lmi(-Y);
    p.add_equality(M - Y);
    p.add_equality(Mat(Mat::Identity(1, 2)) * M * Mat(Mat::Identity(2, 1)) - Mat(Mat::Ones(1, 1)));
    const sdp::SdpOutcome o = sdp::solve(p);
    ASSERT_EQ(o.status, SdpStatus::Feasible);
    EXPECT_LT(max_abs(o.value(M) - o.value(Y)), 1e-7);
    EXPECT_NEAR(o.value(M)(0, 0), 1.0, 1e-7);
}

TEST(Sdp, NonStrictBoundaryIsAccepted) {
    SdpProblem p;
    const sdp::Affine x = p.add_scalar("x");
    p.add_lmi(x, sdp::Strictness::NonStrict);
    p.add_lmi(-x, sdp::Strictness::NonStrict);
    EXPECT_EQ(sdp::solve(p).status, SdpStatus::Feasible);
}

}  // namespace
}  // namespace ddrc
