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

TEST(Hankel, BlockEntriesFollowTheSequence) {
    std::vector<Vec> seq;
    for (int k = 0; k < 7; ++k) seq.push_back((Vec(2) << k, 10 * k).finished());
    const Mat H = hankel(seq, 1, 3, 4);
    ASSERT_EQ(H.rows(), 6);
    ASSERT_EQ(H.cols(), 4);
    for (Index j = 0; j < 3; ++j) {
        for (Index k = 0; k < 4; ++k) {
            EXPECT_DOUBLE_EQ(H(2 * j, k), static_cast<double>(1 + j + k));
            EXPECT_DOUBLE_EQ(H(2 * j + 1, k), 10.0 * static_cast<double>(1 + j + k));
        }
    }
}

TEST(Hankel, AntiDiagonalsAreConstant) {
    std::mt19937_64 rng(3);
    std::vector<Vec> seq;
    for (int k = 0; k < 12; ++k) seq.push_back(testing::gaussian(3, 1, rng));
    const Mat H = hankel(seq, 0, 4, 9);
    for (Index j = 1; j < 4; ++j) {
        for (Index k = 0; k + 1 < 9; ++k) {
            EXPECT_EQ(H.block(3 * j, k, 3, 1), H.block(3 * (j - 1), k + 1, 3, 1));
        }
    }
}

TEST(Hankel, RejectsShortSequences) {
    std::vector<Vec> seq(4, Vec::Zero(1));
    EXPECT_THROW(hankel(seq, 0, 3, 3), std::invalid_argument);
    EXPECT_THROW(hankel(seq, 0, 0, 3), std::invalid_argument);
}

TEST(Columns, MatchesSequence) {
    std::vector<Vec> seq{Vec::Constant(2, 1.0), Vec::Constant(2, 2.0), Vec::Constant(2, 3.0)};
    const Mat C = columns(seq, 1, 2);
    EXPECT_DOUBLE_EQ(C(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(C(1, 1), 3.0);
}

TEST(Kernel, BasisIsOrthonormalAndSpansNullspace) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Mat L = testing::gaussian(4, 2, rng), R = testing::gaussian(2, 7, rng);
        const Mat M = L * R;  // rank 2, 7 columns
        const Mat K = kernel_basis(M);
        ASSERT_EQ(K.cols(), 5);
        EXPECT_LT(max_abs(M * K), 1e-10);
        EXPECT_LT(max_abs(K.transpose() * K - Mat::Identity(5, 5)), 1e-10);
        EXPECT_EQ(rank(M), 2);
    }
}

TEST(Kernel, FullColumnRankHasEmptyKernel) {
    std::mt19937_64 rng(6);
    const Mat M = testing::gaussian(5, 3, rng);
    EXPECT_EQ(kernel_basis(M).cols(), 0);
}

TEST(Pinv, SatisfiesPenroseConditions) {
    std::mt19937_64 rng(7);
    const Mat M = testing::gaussian(3, 2, rng) * testing::gaussian(2, 5, rng);
    const Mat P = pinv(M);
    EXPECT_LT(max_abs(M * P * M - M), 1e-10);
    EXPECT_LT(max_abs(P * M * P - P), 1e-10);
    EXPECT_LT(max_abs((M * P).transpose() - M * P), 1e-10);
    EXPECT_LT(max_abs((P * M).transpose() - P * M), 1e-10);
}

TEST(SpectralRadius, MatchesPrescribedSpectrum) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ud(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        Vec d(4);
        for (Index i = 0; i < 4; ++i) d(i) = ud(rng);
        Mat V = testing::gaussian(4, 4, rng) + 4.0 * Mat::Identity(4, 4);
        const Mat A = V * d.asDiagonal() * V.inverse();
        EXPECT_NEAR(spectral_radius(A), d.cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, d.cwiseAbs().maxCoeff()));
    }
}

TEST(SpectralRadius, RotationHasUnitRadius) {
    Mat R(2, 2);
    R << std::cos(0.3), -std::sin(0.3), std::sin(0.3), std::cos(0.3);
    EXPECT_NEAR(spectral_radius(0.7 * R), 0.7, 1e-12);
}

TEST(Symmetric, ExtremeEigenvalues) {
    Mat S(2, 2);
    S << 2.0, 1.0, 1.0, 2.0;
    EXPECT_NEAR(lambda_max_sym(S), 3.0, 1e-12);
    EXPECT_NEAR(lambda_min_sym(S), 1.0, 1e-12);
    EXPECT_LT(max_abs(spd_inverse(S) * S - Mat::Identity(2, 2)), 1e-12);
    EXPECT_THROW(spd_inverse(-S), std::invalid_argument);
}

}  // namespace
}  // namespace ddrc
