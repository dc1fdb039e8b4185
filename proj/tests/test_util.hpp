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
#ifndef DDRC_TESTS_TEST_UTIL_HPP
#define DDRC_TESTS_TEST_UTIL_HPP

#include <cstdint>
#include <random>

#include "ddrc.hpp"

namespace ddrc::testing {

/// Matrix with i.i.d. standard normal entries.
inline Mat gaussian(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Mat M(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) M(i, j) = nd(rng);
    }
    return M;
}

/// Random matrix rescaled to the given spectral radius.
inline Mat with_radius(Mat A, double radius) {
    const double r = spectral_radius(A);
    return r > 0.0 ? Mat(A * (radius / r)) : A;
}

/// Random plant with Bw = C = I, Dw = 0, D = 0.
inline LtiSystem random_plant(Index n, Index m, double radius, std::mt19937_64& rng) {
    LtiSystem sys;
    sys.A = with_radius(gaussian(n, n, rng), radius);
    sys.B = gaussian(n, m, rng);
    sys.Bw = Mat::Identity(n, n);
    sys.C = Mat::Identity(n, n);
    sys.Dw = Mat::Zero(n, n);
    sys.D = Mat::Zero(n, m);
    return sys;
}

/// Random stable closed loop with the given channel sizes.
inline ClosedLoop random_stable_loop(Index n, Index w, Index p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ur(0.1, 0.95);
    ClosedLoop cl;
    cl.A = with_radius(gaussian(n, n, rng), ur(rng));
    cl.Bw = gaussian(n, w, rng);
    cl.C = gaussian(p, n, rng);
    cl.Dw = 0.3 * gaussian(p, w, rng);
    return cl;
}

}  // namespace ddrc::testing

#endif  // DDRC_TESTS_TEST_UTIL_HPP
