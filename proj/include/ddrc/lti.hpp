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
#ifndef DDRC_LTI_HPP
#define DDRC_LTI_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddrc/linalg.hpp"

namespace ddrc {

/**
 * @brief Discrete-time LTI plant with disturbance and performance channels.
 *
 *   x_{k+1} = A x_k + Bw w_k + B u_k
 *   z_k     = C x_k + Dw w_k + D u_k
 */
struct LtiSystem {
    Mat A;
    Mat B;
    Mat Bw;
    Mat C;
    Mat Dw;
    Mat D;

    Index n() const { return A.rows(); }
    Index m() const { return B.cols(); }
    Index mw() const { return Bw.cols(); }
    Index pz() const { return C.rows(); }

    /// Throws std::invalid_argument on inconsistent dimensions or non-finite entries.
    void validate() const {
        const Index nx = A.rows();
        auto fail = [](const std::string& what) { throw std::invalid_argument("LtiSystem: " + what); };
        if (A.cols() != nx) fail("A must be square");
        if (B.rows() != nx) fail("B must have n rows");
        if (Bw.rows() != nx) fail("Bw must have n rows");
        if (C.cols() != nx) fail("C must have n columns");
        if (Dw.rows() != C.rows() || Dw.cols() != Bw.cols()) fail("Dw must be pz x mw");
        if (D.rows() != C.rows() || D.cols() != B.cols()) fail("D must be pz x m");
        for (const Mat* M : {&A, &B, &Bw, &C, &Dw, &D}) {
            if (!M->allFinite()) fail("entries must be finite");
        }
    }
};

/// One open-loop input-state trajectory x_0..x_N, u_0..u_{N-1}.
struct DataRecord {
    std::vector<Vec> states;
    std::vector<Vec> inputs;
    /// The realized disturbance; only synthetic experiments know it.
    std::optional<std::vector<Vec>> true_disturbance;

    std::size_t horizon() const { return inputs.size(); }

    void validate() const {
        if (states.size() != inputs.size() + 1) {
            throw std::invalid_argument("DataRecord: need exactly one more state than inputs");
        }
        if (true_disturbance && true_disturbance->size() != inputs.size()) {
            throw std::invalid_argument("DataRecord: disturbance length must match input length");
        }
    }
};

struct Trajectory {
    std::vector<Vec> states;   // x_0..x_T
    std::vector<Vec> outputs;  // z_0..z_{T-1}
};

inline Trajectory simulate(const LtiSystem& sys, const Vec& x0, const std::vector<Vec>& u,
                           const std::vector<Vec>& w) {
    sys.validate();
    if (u.size() != w.size()) {
        throw std::invalid_argument("simulate: input and disturbance sequences differ in length");
    }
    if (x0.size() != sys.n()) {
        throw std::invalid_argument("simulate: x0 has wrong dimension");
    }
    Trajectory traj;
    traj.states.reserve(u.size() + 1);
    traj.outputs.reserve(u.size());
    traj.states.push_back(x0);
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (u[k].size() != sys.m() || w[k].size() != sys.mw()) {
            throw std::invalid_argument("simulate: dimension mismatch at step " + std::to_string(k));
        }
        const Vec& x = traj.states.back();
        traj.outputs.push_back(sys.C * x + sys.Dw * w[k] + sys.D * u[k]);
        traj.states.push_back(sys.A * x + sys.Bw * w[k] + sys.B * u[k]);
    }
    return traj;
}

/**
 * @brief Draws a disturbance sequence uniformly from the ball of radius
 * @p radius in the stacked (length * dim) Euclidean norm.
 *
 * The Frobenius norm of the disturbance matrix is therefore at most
 * @p radius, which bounds its largest singular value by the same number.
 */
template <class Rng>
std::vector<Vec> sample_sequence_ball(Index dim, std::size_t length, double radius, Rng& rng) {
    std::vector<Vec> out(length, Vec::Zero(dim));
    const Index total = dim * static_cast<Index>(length);
    if (total == 0 || radius == 0.0) {
        return out;
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec v(total);
    for (Index i = 0; i < total; ++i) {
        v(i) = normal(rng);
    }
    const double nv = v.norm();
    const double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(total));
    v *= (nv > 0.0 ? r / nv : 0.0);
    for (std::size_t k = 0; k < length; ++k) {
        out[k] = v.segment(static_cast<Index>(k) * dim, dim);
    }
    return out;
}

/**
 * @brief Simulates an open-loop experiment with i.i.d. inputs uniform on
 * [-input_bound, input_bound]^m and a disturbance from the sequence ball.
 *
 * The same seed always reproduces the same record.
 */
inline DataRecord generate_experiment(const LtiSystem& sys, std::size_t horizon, double input_bound,
                                      double noise_bound, std::uint64_t seed,
                                      const std::optional<Vec>& x0 = std::nullopt) {
    sys.validate();
    if (horizon < 1) {
        throw std::invalid_argument("generate_experiment: horizon must be at least 1");
    }
    if (input_bound < 0.0 || noise_bound < 0.0) {
        throw std::invalid_argument("generate_experiment: bounds must be non-negative");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> box(-input_bound, input_bound);
    std::vector<Vec> u(horizon, Vec(sys.m()));
    for (auto& uk : u) {
        for (Index i = 0; i < uk.size(); ++i) {
            uk(i) = input_bound > 0.0 ? box(rng) : 0.0;
        }
    }
    std::vector<Vec> w = sample_sequence_ball(sys.mw(), horizon, noise_bound, rng);
    const Vec start = x0 ? *x0 : Vec::Zero(sys.n());
    Trajectory traj = simulate(sys, start, u, w);
    DataRecord rec;
    rec.states = std::move(traj.states);
    rec.inputs = std::move(u);
    rec.true_disturbance = std::move(w);
    return rec;
}

}  // namespace ddrc

#endif  // DDRC_LTI_HPP
