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
#ifndef DDRC_DATAMAT_HPP
#define DDRC_DATAMAT_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddrc/linalg.hpp"
#include "ddrc/lti.hpp"
#include "ddrc/noise.hpp"
#include "ddrc/sdp.hpp"

namespace ddrc {

/// X = [x_0 .. x_{N-1}], X_plus = [x_1 .. x_N], U = [u_0 .. u_{N-1}].
struct DataMatrices {
    Mat X;
    Mat X_plus;
    Mat U;

    Index n() const { return X.rows(); }
    Index m() const { return U.rows(); }
    Index N() const { return X.cols(); }

    /// [X; U]
    Mat stacked() const {
        Mat S(X.rows() + U.rows(), X.cols());
        S << X, U;
        return S;
    }

    void validate() const {
        if (X.cols() == 0) {
            throw std::invalid_argument("DataMatrices: need at least one sample");
        }
        if (X_plus.rows() != X.rows() || X_plus.cols() != X.cols() || U.cols() != X.cols()) {
            throw std::invalid_argument("DataMatrices: X, X_plus and U must share the column count");
        }
        if (!X.allFinite() || !X_plus.allFinite() || !U.allFinite()) {
            throw std::invalid_argument("DataMatrices: entries must be finite");
        }
    }
};

inline DataMatrices build_data_matrices(const DataRecord& record) {
    record.validate();
    const std::size_t N = record.horizon();
    if (N == 0) {
        throw std::invalid_argument("build_data_matrices: empty record");
    }
    DataMatrices dm;
    dm.X = columns(record.states, 0, N);
    dm.X_plus = columns(record.states, 1, N);
    dm.U = columns(record.inputs, 0, N);
    return dm;
}

/// rank([X; U]) == n + m.
inline bool is_persistently_exciting(const DataMatrices& dm, double tol = -1.0) {
    dm.validate();
    return rank(dm.stacked(), tol) == dm.n() + dm.m();
}

/**
 * @brief Full row rank of the depth-(n+1) Hankel matrix of (w, u).
 *
 * Sufficient for persistence of excitation only when (A, [B Bw]) is
 * controllable, which is not checked here.
 */
inline bool willems_sufficient_check(const std::vector<Vec>& w_seq, const std::vector<Vec>& u_seq, Index n,
                                     double tol = -1.0) {
    if (w_seq.size() != u_seq.size()) {
        throw std::invalid_argument("willems_sufficient_check: sequences differ in length");
    }
    if (w_seq.empty() || w_seq.front().size() == 0) {
        throw std::invalid_argument("willems_sufficient_check: need a non-empty disturbance channel");
    }
    const std::size_t N = w_seq.size();
    const std::size_t depth = static_cast<std::size_t>(n) + 1;
    if (N < 2 * static_cast<std::size_t>(n) + 1) {
        throw std::invalid_argument("willems_sufficient_check: sequences shorter than 2n+1");
    }
    const std::size_t width = N - static_cast<std::size_t>(n);
    const Mat Hw = hankel(w_seq, 0, depth, width);
    const Mat Hu = hankel(u_seq, 0, depth, width);
    Mat H(Hw.rows() + Hu.rows(), Hw.cols());
    H << Hw, Hu;
    return rank(H, tol) == H.rows();
}

/// A system (A, B) together with a disturbance W that explains the data.
struct ConsistentModel {
    Mat A;
    Mat B;
    Mat W;
};

/**
 * @brief Draws disturbances from the set that also explain the data, i.e.
 * W in the set with (X_plus - Bw W) K = 0 for a kernel basis K of [X; U].
 *
 * Samples are W0 + s D along uniformly random directions D of the affine
 * solution space, with s uniform up to the set boundary. W0 is the
 * minimum-norm solution when it lies in the set, otherwise a maximally
 * interior point found by an SDP.
 */
class DisturbanceSampler {
public:
    DisturbanceSampler(const DataMatrices& dm, const Mat& Bw, const DisturbanceSet& set, double rank_tol = -1.0)
        : set_(set), mw_(Bw.cols()), N_(dm.N()) {
        dm.validate();
        if (Bw.rows() != dm.n() || set.mw() != mw_ || set.horizon() != N_) {
            throw std::invalid_argument("DisturbanceSampler: dimensions of Bw, data and set disagree");
        }
        const Mat Kb = kernel_basis(dm.stacked(), rank_tol < 0.0 ? 1e-10 : rank_tol);
        const Index total = mw_ * N_;
        if (Kb.cols() == 0) {
            base_ = Vec::Zero(total);
            directions_ = Mat::Identity(total, total);
        } else {
            // vec(Bw W Kb) = (Kb^T kron Bw) vec(W)
            const Mat Kt = Kb.transpose();
            Mat L(Kt.rows() * Bw.rows(), total);
            for (Index i = 0; i < Kt.rows(); ++i) {
                for (Index j = 0; j < Kt.cols(); ++j) {
                    L.block(i * Bw.rows(), j * Bw.cols(), Bw.rows(), Bw.cols()) = Kt(i, j) * Bw;
                }
            }
            const Mat rhs_m = dm.X_plus * Kb;
            const Vec rhs = Eigen::Map<const Vec>(rhs_m.data(), rhs_m.size());
            base_ = pinv(L, 1e-10) * rhs;
            const double resid = (L * base_ - rhs).norm();
            if (resid > 1e-8 * (1.0 + rhs.norm())) {
                throw std::invalid_argument(
                    "DisturbanceSampler: no disturbance explains the data through Bw (residual " +
                    std::to_string(resid) + ")");
            }
            directions_ = kernel_basis(L, 1e-10);
        }
        if (set_.membership_margin(as_matrix(base_)) < 1e-9) {
            base_ = interior_point();
        }
    }

    /// Point from which samples are drawn; lies in the set.
    Mat base() const { return as_matrix(base_); }

    /// Dimension of the affine solution space.
    Index freedom() const { return directions_.cols(); }

    template <class Rng>
    Mat sample(Rng& rng, bool boundary_biased = false) const {
        if (directions_.cols() == 0) {
            return base();
        }
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Vec d(directions_.cols());
        for (Index i = 0; i < d.size(); ++i) {
            d(i) = normal(rng);
        }
        const Mat D = as_matrix(directions_ * d);
        const Mat W0 = base();
        const double smax = boundary_distance(W0, D);
        double s = unif(rng) * smax;
        if (boundary_biased && unif(rng) < 0.5) {
            s = smax * (1.0 - 1e-9);
        }
        return W0 + s * D;
    }

private:
    Mat as_matrix(const Vec& v) const { return Eigen::Map<const Mat>(v.data(), mw_, N_); }

    // Largest s with W0 + s D still in the set.
    double boundary_distance(const Mat& W0, const Mat& D) const {
        if (set_.sigma_bound() && max_abs(W0) == 0.0) {
            return *set_.sigma_bound() / sigma_max(D);
        }
        double lo = 0.0;
        double hi = 1.0;
        int grow = 0;
        while (set_.membership_margin(W0 + hi * D) >= 0.0) {
            lo = hi;
            hi *= 2.0;
            if (++grow > 200) {
                throw std::runtime_error("DisturbanceSampler: disturbance set is unbounded along a direction");
            }
        }
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (set_.membership_margin(W0 + mid * D) >= 0.0 ? lo : hi) = mid;
        }
        return lo;
    }

    Vec interior_point() const {
        if (lambda_max_sym(set_.Qw()) >= 0.0) {
            throw std::runtime_error("DisturbanceSampler: need Qw negative definite to locate an interior point");
        }
        sdp::SdpProblem prob;
        const sdp::Affine xi = prob.add_matrix("xi", directions_.cols(), 1);
        sdp::Affine w = directions_ * xi + Mat(base_);
        // Rebuild W column by column from vec(W).
        std::vector<std::vector<sdp::Affine>> cols(1);
        for (Index j = 0; j < N_; ++j) {
            cols[0].push_back(w.block(j * mw_, 0, mw_, 1));
        }
        const sdp::Affine W = sdp::concat(cols);
        const Mat Qinv = spd_inverse(-set_.Qw());
        const sdp::Affine lower = sdp::Affine(set_.Rw()) + W.transpose() * set_.Sw() + set_.Sw().transpose() * W;
        const sdp::Affine F =
            sdp::symmetric_blocks({{sdp::Affine(Qinv), W}, {std::nullopt, lower}});
        prob.add_lmi(-F, sdp::Strictness::Strict, "disturbance set");
        sdp::SolverOptions opt;
        opt.eps_strict = 0.0;
        opt.stop_when_feasible = false;
        opt.gap_tol = 1e-6;
        const sdp::SdpOutcome out = sdp::solve(prob, opt);
        const Mat Wv = out.value(W);
        const Vec v = Eigen::Map<const Vec>(Wv.data(), Wv.size());
        if (set_.membership_margin(as_matrix(v)) < 0.0) {
            throw std::runtime_error("DisturbanceSampler: no disturbance in the set explains the data");
        }
        return v;
    }

    DisturbanceSet set_;
    Index mw_;
    Index N_;
    Vec base_;
    Mat directions_;
};

/// Least-squares [A B] = (X_plus - Bw W) pinv([X; U]); exact when W explains the data.
inline ConsistentModel reconstruct_model(const DataMatrices& dm, const Mat& Bw, const Mat& W) {
    const Mat AB = (dm.X_plus - Bw * W) * pinv(dm.stacked());
    return {AB.leftCols(dm.n()), AB.rightCols(dm.m()), W};
}

/// Residual max |X_plus - A X - B U - Bw W|.
inline double consistency_residual(const DataMatrices& dm, const Mat& Bw, const ConsistentModel& cm) {
    return max_abs(dm.X_plus - cm.A * dm.X - cm.B * dm.U - Bw * cm.W);
}

/**
 * @brief Samples systems consistent with persistently exciting data.
 *
 * Throws std::invalid_argument when [X; U] lacks full row rank, since the
 * consistent set is then not parametrized by W alone.
 */
inline std::vector<ConsistentModel> sample_consistent_systems(const DataMatrices& dm, const Mat& Bw,
                                                              const DisturbanceSet& set, std::size_t count,
                                                              std::uint64_t seed, bool boundary_biased = false) {
    dm.validate();
    if (count == 0) {
        return {};
    }
    if (!is_persistently_exciting(dm)) {
        throw std::invalid_argument("sample_consistent_systems: [X; U] must have full row rank");
    }
    DisturbanceSampler sampler(dm, Bw, set);
    std::mt19937_64 rng(seed);
    std::vector<ConsistentModel> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(reconstruct_model(dm, Bw, sampler.sample(rng, boundary_biased)));
    }
    return out;
}

enum class MembershipVerdict { Member, NotMember, Inconclusive };

inline const char* to_string(MembershipVerdict v) {
    switch (v) {
        case MembershipVerdict::Member: return "Member";
        case MembershipVerdict::NotMember: return "NotMember";
        case MembershipVerdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

/**
 * @brief Decides whether A_cand = (X_plus - Bw W) G for some W in the set
 * that also satisfies (X_plus - Bw W) K = 0, K a kernel basis of [X; U].
 *
 * Posed as an SDP in W: two linear equalities and the set's quadratic
 * inequality in Schur form (requires Qw negative definite).
 */
inline MembershipVerdict exact_closed_loop_membership(const Mat& A_cand, const Mat& G, const DataMatrices& dm,
                                                      const Mat& Bw, const DisturbanceSet& set,
                                                      sdp::SolverOptions opt = {}) {
    dm.validate();
    const Index n = dm.n();
    if (A_cand.rows() != n || A_cand.cols() != n || G.rows() != dm.N() || G.cols() != n || Bw.rows() != n ||
        set.mw() != Bw.cols() || set.horizon() != dm.N()) {
        throw std::invalid_argument("exact_closed_loop_membership: inconsistent dimensions");
    }
    if (lambda_max_sym(set.Qw()) >= 0.0) {
        throw std::invalid_argument("exact_closed_loop_membership: Qw must be negative definite");
    }
    sdp::SdpProblem prob;
    const sdp::Affine W = prob.add_matrix("W", Bw.cols(), dm.N());
    const sdp::Affine resid = Mat(dm.X_plus) - Bw * W;
    prob.add_equality(resid * G - A_cand, "closed loop");
    const Mat Kb = kernel_basis(dm.stacked(), 1e-10);
    if (Kb.cols() > 0) {
        prob.add_equality(resid * Kb, "data kernel");
    }
    const Mat Qinv = spd_inverse(-set.Qw());
    const sdp::Affine lower = sdp::Affine(set.Rw()) + W.transpose() * set.Sw() + set.Sw().transpose() * W;
    prob.add_lmi(-sdp::symmetric_blocks({{sdp::Affine(Qinv), W}, {std::nullopt, lower}}),
                 sdp::Strictness::NonStrict, "disturbance set");
    opt.equality_tol = std::min(opt.equality_tol, 1e-7);
    opt.nonstrict_tol = std::max(opt.nonstrict_tol, 1e-9 * std::max(1.0, lambda_max_sym(set.Rw())));
    const sdp::SdpOutcome out = sdp::solve(prob, opt);
    switch (out.status) {
        case sdp::SdpStatus::Feasible: return MembershipVerdict::Member;
        case sdp::SdpStatus::Infeasible: return MembershipVerdict::NotMember;
        case sdp::SdpStatus::Inconclusive: return MembershipVerdict::Inconclusive;
    }
    return MembershipVerdict::Inconclusive;
}

}  // namespace ddrc

#endif  // DDRC_DATAMAT_HPP
