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
#ifndef DDRC_NOISE_HPP
#define DDRC_NOISE_HPP

#include <optional>
#include <stdexcept>

#include "ddrc/linalg.hpp"

namespace ddrc {

/**
 * @brief Quadratic-matrix-inequality disturbance set
 *
 *   { W : [W; I]^T [Qw Sw; Sw^T Rw] [W; I] >= 0 },
 *
 * with W of size mw x N and Rw positive definite.
 */
class DisturbanceSet {
public:
    DisturbanceSet(Mat Qw, Mat Sw, Mat Rw) : Qw_(std::move(Qw)), Sw_(std::move(Sw)), Rw_(std::move(Rw)) {
        const Index mw = Qw_.rows();
        const Index N = Rw_.rows();
        if (Qw_.cols() != mw || Rw_.cols() != N || Sw_.rows() != mw || Sw_.cols() != N) {
            throw std::invalid_argument("DisturbanceSet: inconsistent dimensions");
        }
        if (!Qw_.allFinite() || !Sw_.allFinite() || !Rw_.allFinite()) {
            throw std::invalid_argument("DisturbanceSet: entries must be finite");
        }
        const double sym_tol = 1e-12 * std::max(1.0, std::max(max_abs(Qw_), max_abs(Rw_)));
        if (max_abs(Qw_ - Qw_.transpose()) > sym_tol || max_abs(Rw_ - Rw_.transpose()) > sym_tol) {
            throw std::invalid_argument("DisturbanceSet: Qw and Rw must be symmetric");
        }
        if (N == 0 || lambda_min_sym(Rw_) <= 0.0) {
            throw std::invalid_argument("DisturbanceSet: Rw must be positive definite");
        }
        Qw_ = symmetrize(Qw_);
        Rw_ = symmetrize(Rw_);
    }

    /// Set of all W with sigma_max(W) <= w_bar: (-I, 0, w_bar^2 I).
    static DisturbanceSet from_sigma_bound(double w_bar, Index mw, Index N) {
        if (!(w_bar > 0.0)) {
            throw std::invalid_argument("from_sigma_bound: w_bar must be positive");
        }
        DisturbanceSet set(-Mat::Identity(mw, mw), Mat::Zero(mw, N), w_bar * w_bar * Mat::Identity(N, N));
        set.sigma_bound_ = w_bar;
        return set;
    }

    const Mat& Qw() const { return Qw_; }
    const Mat& Sw() const { return Sw_; }
    const Mat& Rw() const { return Rw_; }
    Index mw() const { return Qw_.rows(); }
    Index horizon() const { return Rw_.rows(); }

    /// The singular-value bound when the set was built by from_sigma_bound.
    std::optional<double> sigma_bound() const { return sigma_bound_; }

    /// W^T Qw W + W^T Sw + Sw^T W + Rw.
    Mat quadratic_form(const Mat& W) const {
        check_dims(W);
        return W.transpose() * Qw_ * W + W.transpose() * Sw_ + Sw_.transpose() * W + Rw_;
    }

    /// Smallest eigenvalue of the quadratic form divided by ||Rw||.
    double membership_margin(const Mat& W) const {
        check_dims(W);
        if (sigma_bound_) {
            // smallest eigenvalue of wb^2 I - W^T W
            const double wb = *sigma_bound_;
            const double s = sigma_max(W);
            return (wb * wb - s * s) / (wb * wb);
        }
        const double scale = lambda_max_sym(Rw_);
        return lambda_min_sym(quadratic_form(W)) / scale;
    }

    bool contains(const Mat& W, double tol = 1e-9) const { return membership_margin(W) >= -tol; }

private:
    void check_dims(const Mat& W) const {
        if (W.rows() != mw() || W.cols() != horizon()) {
            throw std::invalid_argument("DisturbanceSet: W must be mw x N");
        }
    }

    Mat Qw_;
    Mat Sw_;
    Mat Rw_;
    std::optional<double> sigma_bound_;
};

/// Membership test W in the set, with a relative eigenvalue tolerance.
inline bool membership(const Mat& W, const DisturbanceSet& set, double tol = 1e-9) {
    if (W.rows() != set.mw() || W.cols() != set.horizon()) {
        throw std::invalid_argument("membership: W must be mw x N");
    }
    return set.contains(W, tol);
}

}  // namespace ddrc

#endif  // DDRC_NOISE_HPP
