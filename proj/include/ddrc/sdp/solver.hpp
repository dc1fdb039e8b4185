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
#ifndef DDRC_SDP_SOLVER_HPP
#define DDRC_SDP_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "ddrc/sdp/problem.hpp"

namespace ddrc::sdp {

enum class SdpStatus { Feasible, Infeasible, Inconclusive };

inline const char* to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::Feasible: return "Feasible";
        case SdpStatus::Infeasible: return "Infeasible";
        case SdpStatus::Inconclusive: return "Inconclusive";
    }
    return "?";
}

struct SolverOptions {
    /// Strict blocks must reach lambda_max(F) <= -eps_strict.
    double eps_strict = 1e-6;
    /// Non-strict blocks accept lambda_max(F) <= nonstrict_tol.
    double nonstrict_tol = 1e-9;
    /// Relative equality residual accepted at a returned point.
    double equality_tol = 1e-7;
    /// Bound on every free coordinate (after scaling); Infeasible verdicts hold inside this box.
    double box_radius = 1e5;
    int max_iterations = 100;
    /// Relative gap between upper and lower bound on the optimal violation.
    double gap_tol = 1e-7;
    /// Return the first verified point instead of maximizing the margin.
    bool stop_when_feasible = true;
    /// Return as soon as an infeasibility certificate is found.
    bool stop_when_infeasible = true;
    /// Optional per-iteration trace.
    std::ostream* log = nullptr;
};

struct SolveInfo {
    int iterations = 0;
    /// Best upper bound on the optimal worst violation t* (t* <= 0 iff feasible).
    double upper_bound = std::numeric_limits<double>::infinity();
    /// Certified lower bound on t* inside the coordinate box.
    double lower_bound = -std::numeric_limits<double>::infinity();
    double equality_residual = 0.0;
    std::string message;
};

struct SdpOutcome {
    SdpStatus status = SdpStatus::Inconclusive;
    /// Decision coordinates of the returned point (best point found).
    Vec x;
    /// lambda_max of each LMI block at x.
    std::vector<double> block_max_eig;
    /// max_j (lambda_max(F_j(x)) + required margin_j); <= 0 at a verified point.
    double worst_violation = std::numeric_limits<double>::infinity();
    SolveInfo info;

    bool feasible() const { return status == SdpStatus::Feasible; }
    Mat value(const Affine& e) const { return e.evaluate(x); }
};

namespace detail {

struct Block {
    Index n = 0;
    double required = 0.0;              // m_j: strict eps or -tol
    Mat C;                              // -F_j(x0) - m_j I
    std::vector<CoordCoefficient> co;   // scaled coefficients; coordinate p is t
};

/// Largest alpha in [0, inf) with M + alpha dM positive semidefinite; M must be positive definite.
inline double max_step(const Mat& M, const Mat& dM) {
    Eigen::LLT<Mat> llt(M);
    if (llt.info() != Eigen::Success) {
        return 0.0;
    }
    const Mat Linv = llt.matrixL().solve(Mat::Identity(M.rows(), M.cols()));
    const double lmin = lambda_min_sym(Linv * dM * Linv.transpose());
    return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

inline double max_step_lp(const Vec& v, const Vec& dv) {
    double a = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < v.size(); ++i) {
        if (dv(i) < 0.0) {
            a = std::min(a, -v(i) / dv(i));
        }
    }
    return a;
}

/// tr(B M) for symmetric sparse B given by its upper triangle.
inline double inner(const std::vector<SparseEntry>& B, const Mat& M) {
    double acc = 0.0;
    for (const auto& e : B) {
        acc += e.row == e.col ? e.value * M(e.row, e.row) : e.value * (M(e.row, e.col) + M(e.col, e.row));
    }
    return acc;
}

class Ipm {
public:
    Ipm(const SdpProblem& prob, const SolverOptions& opt) : prob_(prob), opt_(opt) {}

    SdpOutcome run() {
        SdpOutcome out;
        p_ = prob_.num_coords();
        compute_scaling();
        if (!eliminate_equalities(out)) {
            return out;
        }
        if (prob_.lmis().empty()) {
            finalize_point(out, x0s_);
            out.status = SdpStatus::Feasible;
            out.info.message = "no LMI blocks; equalities consistent";
            return out;
        }
        build_blocks();
        return iterate();
    }

private:
    void compute_scaling() {
        scale_ = Vec::Zero(p_);
        for (const auto& L : prob_.lmis()) {
            for (const auto& cc : L.coefficients) {
                for (const auto& e : cc.upper) {
                    scale_(cc.coord) += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
                }
            }
        }
        Vec eq_scale = Vec::Zero(p_);
        for (const auto& row : prob_.equalities()) {
            for (const auto& [k, v] : row.coefficients) {
                eq_scale(k) += v * v;
            }
        }
        for (Index k = 0; k < p_; ++k) {
            double s = std::sqrt(scale_(k));
            if (s == 0.0) {
                s = std::sqrt(eq_scale(k));
            }
            scale_(k) = s > 0.0 ? s : 1.0;
        }
    }

    // x_scaled = x0s_ + Z_ xi; returns false when the equalities are inconsistent.
    bool eliminate_equalities(SdpOutcome& out) {
        const auto& rows = prob_.equalities();
        const Index r = static_cast<Index>(rows.size());
        if (r == 0) {
            Z_ = Mat::Identity(p_, p_);
            x0s_ = Vec::Zero(p_);
            return true;
        }
        Mat E = Mat::Zero(r, p_);
        Vec c(r);
        for (Index i = 0; i < r; ++i) {
            for (const auto& [k, v] : rows[i].coefficients) {
                E(i, k) += v / scale_(k);
            }
            c(i) = rows[i].constant;
            const double nrm = E.row(i).norm();
            if (nrm > 0.0) {
                E.row(i) /= nrm;
                c(i) /= nrm;
            } else if (std::abs(c(i)) > opt_.equality_tol) {
                fail_equalities(out, "constant equality row '" + rows[i].label + "' is violated");
                return false;
            } else {
                c(i) = 0.0;
            }
        }
        const auto svd = full_svd(E);
        const Vec& s = svd.singularValues();
        const double cutoff = (s.size() > 0 ? s(0) : 0.0) * 1e-10;
        Index rk = 0;
        while (rk < s.size() && s(rk) > cutoff) {
            ++rk;
        }
        Vec coef = svd.matrixU().leftCols(rk).transpose() * (-c);
        for (Index i = 0; i < rk; ++i) {
            coef(i) /= s(i);
        }
        x0s_ = svd.matrixV().leftCols(rk) * coef;
        Z_ = svd.matrixV().rightCols(p_ - rk);
        const double resid = (E * x0s_ + c).cwiseAbs().maxCoeff();
        out.info.equality_residual = resid;
        if (resid > opt_.equality_tol) {
            fail_equalities(out, "equality constraints are inconsistent (least-squares residual " +
                                     std::to_string(resid) + ")");
            return false;
        }
        return true;
    }

    void fail_equalities(SdpOutcome& out, const std::string& why) const {
        out.status = SdpStatus::Infeasible;
        out.x = Vec::Zero(p_);
        out.info.message = why;
        out.info.lower_bound = std::numeric_limits<double>::infinity();
    }

    void build_blocks() {
        q_ = Z_.cols();
        const Vec x0 = x0s_.cwiseQuotient(scale_);
        blocks_.clear();
        for (const auto& L : prob_.lmis()) {
            Block b;
            b.n = L.size();
            b.required = L.strictness == Strictness::Strict ? opt_.eps_strict : -opt_.nonstrict_tol;
            b.C = -symmetrize(L.expr.evaluate(x0)) - b.required * Mat::Identity(b.n, b.n);
            for (const auto& cc : L.coefficients) {
                CoordCoefficient sc{cc.coord, cc.upper};
                for (auto& e : sc.upper) {
                    e.value /= scale_(cc.coord);
                }
                b.co.push_back(std::move(sc));
            }
            CoordCoefficient tc{p_, {}};
            for (Index i = 0; i < b.n; ++i) {
                tc.upper.push_back({i, i, -1.0});
            }
            b.co.push_back(std::move(tc));
            blocks_.push_back(std::move(b));
        }
        nu_ = 2.0 * static_cast<double>(q_);
        for (const auto& b : blocks_) {
            nu_ += static_cast<double>(b.n);
        }
    }

    // Scaled-coordinate offset w = Z xi (without x0) and the t component of y.
    Vec offset(const Vec& y) const { return Z_ * y.head(q_); }

    std::vector<Mat> dual_slack(const Vec& y) const {
        const Vec w = offset(y);
        const double t = y(q_);
        std::vector<Mat> S(blocks_.size());
        for (std::size_t j = 0; j < blocks_.size(); ++j) {
            const Block& b = blocks_[j];
            Mat Sj = b.C;
            Sj.diagonal().array() += t;
            for (const auto& cc : b.co) {
                if (cc.coord == p_) continue;
                const double wk = w(cc.coord);
                if (wk == 0.0) continue;
                for (const auto& e : cc.upper) {
                    Sj(e.row, e.col) -= wk * e.value;
                    if (e.row != e.col) Sj(e.col, e.row) -= wk * e.value;
                }
            }
            S[j] = std::move(Sj);
        }
        return S;
    }

    // Slack change for a step dy: -A^*(dy).
    std::vector<Mat> dual_step(const Vec& dy) const {
        const Vec w = offset(dy);
        std::vector<Mat> dS(blocks_.size());
        for (std::size_t j = 0; j < blocks_.size(); ++j) {
            const Block& b = blocks_[j];
            Mat D = Mat::Identity(b.n, b.n) * dy(q_);
            for (const auto& cc : b.co) {
                if (cc.coord == p_) continue;
                const double wk = w(cc.coord);
                if (wk == 0.0) continue;
                for (const auto& e : cc.upper) {
                    D(e.row, e.col) -= wk * e.value;
                    if (e.row != e.col) D(e.col, e.row) -= wk * e.value;
                }
            }
            dS[j] = std::move(D);
        }
        return dS;
    }

    // A(M) for block matrices M and box parts (mp for upper slacks, mm for lower).
    Vec apply_A(const std::vector<Mat>& M, const Vec& mp, const Vec& mm) const {
        Vec g = Vec::Zero(p_ + 1);
        for (std::size_t j = 0; j < blocks_.size(); ++j) {
            for (const auto& cc : blocks_[j].co) {
                g(cc.coord) += inner(cc.upper, M[j]);
            }
        }
        Vec out(q_ + 1);
        out.head(q_) = Z_.transpose() * g.head(p_) + mp - mm;
        out(q_) = g(p_);
        return out;
    }

    Mat schur(const std::vector<Mat>& X, const std::vector<Mat>& G, const Vec& xp, const Vec& sp, const Vec& xm,
              const Vec& sm) const {
        Mat Hext = Mat::Zero(p_ + 1, p_ + 1);
        for (std::size_t j = 0; j < blocks_.size(); ++j) {
            const Block& b = blocks_[j];
            Mat W(b.n, b.n);
            for (std::size_t a = 0; a < b.co.size(); ++a) {
                W.setZero();
                for (const auto& e : b.co[a].upper) {
                    W.noalias() += e.value * X[j].col(e.row) * G[j].row(e.col);
                    if (e.row != e.col) {
                        W.noalias() += e.value * X[j].col(e.col) * G[j].row(e.row);
                    }
                }
                const Index k = b.co[a].coord;
                for (std::size_t c = a; c < b.co.size(); ++c) {
                    const Index l = b.co[c].coord;
                    const double v = inner(b.co[c].upper, W);
                    Hext(k, l) += v;
                    if (k != l) Hext(l, k) += v;
                }
            }
        }
        Mat H(q_ + 1, q_ + 1);
        const Mat HZ = Hext.topLeftCorner(p_, p_) * Z_;
        H.topLeftCorner(q_, q_) = Z_.transpose() * HZ;
        const Vec ht = Z_.transpose() * Hext.col(p_).head(p_);
        H.col(q_).head(q_) = ht;
        H.row(q_).head(q_) = ht.transpose();
        H(q_, q_) = Hext(p_, p_);
        H.topLeftCorner(q_, q_).diagonal() += xp.cwiseQuotient(sp) + xm.cwiseQuotient(sm);
        return symmetrize(H);
    }

    // Lower bound on t* over the coordinate box from a trace-normalized X:
    // t >= <F0, X> + xi' g >= <F0, X> - R |g|_1 with g the free-direction residual.
    double certificate_bound(const std::vector<Mat>& Xh, const Vec&, const Vec&) const {
        const Vec zero = Vec::Zero(q_);
        Vec b = Vec::Zero(q_ + 1);
        b(q_) = -1.0;
        const Vec rh = b - apply_A(Xh, zero, zero);
        double cx = 0.0;
        for (std::size_t j = 0; j < blocks_.size(); ++j) cx += (blocks_[j].C.cwiseProduct(Xh[j])).sum();
        // A trace drift from one is absorbed by rescaling the objective part.
        return (-cx - opt_.box_radius * rh.head(q_).lpNorm<1>()) / (1.0 + rh(q_));
    }

    // Dense A_i for every free direction (and t), per block.
    void build_dense_rows() const {
        if (!dense_rows_.empty()) return;
        dense_rows_.resize(blocks_.size());
        for (std::size_t j = 0; j < blocks_.size(); ++j) {
            const Block& b = blocks_[j];
            std::vector<Mat>& rows = dense_rows_[j];
            rows.assign(static_cast<std::size_t>(q_ + 1), Mat::Zero(b.n, b.n));
            for (const auto& cc : b.co) {
                for (Index i = 0; i <= q_; ++i) {
                    const double z = cc.coord == p_ ? (i == q_ ? 1.0 : 0.0) : (i == q_ ? 0.0 : Z_(cc.coord, i));
                    if (z == 0.0) continue;
                    Mat& Ai = rows[static_cast<std::size_t>(i)];
                    for (const auto& e : cc.upper) {
                        Ai(e.row, e.col) += z * e.value;
                        if (e.row != e.col) Ai(e.col, e.row) += z * e.value;
                    }
                }
            }
        }
    }

    // Removes the primal residual inside the dominant eigenspace of each block,
    // which keeps the point positive semidefinite exactly, then re-evaluates the bound.
    double polished_bound(const std::vector<Mat>& Xh, const Vec& xph, const Vec& xmh) const {
        build_dense_rows();
        double best = scaled_polished_bound(Xh, xph, xmh);
        if (best > 0.0) return best;
        for (const double rel : {1e-3, 1e-5, 1e-7, 1e-9}) {
            best = std::max(best, polished_bound(Xh, xph, xmh, rel));
            if (best > 0.0) break;
        }
        return best;
    }

    // Correction X^(1/2) W X^(1/2) with W = X^(1/2) A*(z) X^(1/2); stays PSD while I + W is.
    double scaled_polished_bound(std::vector<Mat> Xh, const Vec& xph, const Vec& xmh) const {
        const Index nb = static_cast<Index>(blocks_.size());
        double best = -std::numeric_limits<double>::infinity();
        Vec b = Vec::Zero(q_ + 1);
        b(q_) = -1.0;
        for (int pass = 0; pass < 3; ++pass) {
            std::vector<Mat> half(nb);
            std::vector<std::vector<Mat>> P(nb);
            for (Index j = 0; j < nb; ++j) {
                Eigen::SelfAdjointEigenSolver<Mat> es(Xh[j]);
                half[j] = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                          es.eigenvectors().transpose();
                P[j].resize(static_cast<std::size_t>(q_ + 1));
                for (Index i = 0; i <= q_; ++i) {
                    P[j][static_cast<std::size_t>(i)] = half[j] * dense_rows_[j][static_cast<std::size_t>(i)] * half[j];
                }
            }
            Mat Gram = Mat::Zero(q_ + 1, q_ + 1);
            for (Index j = 0; j < nb; ++j) {
                for (Index i = 0; i <= q_; ++i) {
                    for (Index l = i; l <= q_; ++l) {
                        const double v = (P[j][static_cast<std::size_t>(i)].cwiseProduct(P[j][static_cast<std::size_t>(l)])).sum();
                        Gram(i, l) += v;
                        if (l != i) Gram(l, i) += v;
                    }
                }
            }
            const Vec r = b - apply_A(Xh, xph, xmh);
            const Vec z = Gram.completeOrthogonalDecomposition().solve(r);
            std::vector<Mat> Xn(nb);
            bool psd = true;
            for (Index j = 0; j < nb && psd; ++j) {
                Mat W = Mat::Zero(Xh[j].rows(), Xh[j].cols());
                for (Index i = 0; i <= q_; ++i) W += z(i) * P[j][static_cast<std::size_t>(i)];
                W = symmetrize(W);
                psd = W.rows() == 0 || lambda_min_sym(W) > -1.0;
                Xn[j] = symmetrize(half[j] * (Mat::Identity(W.rows(), W.cols()) + W) * half[j]);
            }
            if (!psd) break;
            Xh = std::move(Xn);
            best = std::max(best, certificate_bound(Xh, xph, xmh));
            if (best > 0.0) break;
        }
        return best;
    }

    double polished_bound(std::vector<Mat> Xh, const Vec& xph, const Vec& xmh, double rel) const {
        const Index nb = static_cast<Index>(blocks_.size());
        double best = -std::numeric_limits<double>::infinity();
        Vec b = Vec::Zero(q_ + 1);
        b(q_) = -1.0;
        for (int pass = 0; pass < 3; ++pass) {
            std::vector<Mat> V(nb);
            std::vector<std::vector<Mat>> P(nb);
            double top = 0.0;
            std::vector<Eigen::SelfAdjointEigenSolver<Mat>> es(nb);
            for (Index j = 0; j < nb; ++j) {
                es[j].compute(Xh[j]);
                top = std::max(top, es[j].eigenvalues().maxCoeff());
            }
            for (Index j = 0; j < nb; ++j) {
                std::vector<Index> keep;
                for (Index k = 0; k < Xh[j].rows(); ++k) {
                    if (es[j].eigenvalues()(k) > rel * top) keep.push_back(k);
                }
                V[j].resize(Xh[j].rows(), static_cast<Index>(keep.size()));
                for (std::size_t k = 0; k < keep.size(); ++k) V[j].col(static_cast<Index>(k)) = es[j].eigenvectors().col(keep[k]);
                P[j].resize(static_cast<std::size_t>(q_ + 1));
                for (Index i = 0; i <= q_; ++i) {
                    P[j][static_cast<std::size_t>(i)] = V[j].transpose() * dense_rows_[j][static_cast<std::size_t>(i)] * V[j];
                }
            }
            Mat Gram = Mat::Zero(q_ + 1, q_ + 1);
            for (Index j = 0; j < nb; ++j) {
                for (Index i = 0; i <= q_; ++i) {
                    for (Index l = i; l <= q_; ++l) {
                        const double v = (P[j][static_cast<std::size_t>(i)].cwiseProduct(P[j][static_cast<std::size_t>(l)])).sum();
                        Gram(i, l) += v;
                        if (l != i) Gram(l, i) += v;
                    }
                }
            }
            const Vec r = b - apply_A(Xh, xph, xmh);
            const Vec z = Gram.completeOrthogonalDecomposition().solve(r);
            bool psd = true;
            std::vector<Mat> Xn(nb);
            for (Index j = 0; j < nb && psd; ++j) {
                Mat D = Mat::Zero(V[j].cols(), V[j].cols());
                for (Index i = 0; i <= q_; ++i) D += z(i) * P[j][static_cast<std::size_t>(i)];
                const Mat inner_face = V[j].transpose() * Xh[j] * V[j] + D;
                Eigen::LLT<Mat> llt(symmetrize(inner_face));
                psd = V[j].cols() == 0 || llt.info() == Eigen::Success;
                Xn[j] = symmetrize(Xh[j] + V[j] * D * V[j].transpose());
                if (psd && V[j].cols() < Xh[j].rows()) {
                    psd = lambda_min_sym(Xn[j]) >= 0.0;
                }
            }
            if (!psd) break;
            Xh = std::move(Xn);
            best = std::max(best, certificate_bound(Xh, xph, xmh));
            if (best > 0.0) break;
        }
        return best;
    }

    void finalize_point(SdpOutcome& out, const Vec& xs) const {
        out.x = xs.cwiseQuotient(scale_);
        out.block_max_eig.clear();
        out.worst_violation = -std::numeric_limits<double>::infinity();
        for (const auto& L : prob_.lmis()) {
            const double lmax = lambda_max_sym(L.expr.evaluate(out.x));
            out.block_max_eig.push_back(lmax);
            const double req = L.strictness == Strictness::Strict ? opt_.eps_strict : -opt_.nonstrict_tol;
            out.worst_violation = std::max(out.worst_violation, lmax + req);
        }
        double resid = 0.0;
        for (const auto& row : prob_.equalities()) {
            double acc = row.constant;
            double mag = std::abs(row.constant);
            for (const auto& [k, v] : row.coefficients) {
                acc += v * out.x(k);
                mag += std::abs(v * out.x(k));
            }
            resid = std::max(resid, std::abs(acc) / (1.0 + mag));
        }
        out.info.equality_residual = resid;
    }

    bool verified(const SdpOutcome& o) const {
        return o.worst_violation <= 0.0 && o.info.equality_residual <= opt_.equality_tol;
    }

    SdpOutcome iterate() {
        SdpOutcome out;
        const double R = opt_.box_radius;
        const Index nb = static_cast<Index>(blocks_.size());

        // Start: xi = 0, t above the worst eigenvalue, X = mu0 S^{-1} with unit total trace.
        double worst0 = -std::numeric_limits<double>::infinity();
        for (const auto& b : blocks_) {
            worst0 = std::max(worst0, lambda_max_sym(-b.C));
        }
        Vec y = Vec::Zero(q_ + 1);
        y(q_) = worst0 + 1.0 + 0.5 * std::abs(worst0);
        std::vector<Mat> S = dual_slack(y);
        std::vector<Mat> X(nb), G(nb);
        double trace_inv = 0.0;
        for (Index j = 0; j < nb; ++j) {
            G[j] = spd_inverse(S[j]);
            trace_inv += G[j].trace();
        }
        const double mu0 = 1.0 / trace_inv;
        for (Index j = 0; j < nb; ++j) {
            X[j] = mu0 * G[j];
        }
        Vec sp = Vec::Constant(q_, R), sm = Vec::Constant(q_, R);
        Vec xp = Vec::Constant(q_, mu0 / R), xm = Vec::Constant(q_, mu0 / R);
        Vec b = Vec::Zero(q_ + 1);
        b(q_) = -1.0;

        SdpOutcome best;
        bool have_feasible = false;
        double lower = -std::numeric_limits<double>::infinity();
        double upper = std::numeric_limits<double>::infinity();
        int stalls = 0;
        std::string message = "iteration limit reached";
        int it = 0;

        for (; it <= opt_.max_iterations; ++it) {
            // Bounds from the current iterate.
            double worst = -std::numeric_limits<double>::infinity();
            for (Index j = 0; j < nb; ++j) {
                worst = std::max(worst, y(q_) - lambda_min_sym(S[j]));
            }
            upper = std::min(upper, worst);
            double tau = 0.0;
            for (Index j = 0; j < nb; ++j) tau += X[j].trace();
            std::vector<Mat> Xh(nb);
            for (Index j = 0; j < nb; ++j) Xh[j] = X[j] / tau;
            const Vec xph = xp / tau, xmh = xm / tau;
            double cert = certificate_bound(Xh, xph, xmh);
            if (cert <= 0.0 && upper > 0.0 && lower <= 0.0) {
                double gap = 0.0;
                for (Index j = 0; j < nb; ++j) gap += (X[j].cwiseProduct(S[j])).sum();
                if (gap < 0.5 * upper) {
                    cert = std::max(cert, polished_bound(Xh, xph, xmh));
                }
            }
            lower = std::max(lower, cert);

            if (worst <= 0.0) {
                SdpOutcome cand;
                finalize_point(cand, x0s_ + offset(y));
                if (verified(cand) && (!have_feasible || cand.worst_violation < best.worst_violation)) {
                    best = cand;
                    have_feasible = true;
                }
            }
            double mu = 0.0;
            for (Index j = 0; j < nb; ++j) mu += (X[j].cwiseProduct(S[j])).sum();
            mu += xp.dot(sp) + xm.dot(sm);
            mu /= nu_;

            if (opt_.log) {
                *opt_.log << "it " << it << " t " << y(q_) << " worst " << worst << " lower " << lower << " mu "
                          << mu << " rp " << (b - apply_A(X, xp, xm)).norm() << " ap " << last_ap_ << " ad " << last_ad_
                          << " |y| " << y.head(q_).cwiseAbs().maxCoeff() << " |X| " << X[0].norm() << " xbox "
                          << xp.sum() + xm.sum() << '\n';
            }
            if (have_feasible && opt_.stop_when_feasible) {
                message = "verified feasible point";
                break;
            }
            if (lower > 0.0 && opt_.stop_when_infeasible) {
                message = "infeasibility certificate";
                break;
            }
            if (upper - lower <= opt_.gap_tol * (1.0 + std::abs(upper))) {
                message = "converged";
                break;
            }
            if (mu * nu_ <= 0.1 * opt_.gap_tol * (1.0 + std::abs(upper))) {
                message = "complementarity below tolerance";
                break;
            }
            if (it == opt_.max_iterations) {
                break;
            }

            for (Index j = 0; j < nb; ++j) {
                Eigen::LLT<Mat> llt(S[j]);
                G[j] = llt.solve(Mat::Identity(S[j].rows(), S[j].cols()));
            }
            // Symmetric diagonal equilibration before the Cholesky factorization.
            Mat H = schur(X, G, xp, sp, xm, sm);
            const Vec dscale = H.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
            H = dscale.asDiagonal() * H * dscale.asDiagonal();
            Eigen::LLT<Mat> llt_h(H);
            double reg = 0.0;
            while (llt_h.info() != Eigen::Success) {
                reg = reg == 0.0 ? 1e-14 : reg * 100.0;
                if (reg > 1e-4) break;
                llt_h.compute(H + reg * Mat::Identity(H.rows(), H.cols()));
            }
            struct {
                const Eigen::LLT<Mat>& f;
                const Vec& d;
                Vec solve(const Vec& r) const { return d.cwiseProduct(f.solve(d.cwiseProduct(r))); }
            } hf{llt_h, dscale};
            if (llt_h.info() != Eigen::Success) {
                message = "Schur complement is not positive definite";
                break;
            }

            const Vec AX = apply_A(X, xp, xm);
            auto direction = [&](const std::vector<Mat>& RcG, const Vec& rp, const Vec& rm, Vec& dy,
                                 std::vector<Mat>& dX, std::vector<Mat>& dS, Vec& dxp, Vec& dsp, Vec& dxm,
                                 Vec& dsm) {
                const Vec rhs = b - AX - apply_A(RcG, rp.cwiseQuotient(sp), rm.cwiseQuotient(sm));
                dy = hf.solve(rhs);
                dX.resize(nb);
                auto recover = [&]() {
                    dS = dual_step(dy);
                    for (Index j = 0; j < nb; ++j) {
                        dX[j] = symmetrize(RcG[j] - X[j] * dS[j] * G[j]);
                    }
                    dsp = -dy.head(q_);
                    dsm = dy.head(q_);
                    dxp = (rp - xp.cwiseProduct(dsp)).cwiseQuotient(sp);
                    dxm = (rm - xm.cwiseProduct(dsm)).cwiseQuotient(sm);
                };
                recover();
                // Iterative refinement against the exact operators: A(X + dX) = b.
                for (int pass = 0; pass < 2; ++pass) {
                    const Vec e = b - AX - apply_A(dX, dxp, dxm);
                    if (e.norm() <= 1e-15 * (1.0 + rhs.norm())) break;
                    dy += hf.solve(e);
                    recover();
                }
            };
            auto steps = [&](const std::vector<Mat>& dX, const std::vector<Mat>& dS, const Vec& dxp, const Vec& dsp,
                             const Vec& dxm, const Vec& dsm, double& ap, double& ad) {
                ap = std::min(max_step_lp(xp, dxp), max_step_lp(xm, dxm));
                ad = std::min(max_step_lp(sp, dsp), max_step_lp(sm, dsm));
                for (Index j = 0; j < nb; ++j) {
                    ap = std::min(ap, max_step(X[j], dX[j]));
                    ad = std::min(ad, max_step(S[j], dS[j]));
                }
            };

            // Predictor.
            std::vector<Mat> RcG(nb);
            for (Index j = 0; j < nb; ++j) RcG[j] = -X[j];
            Vec rp = -xp.cwiseProduct(sp), rm = -xm.cwiseProduct(sm);
            Vec dy;
            std::vector<Mat> dX, dS;
            Vec dxp, dsp, dxm, dsm;
            direction(RcG, rp, rm, dy, dX, dS, dxp, dsp, dxm, dsm);
            double ap = 0.0, ad = 0.0;
            steps(dX, dS, dxp, dsp, dxm, dsm, ap, ad);
            ap = std::min(1.0, ap);
            ad = std::min(1.0, ad);
            double mu_aff = 0.0;
            for (Index j = 0; j < nb; ++j) {
                mu_aff += ((X[j] + ap * dX[j]).cwiseProduct(S[j] + ad * dS[j])).sum();
            }
            mu_aff += (xp + ap * dxp).dot(sp + ad * dsp) + (xm + ap * dxm).dot(sm + ad * dsm);
            mu_aff /= nu_;
            const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

            // Corrector.
            for (Index j = 0; j < nb; ++j) {
                RcG[j] = sigma * mu * G[j] - X[j] - dX[j] * dS[j] * G[j];
            }
            rp = Vec::Constant(q_, sigma * mu) - xp.cwiseProduct(sp) - dxp.cwiseProduct(dsp);
            rm = Vec::Constant(q_, sigma * mu) - xm.cwiseProduct(sm) - dxm.cwiseProduct(dsm);
            direction(RcG, rp, rm, dy, dX, dS, dxp, dsp, dxm, dsm);
            steps(dX, dS, dxp, dsp, dxm, dsm, ap, ad);
            ap = std::min(1.0, 0.95 * ap);
            ad = std::min(1.0, 0.95 * ad);

            last_ap_ = ap;
            last_ad_ = ad;
            for (Index j = 0; j < nb; ++j) X[j] = symmetrize(X[j] + ap * dX[j]);
            xp += ap * dxp;
            xm += ap * dxm;
            // Re-derive the slack from y so the dual stays exactly feasible; back off on round-off.
            bool ok = false;
            for (int tries = 0; tries < 30 && !ok; ++tries) {
                const Vec yn = y + ad * dy;
                std::vector<Mat> Sn = dual_slack(yn);
                ok = true;
                for (Index j = 0; j < nb && ok; ++j) {
                    Eigen::LLT<Mat> llt(Sn[j]);
                    ok = llt.info() == Eigen::Success;
                }
                const Vec spn = Vec::Constant(q_, R) - yn.head(q_);
                const Vec smn = Vec::Constant(q_, R) + yn.head(q_);
                if (q_ > 0) ok = ok && spn.minCoeff() > 0.0 && smn.minCoeff() > 0.0;
                if (ok) {
                    y = yn;
                    S = std::move(Sn);
                    sp = spn;
                    sm = smn;
                } else {
                    ad *= 0.5;
                }
            }
            if (!ok || (ap < 1e-10 && ad < 1e-10)) {
                if (++stalls >= 3 || !ok) {
                    message = "step length collapsed";
                    break;
                }
            } else {
                stalls = 0;
            }
        }

        if (have_feasible) {
            out = best;
            out.status = SdpStatus::Feasible;
        } else {
            finalize_point(out, x0s_ + offset(y));
            if (lower > 0.0) {
                out.status = SdpStatus::Infeasible;
                if (message != "infeasibility certificate") message = "infeasibility certificate; " + message;
            } else {
                out.status = SdpStatus::Inconclusive;
                if (message == "converged" || message == "complementarity below tolerance") message = "optimal violation is at the feasibility boundary";
            }
        }
        out.info.iterations = it;
        out.info.upper_bound = have_feasible ? std::min(upper, best.worst_violation) : upper;
        out.info.lower_bound = lower;
        out.info.message = message;
        return out;
    }

    const SdpProblem& prob_;
    SolverOptions opt_;
    Index p_ = 0;
    Index q_ = 0;
    double nu_ = 0.0;
    Vec scale_;
    Vec x0s_;
    Mat Z_;
    std::vector<Block> blocks_;
    mutable std::vector<std::vector<Mat>> dense_rows_;
    double last_ap_ = 0.0;
    double last_ad_ = 0.0;
};

}  // namespace detail

/**
 * @brief Decides feasibility of the problem's LMIs and equalities.
 *
 * Solves min t s.t. F_j(x) + m_j I <= t I, E(x) = 0 with a primal-dual
 * interior point method (HKM direction, Mehrotra predictor-corrector) over
 * the null space of the equalities. A verdict is Feasible only when a point
 * passes an eigenvalue check on the original blocks, Infeasible only with a
 * dual certificate proving t* > 0 inside the coordinate box, and
 * Inconclusive otherwise.
 */
inline SdpOutcome solve(const SdpProblem& problem, const SolverOptions& options = {}) {
    if (!(options.eps_strict >= 0.0) || !(options.nonstrict_tol >= 0.0) || !(options.box_radius > 0.0)) {
        throw std::invalid_argument("solve: invalid solver options");
    }
    return detail::Ipm(problem, options).run();
}

}  // namespace ddrc::sdp

#endif  // DDRC_SDP_SOLVER_HPP
