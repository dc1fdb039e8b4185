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
#ifndef DDRC_SYNTH_HPP
#define DDRC_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddrc/datamat.hpp"
#include "ddrc/linalg.hpp"
#include "ddrc/noise.hpp"
#include "ddrc/sdp.hpp"

namespace ddrc {

/// Index (Q, S, R) of the supply rate [w; z]^T [Q S; S^T R] [w; z].
struct PerformanceIndex {
    Mat Q;
    Mat S;
    Mat R;

    /// H-infinity bound gamma: (-gamma^2 I, 0, I).
    static PerformanceIndex hinf(double gamma, Index mw, Index pz) {
        if (!(gamma > 0.0)) {
            throw std::invalid_argument("PerformanceIndex::hinf: gamma must be positive");
        }
        return {-gamma * gamma * Mat::Identity(mw, mw), Mat::Zero(mw, pz), Mat::Identity(pz, pz)};
    }

    void validate(Index mw, Index pz) const {
        if (Q.rows() != mw || Q.cols() != mw || S.rows() != mw || S.cols() != pz || R.rows() != pz ||
            R.cols() != pz) {
            throw std::invalid_argument("PerformanceIndex: dimensions do not match the channel");
        }
        const double scale = std::max(1.0, std::max(max_abs(Q), max_abs(R)));
        if (max_abs(Q - Q.transpose()) > 1e-12 * scale || max_abs(R - R.transpose()) > 1e-12 * scale) {
            throw std::invalid_argument("PerformanceIndex: Q and R must be symmetric");
        }
        if (pz > 0 && lambda_min_sym(R) < -1e-12 * scale) {
            throw std::invalid_argument("PerformanceIndex: R must be positive semidefinite");
        }
    }
};

/// Known matrices of the plant: disturbance input and performance output.
struct PlantKnown {
    Mat Bw;
    Mat C;
    Mat Dw;
    Mat D;
};

/**
 * @brief Structured inputs of the transformed synthesis LMI.
 *
 * In transformed variables, the closed loop is x+ = (AY) Y^{-1} x + B_perf w
 * + B_unc w~, z = (CY) Y^{-1} x + D_perf w, with the uncertainty channel
 * w~ = W z~ and z~ = -(E) Y^{-1} x.
 */
struct LmiStructure {
    sdp::Affine Y;
    sdp::Affine AY;
    sdp::Affine CY;
    sdp::Affine E;
    Mat B_perf;
    Mat D_perf;
    Mat B_unc;
};

namespace detail {

// Factor L with L L^T = R, dropping null directions; exact for diagonal R.
inline Mat psd_factor(const Mat& R) {
    const Index p = R.rows();
    const double tol = 1e-12 * std::max(1.0, max_abs(R));
    if (R.isDiagonal(0.0)) {
        std::vector<Index> keep;
        for (Index i = 0; i < p; ++i) {
            if (R(i, i) > tol) keep.push_back(i);
        }
        Mat L = Mat::Zero(p, static_cast<Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) {
            L(keep[k], static_cast<Index>(k)) = std::sqrt(R(keep[k], keep[k]));
        }
        return L;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(R));
    std::vector<Index> keep;
    for (Index i = 0; i < p; ++i) {
        if (es.eigenvalues()(i) > tol) keep.push_back(i);
    }
    Mat L(p, static_cast<Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        L.col(static_cast<Index>(k)) = es.eigenvectors().col(keep[k]) * std::sqrt(es.eigenvalues()(keep[k]));
    }
    return L;
}

inline bool is_positive_definite(const Mat& R) {
    return R.rows() > 0 && lambda_min_sym(R) > 1e-12 * std::max(1.0, max_abs(R));
}

}  // namespace detail

/**
 * @brief Congruence factors for the uncertainty rows.
 *
 * Scaling the uncertainty input rows by `in` and the uncertainty output rows
 * by `out` leaves definiteness unchanged and brings lambda Qw and
 * (lambda Rw)^{-1} to unit size, so eigenvalue margins stay meaningful for
 * tiny noise bounds or extreme multipliers.
 */
struct UncertaintyScaling {
    double in = 1.0;
    double out = 1.0;
};

inline UncertaintyScaling uncertainty_scaling(const DisturbanceSet& set, double lambda) {
    UncertaintyScaling sc;
    const double q = set.Qw().size() > 0 ? set.Qw().cwiseAbs().maxCoeff() : 0.0;
    const double r = set.Rw().cwiseAbs().maxCoeff();
    if (q > 0.0) sc.in = 1.0 / std::sqrt(lambda * q);
    sc.out = std::sqrt(lambda * r);
    return sc;
}

/**
 * @brief Emits the transformed synthesis LMI (required to be negative definite).
 *
 * Block rows: state (Y), performance input, uncertainty input, successor
 * state, performance output, uncertainty output. The performance rows are
 * present when @p perf is given and the uncertainty rows when @p set is
 * given. Without performance and with lambda = 1 this is the robust
 * stabilization LMI; with both it is the robust performance LMI. A singular
 * R is handled through a factor R = L L^T. The uncertainty rows carry the
 * congruence of uncertainty_scaling.
 */
inline sdp::Affine schur_negate(const LmiStructure& s, const PerformanceIndex* perf, const DisturbanceSet* set,
                                double lambda) {
    using sdp::Affine;
    const Index nx = s.Y.rows();
    if (s.Y.cols() != nx || s.AY.rows() != nx || s.AY.cols() != nx) {
        throw std::invalid_argument("schur_negate: Y and AY must be square of the state dimension");
    }
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("schur_negate: lambda must be positive");
    }
    // Rows between the state and successor rows, then rows after the successor.
    struct Row {
        Affine diag;
        Affine first;    // coupling with the state row
        std::optional<Affine> succ;  // coupling with the successor row
    };
    std::vector<Row> rows;

    if (perf) {
        const Index mw = s.B_perf.cols();
        const Index pz = s.CY.rows();
        if (s.B_perf.rows() != nx || s.D_perf.rows() != pz || s.D_perf.cols() != mw || s.CY.cols() != nx) {
            throw std::invalid_argument("schur_negate: performance channel has inconsistent dimensions");
        }
        perf->validate(mw, pz);
        const Mat& Q = perf->Q;
        const Mat& S = perf->S;
        const Mat& R = perf->R;
        const Mat& Dp = s.D_perf;
        const Mat Qbar = symmetrize(Q + S * Dp + Dp.transpose() * S.transpose() + Dp.transpose() * R * Dp);
        rows.push_back({Affine(Qbar), s.CY.transpose() * Mat(R * Dp + S.transpose()),
                        Affine(Mat(s.B_perf.transpose()))});
    }
    if (set) {
        const Index mwu = s.B_unc.cols();
        const Index N = s.E.rows();
        if (s.B_unc.rows() != nx || set->mw() != mwu || set->horizon() != N || s.E.cols() != nx) {
            throw std::invalid_argument("schur_negate: uncertainty channel has inconsistent dimensions");
        }
        const UncertaintyScaling sc = uncertainty_scaling(*set, lambda);
        rows.push_back({Affine(Mat(lambda * sc.in * sc.in * set->Qw())),
                        -(lambda * sc.in) * (s.E.transpose() * Mat(set->Sw().transpose())),
                        Affine(Mat(sc.in * s.B_unc.transpose()))});
    }
    // Successor-state row.
    const std::size_t succ_index = rows.size() + 1;
    std::vector<Row> tail;
    if (perf) {
        const Mat& R = perf->R;
        if (detail::is_positive_definite(R)) {
            tail.push_back({Affine(Mat(-spd_inverse(R))), s.CY.transpose(), std::nullopt});
        } else {
            const Mat L = detail::psd_factor(R);
            if (L.cols() > 0) {
                tail.push_back({Affine(Mat(-Mat::Identity(L.cols(), L.cols()))), s.CY.transpose() * L, std::nullopt});
            }
        }
    }
    if (set) {
        const UncertaintyScaling sc = uncertainty_scaling(*set, lambda);
        tail.push_back({Affine(Mat(-spd_inverse(set->Rw() * (lambda / (sc.out * sc.out))))), sc.out * s.E.transpose(),
                        std::nullopt});
    }

    const std::size_t nb = 1 + rows.size() + 1 + tail.size();
    std::vector<std::vector<std::optional<Affine>>> grid(nb, std::vector<std::optional<Affine>>(nb));
    grid[0][0] = -s.Y;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        grid[i + 1][i + 1] = rows[i].diag;
        grid[0][i + 1] = rows[i].first;
        grid[i + 1][succ_index] = rows[i].succ;
    }
    grid[0][succ_index] = s.AY.transpose();
    grid[succ_index][succ_index] = -s.Y;
    for (std::size_t i = 0; i < tail.size(); ++i) {
        const std::size_t k = succ_index + 1 + i;
        grid[k][k] = tail[i].diag;
        grid[0][k] = tail[i].first;
    }
    return sdp::symmetric_blocks(grid);
}

struct LambdaGrid {
    double lo = 1e-6;
    double hi = 1e6;
    int points = 25;
    /// Grid points are visited by distance from the pivot in log scale; NaN selects the middle.
    double pivot = std::numeric_limits<double>::quiet_NaN();
    /// Golden-section search over the grid range when no grid point is feasible.
    bool refine = true;
    int refine_evaluations = 14;

    std::vector<double> ordered() const {
        if (points < 1 || !(lo > 0.0) || !(hi >= lo)) {
            throw std::invalid_argument("LambdaGrid: need points >= 1 and 0 < lo <= hi");
        }
        std::vector<double> g(static_cast<std::size_t>(points));
        for (int i = 0; i < points; ++i) {
            const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
            g[static_cast<std::size_t>(i)] = std::pow(10.0, std::log10(lo) + f * (std::log10(hi) - std::log10(lo)));
        }
        const double c = std::isnan(pivot) ? 0.5 * (std::log10(lo) + std::log10(hi)) : std::log10(pivot);
        std::stable_sort(g.begin(), g.end(), [c](double a, double b) {
            return std::abs(std::log10(a) - c) < std::abs(std::log10(b) - c);
        });
        return g;
    }
};

struct SynthesisOptions {
    sdp::SolverOptions solver;
    LambdaGrid grid;
    /// Mixed design only: restrict the Lyapunov variable to diag(Y1, Y2).
    bool block_diagonal = false;
};

struct SynthesisDiagnostics {
    int solves = 0;
    int iterations = 0;
    /// Largest eigenvalue of the re-substituted LMI at the returned point.
    double lmi_max_eig = std::numeric_limits<double>::quiet_NaN();
    /// max |X M - Y| relative to 1 + |Y|.
    double equality_residual = std::numeric_limits<double>::quiet_NaN();
    /// Best upper bound on the worst violation (<= 0 when feasible).
    double violation = std::numeric_limits<double>::infinity();
    std::vector<double> lambdas_tried;
    std::string message;
};

struct SynthesisResult {
    sdp::SdpStatus status = sdp::SdpStatus::Inconclusive;
    Mat K;
    Mat Y;
    Mat M;
    std::optional<double> lambda;
    std::optional<double> gamma;
    SynthesisDiagnostics diagnostics;

    bool feasible() const { return status == sdp::SdpStatus::Feasible; }
};

namespace detail {

inline void check_data_and_set(const DataMatrices& dm, const Mat& Bw, const DisturbanceSet& set) {
    dm.validate();
    if (Bw.rows() != dm.n()) {
        throw std::invalid_argument("synthesis: Bw must have n rows");
    }
    if (set.mw() != Bw.cols() || set.horizon() != dm.N()) {
        throw std::invalid_argument("synthesis: disturbance set must be mw x N for the given data and Bw");
    }
}

inline void check_plant(const DataMatrices& dm, const PlantKnown& pk) {
    const Index n = dm.n(), m = dm.m(), mw = pk.Bw.cols(), pz = pk.C.rows();
    if (pk.Bw.rows() != n || pk.C.cols() != n || pk.Dw.rows() != pz || pk.Dw.cols() != mw || pk.D.rows() != pz ||
        pk.D.cols() != m) {
        throw std::invalid_argument("synthesis: known plant matrices have inconsistent dimensions");
    }
}

/// Gain and certificate bookkeeping shared by the data-driven designs.
inline SynthesisResult finish(const sdp::SdpOutcome& out, const sdp::Affine& Yexpr, const sdp::Affine& Mexpr,
                              const Mat& X, const Mat& Xeq_rhs_sel, const Mat& U, double lambda) {
    SynthesisResult r;
    r.status = out.status;
    r.lambda = lambda;
    r.diagnostics.solves = 1;
    r.diagnostics.iterations = out.info.iterations;
    r.diagnostics.violation = out.info.upper_bound;
    r.diagnostics.message = out.info.message;
    r.diagnostics.lambdas_tried = {lambda};
    if (out.x.size() == 0) {
        return r;
    }
    r.Y = symmetrize(out.value(Yexpr));
    r.M = out.value(Mexpr);
    r.diagnostics.lmi_max_eig = out.block_max_eig.empty()
                                    ? std::numeric_limits<double>::quiet_NaN()
                                    : *std::max_element(out.block_max_eig.begin(), out.block_max_eig.end());
    r.diagnostics.equality_residual = max_abs(X * r.M - Xeq_rhs_sel * r.Y) / (1.0 + max_abs(r.Y));
    if (out.status == sdp::SdpStatus::Feasible) {
        Eigen::LLT<Mat> llt(r.Y);
        if (llt.info() != Eigen::Success) {
            r.status = sdp::SdpStatus::Inconclusive;
            r.diagnostics.message = "certificate Y is not positive definite";
            return r;
        }
        r.K = llt.solve((U * r.M).transpose()).transpose();
    }
    return r;
}

}  // namespace detail

/**
 * @brief Robust stabilization from noisy data.
 *
 * Finds Y > 0 and M with the stabilization LMI negative definite and
 * X M = Y, then K = U M Y^{-1}. @p lambda scales the disturbance block; the
 * problem is homogeneous so the default 1 loses nothing.
 */
inline SynthesisResult stabilize(const DataMatrices& dm, const Mat& Bw, const DisturbanceSet& set,
                                 const SynthesisOptions& opts = {}, double lambda = 1.0) {
    detail::check_data_and_set(dm, Bw, set);
    const Index n = dm.n(), N = dm.N();
    sdp::SdpProblem prob;
    const sdp::Affine Y = prob.add_symmetric("Y", n);
    const sdp::Affine M = prob.add_matrix("M", N, n);
    LmiStructure s{Y, dm.X_plus * M, sdp::Affine(0, n), M, Mat(n, 0), Mat(0, 0), Bw};
    prob.add_lmi(schur_negate(s, nullptr, &set, lambda), sdp::Strictness::Strict, "stabilization");
    prob.add_equality(dm.X * M - Y, "X M = Y");
    const sdp::SdpOutcome out = sdp::solve(prob, opts.solver);
    return detail::finish(out, Y, M, dm.X, Mat::Identity(n, n), dm.U, lambda);
}

/**
 * @brief Robust quadratic performance from noisy data at a fixed multiplier.
 */
inline SynthesisResult quad_perf_synthesis(const DataMatrices& dm, const PlantKnown& plant,
                                           const DisturbanceSet& set, const PerformanceIndex& P, double lambda,
                                           const SynthesisOptions& opts = {}) {
    detail::check_data_and_set(dm, plant.Bw, set);
    detail::check_plant(dm, plant);
    P.validate(plant.Bw.cols(), plant.C.rows());
    const Index n = dm.n(), N = dm.N();
    sdp::SdpProblem prob;
    const sdp::Affine Y = prob.add_symmetric("Y", n);
    const sdp::Affine M = prob.add_matrix("M", N, n);
    LmiStructure s{Y, dm.X_plus * M, plant.C * Y + Mat(plant.D * dm.U) * M, M, plant.Bw, plant.Dw, plant.Bw};
    prob.add_lmi(schur_negate(s, &P, &set, lambda), sdp::Strictness::Strict, "performance");
    prob.add_equality(dm.X * M - Y, "X M = Y");
    const sdp::SdpOutcome out = sdp::solve(prob, opts.solver);
    return detail::finish(out, Y, M, dm.X, Mat::Identity(n, n), dm.U, lambda);
}

/// Closure evaluated by the line search; @p to_optimality asks for the optimal violation.
using LambdaClosure = std::function<SynthesisResult(double lambda, bool to_optimality)>;

/**
 * @brief Line search over the multiplier.
 *
 * Returns the first Feasible grid point in pivot order. When the grid is
 * exhausted, an optional golden-section search on log(lambda) minimizes the
 * optimal violation. The result is Infeasible only when every evaluation was
 * certified infeasible, otherwise Inconclusive.
 */
inline SynthesisResult lambda_search(const LambdaClosure& closure, const LambdaGrid& grid) {
    int solves = 0, iterations = 0;
    std::vector<double> tried;
    bool all_infeasible = true;
    SynthesisResult best;
    auto record = [&](double lam, SynthesisResult r) {
        solves += r.diagnostics.solves;
        iterations += r.diagnostics.iterations;
        tried.push_back(lam);
        if (r.status != sdp::SdpStatus::Infeasible) all_infeasible = false;
        if (r.diagnostics.violation < best.diagnostics.violation || tried.size() == 1) best = r;
        return r;
    };
    auto finish = [&](SynthesisResult r) {
        r.diagnostics.solves = solves;
        r.diagnostics.iterations = iterations;
        r.diagnostics.lambdas_tried = tried;
        return r;
    };
    for (double lam : grid.ordered()) {
        SynthesisResult r = record(lam, closure(lam, false));
        if (r.feasible()) {
            return finish(r);
        }
    }
    if (grid.refine && grid.points > 1 && grid.refine_evaluations > 0) {
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = std::log10(grid.lo), b = std::log10(grid.hi);
        double c = b - phi * (b - a), d = a + phi * (b - a);
        auto eval = [&](double lg) -> SynthesisResult { return record(std::pow(10.0, lg), closure(std::pow(10.0, lg), true)); };
        SynthesisResult rc = eval(c);
        if (rc.feasible()) return finish(rc);
        SynthesisResult rd = eval(d);
        if (rd.feasible()) return finish(rd);
        for (int k = 2; k < grid.refine_evaluations; ++k) {
            if (rc.diagnostics.violation <= rd.diagnostics.violation) {
                b = d;
                d = c;
                rd = rc;
                c = b - phi * (b - a);
                rc = eval(c);
                if (rc.feasible()) return finish(rc);
            } else {
                a = c;
                c = d;
                rc = rd;
                d = a + phi * (b - a);
                rd = eval(d);
                if (rd.feasible()) return finish(rd);
            }
        }
    }
    SynthesisResult out = best;
    out.status = all_infeasible ? sdp::SdpStatus::Infeasible : sdp::SdpStatus::Inconclusive;
    out.K = Mat();
    out.diagnostics.message = all_infeasible ? "infeasible at every multiplier tried"
                                             : "no feasible multiplier found; some solves were inconclusive";
    return finish(out);
}

/// Multiplier pivot 1/sqrt(|Qw| |Rw|), which balances the disturbance blocks.
inline double default_lambda_pivot(const DisturbanceSet& set) {
    const double q = sigma_max(set.Qw()), r = sigma_max(set.Rw());
    return q > 0.0 && r > 0.0 ? 1.0 / std::sqrt(q * r) : 1.0;
}

namespace detail {

inline SynthesisOptions with_pivot(SynthesisOptions o, const DisturbanceSet& set) {
    if (std::isnan(o.grid.pivot)) {
        o.grid.pivot = default_lambda_pivot(set);
    }
    return o;
}

inline SynthesisOptions to_optimality(SynthesisOptions o, bool flag) {
    if (flag) {
        o.solver.stop_when_infeasible = false;
    }
    return o;
}

}  // namespace detail

/// Quadratic performance with the multiplier chosen by lambda_search.
inline SynthesisResult quad_perf_search(const DataMatrices& dm, const PlantKnown& plant, const DisturbanceSet& set,
                                        const PerformanceIndex& P, const SynthesisOptions& opts = {}) {
    const SynthesisOptions o = detail::with_pivot(opts, set);
    return lambda_search(
        [&](double lam, bool opt) { return quad_perf_synthesis(dm, plant, set, P, lam, detail::to_optimality(o, opt)); },
        o.grid);
}

struct GammaBracket {
    double lo = 0.1;
    double hi = 10.0;
};

/**
 * @brief Generic gamma bisection around a feasibility oracle.
 *
 * Tries gamma_lo first, expands gamma_hi by 4x up to 10 times until
 * feasible, then bisects until (hi - lo) <= rel_tol * hi.
 */
template <class Oracle>
SynthesisResult gamma_bisection(const Oracle& oracle, GammaBracket bracket, double rel_tol) {
    if (!(bracket.lo > 0.0) || !(bracket.hi > bracket.lo) || !(rel_tol > 0.0)) {
        throw std::invalid_argument("gamma_bisection: need 0 < lo < hi and rel_tol > 0");
    }
    int solves = 0, iterations = 0;
    auto run = [&](double g) {
        SynthesisResult r = oracle(g);
        solves += r.diagnostics.solves;
        iterations += r.diagnostics.iterations;
        r.gamma = g;
        return r;
    };
    auto done = [&](SynthesisResult r) {
        r.diagnostics.solves = solves;
        r.diagnostics.iterations = iterations;
        return r;
    };
    SynthesisResult lo_res = run(bracket.lo);
    if (lo_res.feasible()) {
        return done(lo_res);
    }
    SynthesisResult best = run(bracket.hi);
    int expansions = 0;
    while (!best.feasible() && expansions < 10) {
        bracket.lo = bracket.hi;
        bracket.hi *= 4.0;
        best = run(bracket.hi);
        ++expansions;
    }
    if (!best.feasible()) {
        best.diagnostics.message = "no feasible gamma up to " + std::to_string(bracket.hi);
        best.status = best.status == sdp::SdpStatus::Inconclusive ? sdp::SdpStatus::Inconclusive
                                                                  : sdp::SdpStatus::Infeasible;
        best.gamma.reset();
        return done(best);
    }
    double lo = bracket.lo, hi = bracket.hi;
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        SynthesisResult r = run(mid);
        if (r.feasible()) {
            hi = mid;
            best = r;
        } else {
            lo = mid;
        }
    }
    return done(best);
}

/**
 * @brief Smallest certified H-infinity level from noisy data.
 *
 * Each candidate gamma runs a multiplier line search; the search pivot
 * follows the last successful multiplier.
 */
inline SynthesisResult hinf_optimize(const DataMatrices& dm, const PlantKnown& plant, const DisturbanceSet& set,
                                     GammaBracket bracket = {}, double rel_tol = 1e-2,
                                     const SynthesisOptions& opts = {}) {
    SynthesisOptions o = detail::with_pivot(opts, set);
    const Index mw = plant.Bw.cols(), pz = plant.C.rows();
    auto oracle = [&](double g) {
        SynthesisResult r = quad_perf_search(dm, plant, set, PerformanceIndex::hinf(g, mw, pz), o);
        if (r.feasible() && r.lambda) {
            o.grid.pivot = *r.lambda;
        }
        return r;
    };
    return gamma_bisection(oracle, bracket, rel_tol);
}

/**
 * @brief Plant with a data-driven part (unknown A1, B1) and known parts.
 *
 *   x+  = A1 x + A2 xt + B1 u + Bw1 w
 *   xt+ = A3 x + A4 xt + B2 u + Bw2 w
 *   z   = C1 x + C2 xt + Dw w + D u
 *
 * Data: X, X_plus, U of the x-part and Xt of the known-part state.
 */
struct MixedSystem {
    Mat A2, A3, A4, B2, Bw1, Bw2, C1, C2, Dw, D;
    DataMatrices data;
    Mat Xt;

    Index n() const { return data.n(); }
    Index nt() const { return A4.rows(); }
    Index m() const { return data.m(); }
    Index mw() const { return Bw1.cols(); }
    Index pz() const { return C1.rows(); }

    void validate() const {
        data.validate();
        const Index nx = n(), ntl = nt(), mm = m(), w = mw(), p = pz(), N = data.N();
        auto fail = [](const std::string& s) { throw std::invalid_argument("MixedSystem: " + s); };
        if (A2.rows() != nx || A2.cols() != ntl) fail("A2 must be n x nt");
        if (A3.rows() != ntl || A3.cols() != nx) fail("A3 must be nt x n");
        if (A4.cols() != ntl) fail("A4 must be square");
        if (B2.rows() != ntl || B2.cols() != mm) fail("B2 must be nt x m");
        if (Bw1.rows() != nx) fail("Bw1 must be n x mw");
        if (Bw2.rows() != ntl || Bw2.cols() != w) fail("Bw2 must be nt x mw");
        if (C1.cols() != nx || C2.rows() != p || C2.cols() != ntl) fail("C1, C2 must share pz rows");
        if (Dw.rows() != p || Dw.cols() != w || D.rows() != p || D.cols() != mm) fail("Dw, D shapes");
        if (Xt.rows() != ntl || (Xt.cols() != N && !(Xt.cols() == 0 && max_abs(A2) == 0.0))) {
            fail("Xt must be nt x N (may be empty when A2 = 0)");
        }
    }
};

/// Closed-loop LFT blocks of the mixed system for given G1, G2.
struct MixedLft {
    Mat A;       // (n+nt) x (n+nt)
    Mat B_perf;  // (n+nt) x mw
    Mat B_unc;   // (n+nt) x mw
    Mat C;       // pz x (n+nt)
    Mat D_perf;  // pz x mw
    Mat E;       // N x (n+nt): uncertainty output z~ = E x
};

/**
 * @brief Assembles the mixed closed-loop LFT from known blocks and data.
 *
 * Requires X G1 = I and X G2 = 0 (to 1e-8); the gains are U [G1 G2]. Xt is
 * only read when A2 is nonzero.
 */
inline MixedLft mixed_lft_assemble(const MixedSystem& ms, const Mat& G1, const Mat& G2) {
    ms.validate();
    const Index n = ms.n(), nt = ms.nt(), N = ms.data.N();
    if (G1.rows() != N || G1.cols() != n || G2.rows() != N || G2.cols() != nt) {
        throw std::invalid_argument("mixed_lft_assemble: G1 must be N x n and G2 N x nt");
    }
    const double tol = 1e-8 * std::max(1.0, max_abs(ms.data.X));
    if (max_abs(ms.data.X * G1 - Mat::Identity(n, n)) > tol || (nt > 0 && max_abs(ms.data.X * G2) > tol)) {
        throw std::invalid_argument("mixed_lft_assemble: need X G1 = I and X G2 = 0");
    }
    const bool a2 = max_abs(ms.A2) > 0.0;
    const Mat Xs = a2 ? Mat(ms.data.X_plus - ms.A2 * ms.Xt) : ms.data.X_plus;
    const Mat K1 = ms.data.U * G1, K2 = ms.data.U * G2;
    MixedLft l;
    l.A.resize(n + nt, n + nt);
    l.A << Xs * G1, ms.A2 + Xs * G2, ms.A3 + ms.B2 * K1, ms.A4 + ms.B2 * K2;
    l.B_perf.resize(n + nt, ms.mw());
    l.B_perf << ms.Bw1, ms.Bw2;
    l.B_unc.resize(n + nt, ms.mw());
    l.B_unc << ms.Bw1, Mat::Zero(nt, ms.mw());
    l.C.resize(ms.pz(), n + nt);
    l.C << ms.C1 + ms.D * K1, ms.C2 + ms.D * K2;
    l.D_perf = ms.Dw;
    l.E.resize(N, n + nt);
    l.E << -G1, -G2;
    return l;
}

struct MixedResult {
    SynthesisResult result;  // K holds [K1 K2]
    Mat K1;
    Mat K2;
};

/**
 * @brief Robust performance design for the mixed system at a fixed multiplier.
 *
 * Uses Y = [Y11 Y12; Y12^T Y22] (or block diagonal on request) and
 * M = [G1 G2] Y, so the structural equalities read X M = [Y11 Y12] and the
 * closed-loop blocks stay affine in (Y, M).
 */
inline MixedResult mixed_synthesis_at(const MixedSystem& ms, const DisturbanceSet& set, const PerformanceIndex& P,
                                      double lambda, const SynthesisOptions& opts = {}) {
    ms.validate();
    const Index n = ms.n(), nt = ms.nt(), N = ms.data.N(), nx = n + nt;
    if (N < nx) {
        throw std::invalid_argument("mixed_synthesis: need N >= n + nt (N = " + std::to_string(N) + ", n + nt = " +
                                    std::to_string(nx) + ")");
    }
    if (rank(ms.data.X) < n) {
        throw std::invalid_argument("mixed_synthesis: X must have full row rank");
    }
    detail::check_data_and_set(ms.data, ms.Bw1, set);
    P.validate(ms.mw(), ms.pz());

    sdp::SdpProblem prob;
    sdp::Affine Y;
    if (opts.block_diagonal && nt > 0) {
        const sdp::Affine Y1 = prob.add_symmetric("Y1", n);
        const sdp::Affine Y2 = prob.add_symmetric("Y2", nt);
        Y = sdp::concat({{Y1, sdp::Affine(n, nt)}, {sdp::Affine(nt, n), Y2}});
    } else {
        Y = prob.add_symmetric("Y", nx);
    }
    const sdp::Affine M = prob.add_matrix("M", N, nx);
    const bool a2 = max_abs(ms.A2) > 0.0;
    const Mat Xs = a2 ? Mat(ms.data.X_plus - ms.A2 * ms.Xt) : ms.data.X_plus;
    Mat top_sel = Mat::Zero(n, nx);
    top_sel.leftCols(n) = Mat::Identity(n, n);
    Mat bottom_sel = Mat::Zero(nt, nx);
    bottom_sel.rightCols(nt) = Mat::Identity(nt, nt);
    Mat A34(nt, nx);
    A34 << ms.A3, ms.A4;

    sdp::Affine AY_top = Xs * M;
    if (a2) {
        AY_top += ms.A2 * (bottom_sel * Y);
    }
    const sdp::Affine AY = nt > 0 ? sdp::concat({{AY_top}, {A34 * Y + Mat(ms.B2 * ms.data.U) * M}}) : AY_top;
    Mat C12(ms.pz(), nx);
    C12 << ms.C1, ms.C2;
    const sdp::Affine CY = C12 * Y + Mat(ms.D * ms.data.U) * M;
    Mat Bp(nx, ms.mw()), Bu(nx, ms.mw());
    Bp << ms.Bw1, ms.Bw2;
    Bu << ms.Bw1, Mat::Zero(nt, ms.mw());
    LmiStructure s{Y, AY, CY, M, Bp, ms.Dw, Bu};
    prob.add_lmi(schur_negate(s, &P, &set, lambda), sdp::Strictness::Strict, "mixed performance");
    prob.add_equality(ms.data.X * M - top_sel * Y, "X M = [Y11 Y12]");
    const sdp::SdpOutcome out = sdp::solve(prob, opts.solver);

    MixedResult mr;
    mr.result = detail::finish(out, Y, M, ms.data.X, top_sel, ms.data.U, lambda);
    if (mr.result.feasible()) {
        mr.K1 = mr.result.K.leftCols(n);
        mr.K2 = mr.result.K.rightCols(nt);
    }
    return mr;
}

/// Mixed design with the multiplier chosen by lambda_search.
inline MixedResult mixed_synthesis(const MixedSystem& ms, const DisturbanceSet& set, const PerformanceIndex& P,
                                   const SynthesisOptions& opts = {}) {
    const SynthesisOptions o = detail::with_pivot(opts, set);
    SynthesisResult r = lambda_search(
        [&](double lam, bool opt) {
            return mixed_synthesis_at(ms, set, P, lam, detail::to_optimality(o, opt)).result;
        },
        o.grid);
    MixedResult mr;
    mr.result = r;
    if (r.feasible()) {
        mr.K1 = r.K.leftCols(ms.n());
        mr.K2 = r.K.rightCols(ms.nt());
    }
    return mr;
}

}  // namespace ddrc

#endif  // DDRC_SYNTH_HPP
