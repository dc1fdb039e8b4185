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
#ifndef DDRC_VERIFY_HPP
#define DDRC_VERIFY_HPP

#include <algorithm>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ddrc/datamat.hpp"
#include "ddrc/linalg.hpp"
#include "ddrc/lti.hpp"
#include "ddrc/noise.hpp"
#include "ddrc/sdp.hpp"
#include "ddrc/synth.hpp"

namespace ddrc {

/// Closed loop x+ = A x + Bw w, z = C x + Dw w.
struct ClosedLoop {
    Mat A;
    Mat Bw;
    Mat C;
    Mat Dw;

    Index n() const { return A.rows(); }
    Index mw() const { return Bw.cols(); }
    Index pz() const { return C.rows(); }

    void validate() const {
        if (A.rows() != A.cols() || Bw.rows() != n() || C.cols() != n() || Dw.rows() != pz() || Dw.cols() != mw()) {
            throw std::invalid_argument("ClosedLoop: inconsistent dimensions");
        }
    }
};

/// Closed loop of the plant under u = K x.
inline ClosedLoop closed_loop(const LtiSystem& sys, const Mat& K) {
    if (K.rows() != sys.B.cols() || K.cols() != sys.A.rows()) {
        throw std::invalid_argument("closed_loop: K must be m x n");
    }
    return {sys.A + sys.B * K, sys.Bw, sys.C + sys.D * K, sys.Dw};
}

// ---------------------------------------------------------------------------
// Quadratic performance analysis
// ---------------------------------------------------------------------------

struct AnalysisOptions {
    /// Required strictness, relative to the data scale.
    double margin = 1e-8;
    sdp::SolverOptions solver;
};

struct AnalysisResult {
    sdp::SdpStatus status = sdp::SdpStatus::Inconclusive;
    Mat X;
    double lmi_max_eig = std::numeric_limits<double>::quiet_NaN();
    std::string message;

    bool holds() const { return status == sdp::SdpStatus::Feasible; }
};

namespace detail {

/// Dissipation inequality matrix for a given X.
inline Mat dissipation_matrix(const ClosedLoop& cl, const PerformanceIndex& P, const Mat& X) {
    const Mat& A = cl.A;
    const Mat& B = cl.Bw;
    const Mat& C = cl.C;
    const Mat& D = cl.Dw;
    const Index n = cl.n(), w = cl.mw();
    Mat L(n + w, n + w);
    L.topLeftCorner(n, n) = A.transpose() * X * A - X + C.transpose() * P.R * C;
    L.topRightCorner(n, w) = A.transpose() * X * B + C.transpose() * P.S.transpose() + C.transpose() * P.R * D;
    L.bottomLeftCorner(w, n) = L.topRightCorner(n, w).transpose();
    L.bottomRightCorner(w, w) = B.transpose() * X * B + P.Q + P.S * D + D.transpose() * P.S.transpose() +
                                D.transpose() * P.R * D;
    return symmetrize(L);
}

inline double analysis_scale(const ClosedLoop& cl, const PerformanceIndex& P) {
    return std::max({1.0, max_abs(P.Q), max_abs(P.S), max_abs(P.R)});
}

}  // namespace detail

/**
 * @brief Quadratic performance of a closed loop via the dissipation LMI.
 *
 * Searches X > 0 with the dissipation matrix negative definite, both with
 * margin opts.margin times the data scale. An unstable A is rejected
 * without a solve.
 */
inline AnalysisResult quadratic_performance_analysis(const ClosedLoop& cl, const PerformanceIndex& P,
                                                     const AnalysisOptions& opts = {}) {
    cl.validate();
    P.validate(cl.mw(), cl.pz());
    AnalysisResult res;
    if (spectral_radius(cl.A) >= 1.0) {
        res.status = sdp::SdpStatus::Infeasible;
        res.message = "closed loop is not stable";
        return res;
    }
    const Index n = cl.n(), w = cl.mw();
    sdp::SdpProblem prob;
    const sdp::Affine X = prob.add_symmetric("X", n);
    const sdp::Affine AX = cl.A.transpose() * X;
    const sdp::Affine top_left = AX * cl.A - X + sdp::Affine(Mat(cl.C.transpose() * P.R * cl.C));
    const sdp::Affine top_right =
        AX * cl.Bw + sdp::Affine(Mat(cl.C.transpose() * P.S.transpose() + cl.C.transpose() * P.R * cl.Dw));
    const sdp::Affine bottom = cl.Bw.transpose() * X * cl.Bw +
                               sdp::Affine(symmetrize(P.Q + P.S * cl.Dw + cl.Dw.transpose() * P.S.transpose() +
                                                      cl.Dw.transpose() * P.R * cl.Dw));
    const sdp::Affine L = w > 0 ? sdp::concat({{top_left, top_right}, {top_right.transpose(), bottom}}) : top_left;
    prob.add_lmi(-X, sdp::Strictness::Strict, "X > 0");
    prob.add_lmi(L, sdp::Strictness::Strict, "dissipation");
    sdp::SolverOptions so = opts.solver;
    so.eps_strict = opts.margin * detail::analysis_scale(cl, P);
    const sdp::SdpOutcome out = sdp::solve(prob, so);
    res.status = out.status;
    res.message = out.info.message;
    if (out.status == sdp::SdpStatus::Feasible) {
        res.X = symmetrize(out.value(X));
        res.lmi_max_eig = std::max(lambda_max_sym(detail::dissipation_matrix(cl, P, res.X)), -lambda_min_sym(res.X));
        if (!(res.lmi_max_eig < 0.0)) {
            res.status = sdp::SdpStatus::Inconclusive;
            res.message = "re-substituted dissipation matrix is not negative definite";
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// H-infinity norm
// ---------------------------------------------------------------------------

/// Largest singular value of C (e^{j theta} I - A)^{-1} Bw + Dw.
inline double frequency_gain(const ClosedLoop& cl, double theta) {
    using Cplx = std::complex<double>;
    using CMat = Eigen::MatrixXcd;
    const Cplx z = std::polar(1.0, theta);
    CMat T = -cl.A.cast<Cplx>();
    T.diagonal().array() += z;
    const CMat G = cl.C.cast<Cplx>() * T.partialPivLu().solve(cl.Bw.cast<Cplx>()) + cl.Dw.cast<Cplx>();
    if (G.size() == 0) return 0.0;
    return Eigen::JacobiSVD<CMat>(G).singularValues()(0);
}

struct GridPeak {
    double gain = 0.0;
    double theta = 0.0;
};

/**
 * @brief Peak gain on a uniform grid of [0, pi] with golden-section
 * refinement around the best local maxima.
 */
inline GridPeak hinf_norm_grid(const ClosedLoop& cl, int points = 2048, int refine_peaks = 3) {
    cl.validate();
    if (points < 2) {
        throw std::invalid_argument("hinf_norm_grid: need at least two grid points");
    }
    const double pi = 3.14159265358979323846;
    std::vector<double> g(static_cast<std::size_t>(points));
    const double h = pi / (points - 1);
    for (int k = 0; k < points; ++k) g[static_cast<std::size_t>(k)] = frequency_gain(cl, k * h);
    std::vector<int> peaks;
    for (int k = 0; k < points; ++k) {
        const double left = k > 0 ? g[static_cast<std::size_t>(k - 1)] : -1.0;
        const double right = k + 1 < points ? g[static_cast<std::size_t>(k + 1)] : -1.0;
        if (g[static_cast<std::size_t>(k)] >= left && g[static_cast<std::size_t>(k)] >= right) peaks.push_back(k);
    }
    std::sort(peaks.begin(), peaks.end(),
              [&](int a, int b) { return g[static_cast<std::size_t>(a)] > g[static_cast<std::size_t>(b)]; });
    GridPeak best;
    for (int k = 0; k < points; ++k) {
        if (g[static_cast<std::size_t>(k)] > best.gain) best = {g[static_cast<std::size_t>(k)], k * h};
    }
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (std::size_t p = 0; p < peaks.size() && static_cast<int>(p) < refine_peaks; ++p) {
        double a = std::max(0.0, (peaks[p] - 1) * h), b = std::min(pi, (peaks[p] + 1) * h);
        double c = b - phi * (b - a), d = a + phi * (b - a);
        double fc = frequency_gain(cl, c), fd = frequency_gain(cl, d);
        while (b - a > 1e-12) {
            if (fc >= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = frequency_gain(cl, c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = frequency_gain(cl, d);
            }
        }
        const double t = 0.5 * (a + b);
        const double ft = frequency_gain(cl, t);
        if (ft > best.gain) best = {ft, t};
    }
    return best;
}

/**
 * @brief H-infinity norm by a level-set iteration.
 *
 * The loop is mapped to continuous time by z = (1 + s) / (1 - s); at each
 * level the imaginary-axis eigenvalues of the Hamiltonian give the
 * frequency intervals where the gain exceeds the level, and the next level
 * is the largest gain at their midpoints. Returns an upper bound within
 * relative 2 tol of the norm.
 */
inline double hinf_norm_levelset(const ClosedLoop& cl, double tol = 1e-6) {
    cl.validate();
    if (spectral_radius(cl.A) >= 1.0) {
        throw std::invalid_argument("hinf_norm_levelset: closed loop is not stable");
    }
    const Index n = cl.n(), w = cl.mw(), p = cl.pz();
    if (w == 0 || p == 0) return 0.0;
    const Mat I = Mat::Identity(n, n);
    const Eigen::PartialPivLU<Mat> lu(cl.A + I);
    const Mat Ac = lu.solve(cl.A - I);
    const Mat Bc = std::sqrt(2.0) * lu.solve(cl.Bw);
    const Mat Cc = std::sqrt(2.0) * cl.C * lu.inverse();
    const Mat Dc = cl.Dw - cl.C * lu.solve(cl.Bw);
    auto theta_of = [](double omega) { return 2.0 * std::atan(omega); };

    double lower = std::max(frequency_gain(cl, 0.0), frequency_gain(cl, 3.14159265358979323846));
    const Eigen::VectorXcd poles = eigenvalues(cl.A);
    for (Index i = 0; i < poles.size(); ++i) {
        lower = std::max(lower, frequency_gain(cl, std::abs(std::arg(poles(i)))));
    }
    if (lower == 0.0) {
        lower = std::max(lower, frequency_gain(cl, 1.0));
        if (lower == 0.0) return 0.0;
    }
    for (int iter = 0; iter < 100; ++iter) {
        const double gamma = (1.0 + 2.0 * tol) * lower;
        const Mat R = Dc.transpose() * Dc - gamma * gamma * Mat::Identity(w, w);
        const Mat S = Dc * Dc.transpose() - gamma * gamma * Mat::Identity(p, p);
        const Mat Ri = R.inverse();
        const Mat Si = S.inverse();
        Mat H(2 * n, 2 * n);
        H.topLeftCorner(n, n) = Ac - Bc * Ri * Dc.transpose() * Cc;
        H.topRightCorner(n, n) = -gamma * Bc * Ri * Bc.transpose();
        H.bottomLeftCorner(n, n) = gamma * Cc.transpose() * Si * Cc;
        H.bottomRightCorner(n, n) = -Ac.transpose() + Cc.transpose() * Dc * Ri * Bc.transpose();
        const Eigen::VectorXcd ev = eigenvalues(H);
        const double hscale = std::max(1.0, H.cwiseAbs().maxCoeff());
        std::vector<double> omegas;
        for (Index i = 0; i < ev.size(); ++i) {
            if (std::abs(ev(i).real()) <= 1e-8 * hscale * std::max(1.0, std::abs(ev(i))) && ev(i).imag() >= 0.0) {
                omegas.push_back(ev(i).imag());
            }
        }
        if (omegas.empty()) {
            return gamma;
        }
        std::sort(omegas.begin(), omegas.end());
        double next = lower;
        if (omegas.size() == 1) {
            next = std::max(next, frequency_gain(cl, theta_of(omegas.front())));
        }
        for (std::size_t i = 0; i + 1 < omegas.size(); ++i) {
            next = std::max(next, frequency_gain(cl, theta_of(0.5 * (omegas[i] + omegas[i + 1]))));
        }
        if (next <= lower * (1.0 + 1e-12)) {
            // Touching eigenvalues without a gain above the level: converged to tolerance.
            return gamma;
        }
        lower = next;
    }
    return (1.0 + 2.0 * tol) * lower;
}

struct HinfNorm {
    /// Upper end of the final LMI bracket (a level at which the analysis LMI is feasible).
    double value = std::numeric_limits<double>::quiet_NaN();
    /// Lower end of the final LMI bracket.
    double lmi_lower = std::numeric_limits<double>::quiet_NaN();
    /// Frequency-grid estimate and its peak frequency.
    double grid = std::numeric_limits<double>::quiet_NaN();
    double theta = std::numeric_limits<double>::quiet_NaN();
    int solves = 0;
};

/**
 * @brief H-infinity norm by bisection on the analysis LMI, seeded and
 * cross-checked by the frequency grid.
 */
inline HinfNorm hinf_norm_detailed(const ClosedLoop& cl, double tol = 1e-3, const AnalysisOptions& opts = {}) {
    cl.validate();
    if (!(tol > 0.0)) {
        throw std::invalid_argument("hinf_norm: tol must be positive");
    }
    if (spectral_radius(cl.A) >= 1.0) {
        throw std::invalid_argument("hinf_norm: closed loop is not stable");
    }
    HinfNorm out;
    const GridPeak peak = hinf_norm_grid(cl);
    out.grid = peak.gain;
    out.theta = peak.theta;
    const Index w = cl.mw(), p = cl.pz();
    auto feasible = [&](double g) {
        ++out.solves;
        return quadratic_performance_analysis(cl, PerformanceIndex::hinf(g, w, p), opts).holds();
    };
    const double floor_level = 1e-9;
    double lo = std::max(floor_level, peak.gain * (1.0 - 0.5 * tol));
    double hi = std::max(2.0 * floor_level, peak.gain * (1.0 + 0.5 * tol));
    int guard = 0;
    while (!feasible(hi)) {
        lo = hi;
        hi *= 1.0 + std::max(tol, 0.05 * std::pow(2.0, guard));
        if (++guard > 60) {
            throw std::runtime_error("hinf_norm: analysis LMI infeasible at every tested level");
        }
    }
    guard = 0;
    while (lo > floor_level && feasible(lo)) {
        hi = lo;
        lo = std::max(floor_level, lo * (1.0 - std::max(tol, 0.05 * std::pow(2.0, guard))));
        if (++guard > 60) break;
    }
    if (lo <= floor_level && hi <= 2.0 * floor_level) {
        out.value = hi;
        out.lmi_lower = 0.0;
        return out;
    }
    while (hi - lo > tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    out.value = hi;
    out.lmi_lower = lo;
    return out;
}

inline double hinf_norm(const ClosedLoop& cl, double tol = 1e-3) { return hinf_norm_detailed(cl, tol).value; }

// ---------------------------------------------------------------------------
// Certificate re-substitution
// ---------------------------------------------------------------------------

/**
 * @brief Numeric synthesis LMI for given values, assembled without the
 * affine machinery. Block order: state, performance input, uncertainty
 * input, successor, performance output, uncertainty output.
 */
inline Mat robust_lmi_matrix(const Mat& Y, const Mat& AY, const Mat& CY, const Mat& E, const Mat& Bp, const Mat& Dp,
                             const Mat& Bu, const PerformanceIndex* P, const DisturbanceSet* set, double lambda) {
    const Index n = Y.rows();
    const Index w = P ? Bp.cols() : 0;
    const Index wu = set ? Bu.cols() : 0;
    Mat Rfac;
    if (P) {
        Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(P->R));
        std::vector<Index> pos;
        for (Index i = 0; i < es.eigenvalues().size(); ++i) {
            if (es.eigenvalues()(i) > 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff())) pos.push_back(i);
        }
        Rfac.resize(P->R.rows(), static_cast<Index>(pos.size()));
        for (std::size_t k = 0; k < pos.size(); ++k) {
            Rfac.col(static_cast<Index>(k)) = es.eigenvectors().col(pos[k]) * std::sqrt(es.eigenvalues()(pos[k]));
        }
    }
    const Index r = P ? Rfac.cols() : 0;
    const Index Ncols = set ? E.rows() : 0;
    const Index total = n + w + wu + n + r + Ncols;
    Mat F = Mat::Zero(total, total);
    const Index o_w = n, o_u = n + w, o_s = n + w + wu, o_z = o_s + n, o_e = o_z + r;
    F.block(0, 0, n, n) = -Y;
    F.block(0, o_s, n, n) = AY.transpose();
    F.block(o_s, o_s, n, n) = -Y;
    if (P) {
        const Mat& Q = P->Q;
        const Mat& S = P->S;
        const Mat& R = P->R;
        F.block(0, o_w, n, w) = CY.transpose() * (R * Dp + S.transpose());
        F.block(o_w, o_w, w, w) = Q + S * Dp + Dp.transpose() * S.transpose() + Dp.transpose() * R * Dp;
        F.block(o_w, o_s, w, n) = Bp.transpose();
        F.block(0, o_z, n, r) = CY.transpose() * Rfac;
        F.block(o_z, o_z, r, r) = -Mat::Identity(r, r);
    }
    if (set) {
        // Same congruence as the synthesis side; definiteness is unaffected.
        const double q = set->Qw().cwiseAbs().maxCoeff(), rw = set->Rw().cwiseAbs().maxCoeff();
        const double si = q > 0.0 ? 1.0 / std::sqrt(lambda * q) : 1.0, so = std::sqrt(lambda * rw);
        F.block(0, o_u, n, wu) = -(lambda * si) * E.transpose() * set->Sw().transpose();
        F.block(o_u, o_u, wu, wu) = (lambda * si * si) * set->Qw();
        F.block(o_u, o_s, wu, n) = si * Bu.transpose();
        F.block(0, o_e, n, Ncols) = so * E.transpose();
        F.block(o_e, o_e, Ncols, Ncols) = -(set->Rw() / rw).inverse();
    }
    Mat full = F.triangularView<Eigen::Upper>();
    full += F.triangularView<Eigen::StrictlyUpper>().transpose();
    return full;
}

struct CertificateCheck {
    double lmi_max_eig = std::numeric_limits<double>::quiet_NaN();
    double y_min_eig = std::numeric_limits<double>::quiet_NaN();
    /// max |X M - Y| over the structural equality.
    double equality_residual = std::numeric_limits<double>::quiet_NaN();
    /// max |K - U M Y^{-1}|.
    double gain_residual = std::numeric_limits<double>::quiet_NaN();

    bool passes(double margin, double equality_tol = 1e-6) const {
        return lmi_max_eig <= -margin && y_min_eig > 0.0 && equality_residual <= equality_tol;
    }
};

/// Re-substitutes a data-driven certificate (stabilization when @p plant is null).
inline CertificateCheck check_certificate(const SynthesisResult& r, const DataMatrices& dm, const Mat& Bw,
                                          const DisturbanceSet& set, const PlantKnown* plant = nullptr,
                                          const PerformanceIndex* P = nullptr) {
    if (r.Y.size() == 0 || r.M.size() == 0) {
        throw std::invalid_argument("check_certificate: result carries no certificate");
    }
    const double lambda = r.lambda.value_or(1.0);
    CertificateCheck c;
    c.y_min_eig = lambda_min_sym(r.Y);
    c.equality_residual = max_abs(dm.X * r.M - r.Y);
    if (r.K.size() > 0) {
        c.gain_residual = max_abs(r.K - dm.U * r.M * r.Y.inverse());
    }
    const Mat AY = dm.X_plus * r.M;
    if (plant && P) {
        const Mat CY = plant->C * r.Y + plant->D * dm.U * r.M;
        c.lmi_max_eig =
            lambda_max_sym(robust_lmi_matrix(r.Y, AY, CY, r.M, plant->Bw, plant->Dw, plant->Bw, P, &set, lambda));
    } else {
        c.lmi_max_eig = lambda_max_sym(
            robust_lmi_matrix(r.Y, AY, Mat(0, r.Y.rows()), r.M, Mat(), Mat(), Bw, nullptr, &set, lambda));
    }
    return c;
}

/// Re-substitutes a mixed-design certificate.
inline CertificateCheck check_mixed_certificate(const MixedResult& mr, const MixedSystem& ms,
                                                const DisturbanceSet& set, const PerformanceIndex& P) {
    const SynthesisResult& r = mr.result;
    if (r.Y.size() == 0 || r.M.size() == 0) {
        throw std::invalid_argument("check_mixed_certificate: result carries no certificate");
    }
    const Index n = ms.n(), nt = ms.nt(), nx = n + nt;
    const double lambda = r.lambda.value_or(1.0);
    const Mat& Y = r.Y;
    const Mat& M = r.M;
    const bool a2 = max_abs(ms.A2) > 0.0;
    const Mat Xs = a2 ? Mat(ms.data.X_plus - ms.A2 * ms.Xt) : ms.data.X_plus;
    Mat AY(nx, nx);
    AY.topRows(n) = Xs * M + ms.A2 * Y.bottomRows(nt);
    if (nt > 0) {
        Mat A34(nt, nx);
        A34 << ms.A3, ms.A4;
        AY.bottomRows(nt) = A34 * Y + ms.B2 * ms.data.U * M;
    }
    Mat C12(ms.pz(), nx);
    C12 << ms.C1, ms.C2;
    const Mat CY = C12 * Y + ms.D * ms.data.U * M;
    Mat Bp(nx, ms.mw()), Bu(nx, ms.mw());
    Bp << ms.Bw1, ms.Bw2;
    Bu << ms.Bw1, Mat::Zero(nt, ms.mw());
    CertificateCheck c;
    c.y_min_eig = lambda_min_sym(Y);
    c.equality_residual = max_abs(ms.data.X * M - Y.topRows(n));
    if (r.K.size() > 0) {
        c.gain_residual = max_abs(r.K - ms.data.U * M * Y.inverse());
    }
    c.lmi_max_eig = lambda_max_sym(robust_lmi_matrix(Y, AY, CY, M, Bp, ms.Dw, Bu, &P, &set, lambda));
    return c;
}

// ---------------------------------------------------------------------------
// Model-based baseline
// ---------------------------------------------------------------------------

/// Model-based H-infinity state feedback at a fixed level: Y > 0, M with K = M Y^{-1}.
inline SynthesisResult nominal_hinf_at(const LtiSystem& sys, double gamma, const sdp::SolverOptions& so = {}) {
    const Index n = sys.A.rows(), m = sys.B.cols();
    sdp::SdpProblem prob;
    const sdp::Affine Y = prob.add_symmetric("Y", n);
    const sdp::Affine M = prob.add_matrix("M", m, n);
    const PerformanceIndex P = PerformanceIndex::hinf(gamma, sys.Bw.cols(), sys.C.rows());
    LmiStructure s{Y, sys.A * Y + sys.B * M, sys.C * Y + sys.D * M, sdp::Affine(0, n), sys.Bw, sys.Dw, Mat(n, 0)};
    prob.add_lmi(schur_negate(s, &P, nullptr, 1.0), sdp::Strictness::Strict, "nominal performance");
    const sdp::SdpOutcome out = sdp::solve(prob, so);
    SynthesisResult r;
    r.status = out.status;
    r.gamma = gamma;
    r.diagnostics.solves = 1;
    r.diagnostics.iterations = out.info.iterations;
    r.diagnostics.violation = out.info.upper_bound;
    r.diagnostics.message = out.info.message;
    if (out.status == sdp::SdpStatus::Feasible) {
        r.Y = symmetrize(out.value(Y));
        r.M = out.value(M);
        const Mat F = robust_lmi_matrix(r.Y, sys.A * r.Y + sys.B * r.M, sys.C * r.Y + sys.D * r.M, Mat(0, n), sys.Bw,
                                        sys.Dw, Mat(n, 0), &P, nullptr, 1.0);
        r.diagnostics.lmi_max_eig = lambda_max_sym(F);
        Eigen::LLT<Mat> llt(r.Y);
        if (llt.info() != Eigen::Success || !(r.diagnostics.lmi_max_eig < 0.0)) {
            r.status = sdp::SdpStatus::Inconclusive;
            r.diagnostics.message = "nominal certificate failed re-substitution";
            return r;
        }
        r.K = llt.solve(r.M.transpose()).transpose();
    }
    return r;
}

/**
 * @brief Smallest model-based H-infinity level by bisection to relative tol.
 */
inline SynthesisResult nominal_hinf_baseline(const LtiSystem& sys, double tol = 1e-3, GammaBracket bracket = {},
                                             const sdp::SolverOptions& so = {}) {
    sys.validate();
    return gamma_bisection([&](double g) { return nominal_hinf_at(sys, g, so); }, bracket, tol);
}

// ---------------------------------------------------------------------------
// Robust audit
// ---------------------------------------------------------------------------

struct AuditOptions {
    std::size_t samples = 500;
    std::uint64_t seed = 1;
    /// Draw half of the samples on the boundary of the disturbance set.
    bool boundary_biased = true;
    double hinf_tol = 1e-6;
};

struct AuditReport {
    std::size_t samples = 0;
    std::size_t stable = 0;
    std::size_t performance_checked = 0;
    std::size_t performance_pass = 0;
    double max_rho = 0.0;
    double max_hinf = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> gamma;
    std::optional<CertificateCheck> certificate;
    std::string message;

    double stable_fraction() const { return samples ? static_cast<double>(stable) / samples : 0.0; }
    double performance_fraction() const {
        return performance_checked ? static_cast<double>(performance_pass) / performance_checked
                                   : std::numeric_limits<double>::quiet_NaN();
    }
    bool passed() const {
        return samples > 0 && stable == samples && performance_pass == performance_checked;
    }
};

namespace detail {

inline bool is_hinf_index(const PerformanceIndex& P, double& gamma) {
    if (P.S.size() > 0 && max_abs(P.S) != 0.0) return false;
    if (!P.R.isIdentity(0.0)) return false;
    const double q = -P.Q(0, 0);
    if (!(q > 0.0) || max_abs(P.Q + q * Mat::Identity(P.Q.rows(), P.Q.cols())) != 0.0) return false;
    gamma = std::sqrt(q);
    return true;
}

}  // namespace detail

namespace detail {

/// Shared sampling loop; @p loop_of maps a sampled W to a closed-loop A.
template <class LoopOf>
AuditReport audit_loop(const DataMatrices& dm, const PlantKnown& plant, const DisturbanceSet& set,
                       const PerformanceIndex* P, const Mat& K, const AuditOptions& opts, LoopOf loop_of) {
    AuditReport rep;
    const DisturbanceSampler sampler(dm, plant.Bw, set);
    std::mt19937_64 rng(opts.seed);
    const bool with_perf = P != nullptr && plant.C.size() > 0;
    double gamma = 0.0;
    const bool hinf = with_perf && is_hinf_index(*P, gamma);
    if (hinf) rep.gamma = gamma;
    if (hinf) rep.max_hinf = 0.0;
    const Mat Ccl = with_perf ? Mat(plant.C + plant.D * K) : Mat();
    for (std::size_t s = 0; s < opts.samples; ++s) {
        const Mat W = sampler.sample(rng, opts.boundary_biased && (s % 2 == 1));
        const Mat Acl = loop_of(W);
        ++rep.samples;
        if (with_perf) ++rep.performance_checked;
        const double rho = spectral_radius(Acl);
        rep.max_rho = std::max(rep.max_rho, rho);
        if (!(rho < 1.0)) continue;
        ++rep.stable;
        if (!with_perf) continue;
        const ClosedLoop cl{Acl, plant.Bw, Ccl, plant.Dw};
        if (hinf) {
            const double h = hinf_norm_levelset(cl, opts.hinf_tol);
            rep.max_hinf = std::max(rep.max_hinf, h);
            if (h <= gamma * (1.0 + opts.hinf_tol)) ++rep.performance_pass;
        } else if (quadratic_performance_analysis(cl, *P).holds()) {
            ++rep.performance_pass;
        }
    }
    rep.message = rep.passed() ? "all sampled closed loops pass" : "some sampled closed loops fail";
    return rep;
}

}  // namespace detail

/**
 * @brief Samples closed loops consistent with the data and checks the
 * design on each.
 *
 * Disturbances W are drawn from the data-compatible part of the set. With
 * persistently exciting data each W fixes one consistent (A, B) and the
 * loop is A + B K with the result's gain. Otherwise the loop is
 * (X+ - Bw W) G with G = M Y^{-1}, which equals A + B K for every model
 * explaining the data with W. Performance is checked by the level-set norm
 * for H-infinity indices and by the analysis LMI otherwise.
 */
inline AuditReport robust_audit(const SynthesisResult& result, const DataMatrices& dm, const PlantKnown& plant,
                                const DisturbanceSet& set, const PerformanceIndex* P = nullptr,
                                const AuditOptions& opts = {}) {
    if (!result.feasible() || result.Y.size() == 0) {
        AuditReport rep;
        rep.message = "result is not feasible";
        return rep;
    }
    const Mat G = result.M * result.Y.inverse();
    const bool unique_models = is_persistently_exciting(dm);
    const bool with_perf = P != nullptr && plant.C.size() > 0;
    const CertificateCheck cert = check_certificate(result, dm, plant.Bw, set, with_perf ? &plant : nullptr, P);
    AuditReport rep = detail::audit_loop(dm, plant, set, P, result.K, opts, [&](const Mat& W) -> Mat {
        if (unique_models) {
            const ConsistentModel cm = reconstruct_model(dm, plant.Bw, W);
            return cm.A + cm.B * result.K;
        }
        return (dm.X_plus - plant.Bw * W) * G;
    });
    rep.certificate = cert;
    return rep;
}

/**
 * @brief Audits a bare gain K against models consistent with the data.
 *
 * Needs persistently exciting data so that every sampled W fixes one
 * consistent (A, B); throws std::invalid_argument otherwise.
 */
inline AuditReport robust_audit_gain(const Mat& K, const DataMatrices& dm, const PlantKnown& plant,
                                     const DisturbanceSet& set, const PerformanceIndex* P = nullptr,
                                     const AuditOptions& opts = {}) {
    if (K.rows() != dm.m() || K.cols() != dm.n()) {
        throw std::invalid_argument("robust_audit_gain: K must be m x n");
    }
    if (!is_persistently_exciting(dm)) {
        throw std::invalid_argument("robust_audit_gain: data are not persistently exciting");
    }
    return detail::audit_loop(dm, plant, set, P, K, opts, [&](const Mat& W) -> Mat {
        const ConsistentModel cm = reconstruct_model(dm, plant.Bw, W);
        return cm.A + cm.B * K;
    });
}

/// Stabilization-only audit.
inline AuditReport robust_audit(const SynthesisResult& result, const DataMatrices& dm, const Mat& Bw,
                                const DisturbanceSet& set, const AuditOptions& opts = {}) {
    PlantKnown plant{Bw, Mat(0, dm.n()), Mat(0, Bw.cols()), Mat(0, dm.m())};
    return robust_audit(result, dm, plant, set, nullptr, opts);
}

}  // namespace ddrc

#endif  // DDRC_VERIFY_HPP
