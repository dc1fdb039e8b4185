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
#ifndef DDRC_LINALG_HPP
#define DDRC_LINALG_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddrc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative rank tolerance max(rows, cols) * machine epsilon.
inline double default_rank_tol(const Mat& M) {
    return static_cast<double>(std::max<Index>({M.rows(), M.cols(), 1})) *
           std::numeric_limits<double>::epsilon();
}

inline bool all_finite(const Mat& M) { return M.allFinite(); }

inline Mat symmetrize(const Mat& M) { return 0.5 * (M + M.transpose()); }

/**
 * @brief Block-Hankel matrix of depth @p depth and @p width columns.
 *
 * Block (j, k) is seq[start + j + k]; the result has depth * d rows, where d
 * is the common dimension of the vectors in @p seq.
 */
inline Mat hankel(const std::vector<Vec>& seq, std::size_t start, std::size_t depth, std::size_t width) {
    if (depth == 0 || width == 0) {
        throw std::invalid_argument("hankel: depth and width must be positive");
    }
    if (seq.size() < start + depth + width - 1) {
        throw std::invalid_argument("hankel: sequence has " + std::to_string(seq.size()) +
                                    " elements, need " + std::to_string(start + depth + width - 1));
    }
    const Index d = seq[start].size();
    for (std::size_t k = start; k < start + depth + width - 1; ++k) {
        if (seq[k].size() != d) {
            throw std::invalid_argument("hankel: inconsistent vector dimensions");
        }
    }
    Mat H(static_cast<Index>(depth) * d, static_cast<Index>(width));
    for (std::size_t j = 0; j < depth; ++j) {
        for (std::size_t k = 0; k < width; ++k) {
            H.block(static_cast<Index>(j) * d, static_cast<Index>(k), d, 1) = seq[start + j + k];
        }
    }
    return H;
}

/// Stacks vectors as columns.
inline Mat columns(const std::vector<Vec>& seq, std::size_t start, std::size_t count) {
    return hankel(seq, start, 1, count);
}

inline Eigen::JacobiSVD<Mat> full_svd(const Mat& M) {
    return Eigen::JacobiSVD<Mat>(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

inline double sigma_max(const Mat& M) {
    if (M.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Mat> svd(M);
    return svd.singularValues()(0);
}

/// Number of singular values above tol * sigma_max (tol < 0 selects the default).
inline Index rank(const Mat& M, double tol = -1.0) {
    if (M.size() == 0) {
        return 0;
    }
    if (tol < 0.0) {
        tol = default_rank_tol(M);
    }
    Eigen::JacobiSVD<Mat> svd(M);
    const Vec& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) {
        return 0;
    }
    const double cutoff = tol * s(0);
    return static_cast<Index>((s.array() > cutoff).count());
}

/**
 * @brief Orthonormal basis of the kernel of @p M.
 *
 * Singular values at or below tol * sigma_max count as zero. Returns a
 * cols(M) x 0 matrix when the kernel is trivial.
 */
inline Mat kernel_basis(const Mat& M, double tol = -1.0) {
    if (tol < 0.0) {
        tol = default_rank_tol(M);
    }
    if (tol == 0.0) {
        throw std::invalid_argument("kernel_basis: tol must be positive");
    }
    const Index cols = M.cols();
    if (M.rows() == 0 || cols == 0) {
        return Mat::Identity(cols, cols);
    }
    const auto svd = full_svd(M);
    const Vec& s = svd.singularValues();
    const double cutoff = (s.size() > 0 ? s(0) : 0.0) * tol;
    Index r = 0;
    while (r < s.size() && s(r) > cutoff) {
        ++r;
    }
    return svd.matrixV().rightCols(cols - r);
}

/// Moore-Penrose pseudo-inverse with the same rank convention as rank().
inline Mat pinv(const Mat& M, double tol = -1.0) {
    if (M.size() == 0) {
        return Mat::Zero(M.cols(), M.rows());
    }
    if (tol < 0.0) {
        tol = default_rank_tol(M);
    }
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& s = svd.singularValues();
    const double cutoff = s(0) * tol;
    Vec inv = Vec::Zero(s.size());
    for (Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff) {
            inv(i) = 1.0 / s(i);
        }
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

inline Eigen::VectorXcd eigenvalues(const Mat& M) {
    if (M.rows() != M.cols()) {
        throw std::invalid_argument("eigenvalues: matrix must be square");
    }
    if (M.rows() == 0) {
        return Eigen::VectorXcd(0);
    }
    Eigen::EigenSolver<Mat> es(M, false);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("eigenvalues: QR iteration did not converge");
    }
    return es.eigenvalues();
}

/// Largest eigenvalue modulus (real Schur based).
inline double spectral_radius(const Mat& M) {
    if (M.rows() != M.cols()) {
        throw std::invalid_argument("spectral_radius: matrix must be square");
    }
    if (M.rows() == 0) {
        return 0.0;
    }
    return eigenvalues(M).cwiseAbs().maxCoeff();
}

inline double lambda_max_sym(const Mat& M) {
    if (M.rows() == 0) {
        return -std::numeric_limits<double>::infinity();
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(M), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(M.rows() - 1);
}

inline double lambda_min_sym(const Mat& M) {
    if (M.rows() == 0) {
        return std::numeric_limits<double>::infinity();
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(M), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/// Entry-wise maximum absolute value, 0 for empty matrices.
inline double max_abs(const Mat& M) { return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff(); }

/// Inverse of a symmetric positive definite matrix via Cholesky.
inline Mat spd_inverse(const Mat& M) {
    Eigen::LLT<Mat> llt(symmetrize(M));
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("spd_inverse: matrix is not positive definite");
    }
    return llt.solve(Mat::Identity(M.rows(), M.cols()));
}

}  // namespace ddrc

#endif  // DDRC_LINALG_HPP
