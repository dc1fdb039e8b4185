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
#ifndef DDRC_SDP_AFFINE_HPP
#define DDRC_SDP_AFFINE_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddrc/linalg.hpp"

namespace ddrc::sdp {

/**
 * @brief Matrix-valued affine function of the scalar decision coordinates.
 *
 * Value(x) = constant + sum_k x_k * coefficient_k. Coefficients are stored
 * densely per coordinate; expressions in this library are small blocks, and
 * the solver converts assembled LMIs into sparse form once.
 */
class Affine {
public:
    Affine() = default;
    Affine(Index rows, Index cols) : constant_(Mat::Zero(rows, cols)) {}
    explicit Affine(Mat constant) : constant_(std::move(constant)) {}

    static Affine zero(Index rows, Index cols) { return Affine(rows, cols); }
    static Affine identity(Index n) { return Affine(Mat::Identity(n, n)); }

    Index rows() const { return constant_.rows(); }
    Index cols() const { return constant_.cols(); }
    const Mat& constant() const { return constant_; }
    const std::map<Index, Mat>& terms() const { return terms_; }
    bool is_constant() const { return terms_.empty(); }

    void add_term(Index coord, const Mat& coeff) {
        if (coeff.rows() != rows() || coeff.cols() != cols()) {
            throw std::invalid_argument("Affine::add_term: coefficient has wrong shape");
        }
        auto it = terms_.find(coord);
        if (it == terms_.end()) {
            terms_.emplace(coord, coeff);
        } else {
            it->second += coeff;
        }
    }

    Mat evaluate(const Vec& x) const {
        Mat out = constant_;
        for (const auto& [k, c] : terms_) {
            if (k >= x.size()) {
                throw std::out_of_range("Affine::evaluate: coordinate outside assignment");
            }
            out += x(k) * c;
        }
        return out;
    }

    Affine transpose() const {
        Affine out(Mat(constant_.transpose()));
        for (const auto& [k, c] : terms_) {
            out.terms_.emplace(k, c.transpose());
        }
        return out;
    }

    Affine& operator+=(const Affine& rhs) {
        check_same_shape(rhs, "+");
        constant_ += rhs.constant_;
        for (const auto& [k, c] : rhs.terms_) {
            add_term(k, c);
        }
        return *this;
    }

    Affine& operator-=(const Affine& rhs) { return *this += -rhs; }

    Affine& operator*=(double s) {
        constant_ *= s;
        for (auto& [k, c] : terms_) {
            c *= s;
        }
        return *this;
    }

    Affine operator-() const {
        Affine out = *this;
        out *= -1.0;
        return out;
    }

    friend Affine operator+(Affine lhs, const Affine& rhs) { return lhs += rhs; }
    friend Affine operator-(Affine lhs, const Affine& rhs) { return lhs -= rhs; }
    friend Affine operator+(Affine lhs, const Mat& rhs) { return lhs += Affine(rhs); }
    friend Affine operator+(const Mat& lhs, Affine rhs) { return rhs += Affine(lhs); }
    friend Affine operator-(Affine lhs, const Mat& rhs) { return lhs += Affine(Mat(-rhs)); }
    friend Affine operator-(const Mat& lhs, const Affine& rhs) { return Affine(lhs) - rhs; }
    friend Affine operator*(double s, Affine a) { return a *= s; }
    friend Affine operator*(Affine a, double s) { return a *= s; }

    friend Affine operator*(const Mat& L, const Affine& a) {
        if (L.cols() != a.rows()) {
            throw std::invalid_argument("Affine: left factor has wrong shape");
        }
        Affine out(Mat(L * a.constant_));
        for (const auto& [k, c] : a.terms_) {
            out.terms_.emplace(k, L * c);
        }
        return out;
    }

    friend Affine operator*(const Affine& a, const Mat& R) {
        if (a.cols() != R.rows()) {
            throw std::invalid_argument("Affine: right factor has wrong shape");
        }
        Affine out(Mat(a.constant_ * R));
        for (const auto& [k, c] : a.terms_) {
            out.terms_.emplace(k, c * R);
        }
        return out;
    }

    /// Sub-block view copied into a new expression.
    Affine block(Index r, Index c, Index nr, Index nc) const {
        Affine out(Mat(constant_.block(r, c, nr, nc)));
        for (const auto& [k, coeff] : terms_) {
            Mat sub = coeff.block(r, c, nr, nc);
            if (sub.size() > 0 && sub.cwiseAbs().maxCoeff() > 0.0) {
                out.terms_.emplace(k, std::move(sub));
            }
        }
        return out;
    }

private:
    void check_same_shape(const Affine& rhs, const char* op) const {
        if (rhs.rows() != rows() || rhs.cols() != cols()) {
            throw std::invalid_argument(std::string("Affine: shape mismatch in operator") + op);
        }
    }

    Mat constant_;
    std::map<Index, Mat> terms_;
};

/// Scalar (1x1) expression times a constant matrix.
inline Affine scale(const Affine& scalar, const Mat& M) {
    if (scalar.rows() != 1 || scalar.cols() != 1) {
        throw std::invalid_argument("scale: expression must be 1x1");
    }
    Affine out(Mat(scalar.constant()(0, 0) * M));
    for (const auto& [k, c] : scalar.terms()) {
        out.add_term(k, c(0, 0) * M);
    }
    return out;
}

/// Dense block concatenation; every row of blocks must share heights, every column widths.
inline Affine concat(const std::vector<std::vector<Affine>>& grid) {
    if (grid.empty()) {
        return Affine(0, 0);
    }
    const std::size_t nbr = grid.size();
    const std::size_t nbc = grid.front().size();
    std::vector<Index> heights(nbr), widths(nbc);
    for (std::size_t i = 0; i < nbr; ++i) {
        if (grid[i].size() != nbc) {
            throw std::invalid_argument("concat: ragged block grid");
        }
        heights[i] = grid[i][0].rows();
    }
    for (std::size_t j = 0; j < nbc; ++j) {
        widths[j] = grid[0][j].cols();
    }
    Index total_r = 0, total_c = 0;
    for (Index h : heights) total_r += h;
    for (Index w : widths) total_c += w;

    Affine out(total_r, total_c);
    Mat constant = Mat::Zero(total_r, total_c);
    std::map<Index, Mat> terms;
    Index r0 = 0;
    for (std::size_t i = 0; i < nbr; ++i) {
        Index c0 = 0;
        for (std::size_t j = 0; j < nbc; ++j) {
            const Affine& b = grid[i][j];
            if (b.rows() != heights[i] || b.cols() != widths[j]) {
                throw std::invalid_argument("concat: block (" + std::to_string(i) + "," + std::to_string(j) +
                                            ") has inconsistent shape");
            }
            constant.block(r0, c0, heights[i], widths[j]) = b.constant();
            for (const auto& [k, c] : b.terms()) {
                auto it = terms.find(k);
                if (it == terms.end()) {
                    it = terms.emplace(k, Mat::Zero(total_r, total_c)).first;
                }
                it->second.block(r0, c0, heights[i], widths[j]) += c;
            }
            c0 += widths[j];
        }
        r0 += heights[i];
    }
    Affine result(constant);
    for (auto& [k, c] : terms) {
        result.add_term(k, c);
    }
    return result;
}

/**
 * @brief Symmetric block matrix from its diagonal and upper blocks.
 *
 * grid[i][i] must be present; a missing off-diagonal block takes the
 * transpose of its mirror, or zero if both are missing.
 */
inline Affine symmetric_blocks(const std::vector<std::vector<std::optional<Affine>>>& grid) {
    const std::size_t nb = grid.size();
    std::vector<Index> sizes(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        if (grid[i].size() != nb || !grid[i][i]) {
            throw std::invalid_argument("symmetric_blocks: need a square grid with diagonal blocks");
        }
        sizes[i] = grid[i][i]->rows();
    }
    std::vector<std::vector<Affine>> full(nb, std::vector<Affine>(nb));
    for (std::size_t i = 0; i < nb; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            if (grid[i][j]) {
                full[i][j] = *grid[i][j];
            } else if (grid[j][i]) {
                full[i][j] = grid[j][i]->transpose();
            } else {
                full[i][j] = Affine(sizes[i], sizes[j]);
            }
        }
    }
    return concat(full);
}

}  // namespace ddrc::sdp

#endif  // DDRC_SDP_AFFINE_HPP
