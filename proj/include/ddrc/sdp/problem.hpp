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
#ifndef DDRC_SDP_PROBLEM_HPP
#define DDRC_SDP_PROBLEM_HPP

#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "ddrc/sdp/affine.hpp"

namespace ddrc::sdp {

enum class VarKind { Symmetric, Rectangular, Scalar };

inline const char* to_string(VarKind k) {
    switch (k) {
        case VarKind::Symmetric: return "symmetric";
        case VarKind::Rectangular: return "rectangular";
        case VarKind::Scalar: return "scalar";
    }
    return "?";
}

struct Variable {
    std::string name;
    VarKind kind;
    Index rows;
    Index cols;
    Index offset;  // first scalar coordinate
    Index coords;  // number of scalar coordinates
    Affine expr;
};

/// Strict blocks must satisfy F <= -eps_strict I; non-strict blocks F <= 0 up to a tolerance.
enum class Strictness { Strict, NonStrict };

struct SparseEntry {
    Index row;
    Index col;  // row <= col
    double value;
};

struct CoordCoefficient {
    Index coord;
    std::vector<SparseEntry> upper;
};

struct LmiConstraint {
    std::string label;
    Strictness strictness;
    Affine expr;
    Mat constant;
    std::vector<CoordCoefficient> coefficients;  // sorted by coordinate

    Index size() const { return constant.rows(); }
};

struct EqualityRow {
    std::string label;
    std::vector<std::pair<Index, double>> coefficients;
    double constant;
};

/**
 * @brief Feasibility problem over symmetric, rectangular and scalar matrix
 * variables: affine LMI blocks F(x) <= 0 plus linear equalities E(x) = 0.
 */
class SdpProblem {
public:
    Affine add_symmetric(std::string name, Index n) {
        Variable v{std::move(name), VarKind::Symmetric, n, n, num_coords_, n * (n + 1) / 2, Affine(n, n)};
        Index k = num_coords_;
        for (Index j = 0; j < n; ++j) {
            for (Index i = 0; i <= j; ++i) {
                Mat c = Mat::Zero(n, n);
                c(i, j) = 1.0;
                c(j, i) = 1.0;
                v.expr.add_term(k++, c);
            }
        }
        return push(std::move(v));
    }

    Affine add_matrix(std::string name, Index rows, Index cols) {
        Variable v{std::move(name), VarKind::Rectangular, rows, cols, num_coords_, rows * cols, Affine(rows, cols)};
        Index k = num_coords_;
        for (Index j = 0; j < cols; ++j) {
            for (Index i = 0; i < rows; ++i) {
                Mat c = Mat::Zero(rows, cols);
                c(i, j) = 1.0;
                v.expr.add_term(k++, c);
            }
        }
        return push(std::move(v));
    }

    Affine add_scalar(std::string name) {
        Variable v{std::move(name), VarKind::Scalar, 1, 1, num_coords_, 1, Affine(1, 1)};
        v.expr.add_term(num_coords_, Mat::Ones(1, 1));
        return push(std::move(v));
    }

    /// Adds F(x) <= 0 (or < 0 with the solver's strictness margin).
    void add_lmi(const Affine& F, Strictness strictness = Strictness::Strict, std::string label = {}) {
        if (F.rows() != F.cols()) {
            throw std::invalid_argument("add_lmi: block must be square");
        }
        check_coords(F);
        double scale = std::max(1.0, max_abs(F.constant()));
        for (const auto& [k, c] : F.terms()) {
            scale = std::max(scale, max_abs(c));
        }
        const double tol = 1e-12 * scale;
        if (max_abs(F.constant() - F.constant().transpose()) > tol) {
            throw std::invalid_argument("add_lmi: constant part of '" + label + "' is not symmetric");
        }
        LmiConstraint lmi{label, strictness, F, symmetrize(F.constant()), {}};
        for (const auto& [k, c] : F.terms()) {
            if (max_abs(c - c.transpose()) > tol) {
                throw std::invalid_argument("add_lmi: block '" + label + "' is not symmetric in coordinate " +
                                            std::to_string(k));
            }
            CoordCoefficient cc{k, {}};
            for (Index j = 0; j < c.cols(); ++j) {
                for (Index i = 0; i <= j; ++i) {
                    const double v = 0.5 * (c(i, j) + c(j, i));
                    if (v != 0.0) {
                        cc.upper.push_back({i, j, v});
                    }
                }
            }
            if (!cc.upper.empty()) {
                lmi.coefficients.push_back(std::move(cc));
            }
        }
        lmis_.push_back(std::move(lmi));
    }

    /// Adds E(x) = 0 entry-wise.
    void add_equality(const Affine& E, std::string label = {}) {
        check_coords(E);
        for (Index j = 0; j < E.cols(); ++j) {
            for (Index i = 0; i < E.rows(); ++i) {
                EqualityRow row{label + "[" + std::to_string(i) + "," + std::to_string(j) + "]", {},
                                E.constant()(i, j)};
                for (const auto& [k, c] : E.terms()) {
                    if (c(i, j) != 0.0) {
                        row.coefficients.emplace_back(k, c(i, j));
                    }
                }
                equalities_.push_back(std::move(row));
            }
        }
    }

    Index num_coords() const { return num_coords_; }
    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<LmiConstraint>& lmis() const { return lmis_; }
    const std::vector<EqualityRow>& equalities() const { return equalities_; }

    /// Plain-text sparse triplet dump ("coord row col value", coord -1 = constant).
    void dump(std::ostream& os) const {
        os << std::setprecision(17);
        os << "# ddrc sdp problem\n";
        os << "coords " << num_coords_ << "\n";
        for (const auto& v : variables_) {
            os << "var " << v.name << ' ' << to_string(v.kind) << ' ' << v.rows << ' ' << v.cols << ' '
               << v.offset << '\n';
        }
        for (std::size_t b = 0; b < lmis_.size(); ++b) {
            const auto& L = lmis_[b];
            os << "lmi " << b << ' ' << L.size() << ' '
               << (L.strictness == Strictness::Strict ? "strict" : "nonstrict") << ' '
               << (L.label.empty() ? "-" : L.label) << '\n';
            for (Index j = 0; j < L.size(); ++j) {
                for (Index i = 0; i <= j; ++i) {
                    if (L.constant(i, j) != 0.0) {
                        os << -1 << ' ' << i << ' ' << j << ' ' << L.constant(i, j) << '\n';
                    }
                }
            }
            for (const auto& cc : L.coefficients) {
                for (const auto& e : cc.upper) {
                    os << cc.coord << ' ' << e.row << ' ' << e.col << ' ' << e.value << '\n';
                }
            }
        }
        for (std::size_t r = 0; r < equalities_.size(); ++r) {
            const auto& e = equalities_[r];
            os << "eq " << r << ' ' << e.label << '\n';
            os << -1 << ' ' << e.constant << '\n';
            for (const auto& [k, v] : e.coefficients) {
                os << k << ' ' << v << '\n';
            }
        }
    }

private:
    Affine push(Variable v) {
        num_coords_ += v.coords;
        Affine expr = v.expr;
        variables_.push_back(std::move(v));
        return expr;
    }

    void check_coords(const Affine& a) const {
        for (const auto& [k, c] : a.terms()) {
            if (k < 0 || k >= num_coords_) {
                throw std::invalid_argument("SdpProblem: expression references an undeclared variable");
            }
        }
    }

    Index num_coords_ = 0;
    std::vector<Variable> variables_;
    std::vector<LmiConstraint> lmis_;
    std::vector<EqualityRow> equalities_;
};

}  // namespace ddrc::sdp

#endif  // DDRC_SDP_PROBLEM_HPP
