#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <vector>

#include "susym/errors.hpp"

namespace susym {

using cx = std::complex<double>;

/// Dense complex matrix of modest size (constant operator coefficients,
/// T-matrices, condition estimates).  Row-major storage.
class CMat {
public:
    CMat() = default;
    CMat(int rows, int cols) : rows_(rows), cols_(cols), e_(static_cast<size_t>(rows) * cols) {}
    CMat(std::initializer_list<std::initializer_list<cx>> init) {
        rows_ = static_cast<int>(init.size());
        cols_ = rows_ ? static_cast<int>(init.begin()->size()) : 0;
        e_.reserve(static_cast<size_t>(rows_) * cols_);
        for (const auto& row : init) {
            if (static_cast<int>(row.size()) != cols_)
                throw ContractViolation("CMat: ragged initializer");
            e_.insert(e_.end(), row.begin(), row.end());
        }
    }

    static CMat identity(int n) {
        CMat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static CMat zero(int rows, int cols) { return CMat(rows, cols); }
    static CMat diag(const std::vector<cx>& d) {
        CMat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
        for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    cx& operator()(int r, int c) { return e_[static_cast<size_t>(r) * cols_ + c]; }
    const cx& operator()(int r, int c) const { return e_[static_cast<size_t>(r) * cols_ + c]; }

    CMat& operator+=(const CMat& o) {
        check_same_shape(o);
        for (size_t i = 0; i < e_.size(); ++i) e_[i] += o.e_[i];
        return *this;
    }
    CMat& operator-=(const CMat& o) {
        check_same_shape(o);
        for (size_t i = 0; i < e_.size(); ++i) e_[i] -= o.e_[i];
        return *this;
    }
    CMat& operator*=(cx s) {
        for (auto& v : e_) v *= s;
        return *this;
    }

    friend CMat operator+(CMat a, const CMat& b) { return a += b; }
    friend CMat operator-(CMat a, const CMat& b) { return a -= b; }
    friend CMat operator*(CMat a, cx s) { return a *= s; }
    friend CMat operator*(cx s, CMat a) { return a *= s; }

    friend CMat operator*(const CMat& a, const CMat& b) {
        if (a.cols_ != b.rows_) throw ContractViolation("CMat: dimension mismatch in product");
        CMat r(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                const cx aik = a(i, k);
                if (aik == cx{}) continue;
                for (int j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
            }
        return r;
    }

    CMat transpose() const {
        CMat r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : e_) m = std::max(m, std::abs(v));
        return m;
    }

    double one_norm() const {
        double m = 0.0;
        for (int j = 0; j < cols_; ++j) {
            double s = 0.0;
            for (int i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
            m = std::max(m, s);
        }
        return m;
    }

    double max_imag() const {
        double m = 0.0;
        for (const auto& v : e_) m = std::max(m, std::abs(v.imag()));
        return m;
    }

    /// Inverse via partial-pivot elimination.  Throws SingularWronskian when
    /// the pivot collapses relative to the matrix scale.
    CMat inverse(double eps_pivot = 1e-13) const {
        if (!square()) throw ContractViolation("CMat: inverse of non-square matrix");
        const int n = rows_;
        CMat a(*this), inv = identity(n);
        const double scale = std::max(a.max_abs(), 1e-300);
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r = col + 1; r < n; ++r)
                if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
            if (std::abs(a(piv, col)) <= eps_pivot * scale)
                throw SingularWronskian(cx{}, std::numeric_limits<double>::infinity(),
                                        "CMat: singular matrix in inverse");
            if (piv != col) {
                a.swap_rows(piv, col);
                inv.swap_rows(piv, col);
            }
            const cx d = a(col, col);
            for (int j = 0; j < n; ++j) {
                a(col, j) /= d;
                inv(col, j) /= d;
            }
            for (int r = 0; r < n; ++r) {
                if (r == col) continue;
                const cx f = a(r, col);
                if (f == cx{}) continue;
                for (int j = 0; j < n; ++j) {
                    a(r, j) -= f * a(col, j);
                    inv(r, j) -= f * inv(col, j);
                }
            }
        }
        return inv;
    }

    cx det() const {
        if (!square()) throw ContractViolation("CMat: det of non-square matrix");
        const int n = rows_;
        CMat a(*this);
        cx d = 1.0;
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r = col + 1; r < n; ++r)
                if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
            if (a(piv, col) == cx{}) return cx{};
            if (piv != col) {
                a.swap_rows(piv, col);
                d = -d;
            }
            d *= a(col, col);
            for (int r = col + 1; r < n; ++r) {
                const cx f = a(r, col) / a(col, col);
                for (int j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            }
        }
        return d;
    }

    /// 1-norm condition number (exact for these small matrices); +inf when
    /// singular.
    double cond1() const {
        try {
            return one_norm() * inverse().one_norm();
        } catch (const SingularWronskian&) {
            return std::numeric_limits<double>::infinity();
        }
    }

    void swap_rows(int a, int b) {
        if (a == b) return;
        for (int j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
    }

    friend double max_abs_diff(const CMat& a, const CMat& b) {
        a.check_same_shape(b);
        double m = 0.0;
        for (size_t i = 0; i < a.e_.size(); ++i) m = std::max(m, std::abs(a.e_[i] - b.e_[i]));
        return m;
    }

private:
    void check_same_shape(const CMat& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw ContractViolation("CMat: shape mismatch");
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<cx> e_;
};

} // namespace susym
