#pragma once

#include <algorithm>
#include <vector>

#include "susym/jet.hpp"
#include "susym/linalg.hpp"

namespace susym {

/// Matrix whose entries are jets sharing one base point and order.
class MatrixJet {
public:
    MatrixJet() = default;
    MatrixJet(int rows, int cols, cx x0, int order)
        : rows_(rows), cols_(cols), e_(static_cast<size_t>(rows) * cols, Jet(x0, order)) {}

    static MatrixJet from_const(const CMat& m, cx x0, int order) {
        MatrixJet r(m.rows(), m.cols(), x0, order);
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j) r(i, j) = Jet::constant(x0, order, m(i, j));
        return r;
    }
    static MatrixJet identity(int n, cx x0, int order) {
        return from_const(CMat::identity(n), x0, order);
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    cx base() const { return e_.at(0).base(); }
    int order() const { return e_.at(0).order(); }

    Jet& operator()(int r, int c) { return e_[static_cast<size_t>(r) * cols_ + c]; }
    const Jet& operator()(int r, int c) const { return e_[static_cast<size_t>(r) * cols_ + c]; }

    /// Matrix of constant terms f(x0).
    CMat value() const {
        CMat m(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).value();
        return m;
    }

    /// Matrix of Taylor coefficients at index k.
    CMat coeff(int k) const {
        CMat m(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).coeff(k);
        return m;
    }

    MatrixJet derivative() const {
        MatrixJet r(rows_, cols_, base(), order() - 1);
        for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i].derivative();
        return r;
    }

    MatrixJet truncated(int new_order) const {
        MatrixJet r(*this);
        for (auto& v : r.e_) v = v.truncated(new_order);
        return r;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : e_) m = std::max(m, v.max_abs());
        return m;
    }

    friend MatrixJet operator+(const MatrixJet& a, const MatrixJet& b) {
        a.check_same_shape(b);
        MatrixJet r(a);
        for (size_t i = 0; i < r.e_.size(); ++i) r.e_[i] = a.e_[i] + b.e_[i];
        return r;
    }
    friend MatrixJet operator-(const MatrixJet& a, const MatrixJet& b) {
        a.check_same_shape(b);
        MatrixJet r(a);
        for (size_t i = 0; i < r.e_.size(); ++i) r.e_[i] = a.e_[i] - b.e_[i];
        return r;
    }
    friend MatrixJet operator*(const MatrixJet& a, const MatrixJet& b) {
        if (a.cols_ != b.rows_) throw ContractViolation("MatrixJet: dimension mismatch in product");
        const int K = std::min(a.order(), b.order());
        MatrixJet r(a.rows_, b.cols_, a.base(), K);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k)
                for (int j = 0; j < b.cols_; ++j)
                    r(i, j) = r(i, j) + a(i, k) * b(k, j);
        return r;
    }
    friend MatrixJet operator*(const MatrixJet& a, const Jet& s) {
        MatrixJet r(a);
        for (auto& v : r.e_) v = v * s;
        return r;
    }
    friend MatrixJet operator*(const Jet& s, const MatrixJet& a) { return a * s; }
    friend MatrixJet operator*(const MatrixJet& a, cx s) {
        MatrixJet r(a);
        for (auto& v : r.e_) v = v * s;
        return r;
    }
    friend MatrixJet operator*(cx s, const MatrixJet& a) { return a * s; }

    friend double max_abs_diff(const MatrixJet& a, const MatrixJet& b) {
        a.check_same_shape(b);
        double m = 0.0;
        for (size_t i = 0; i < a.e_.size(); ++i) m = std::max(m, max_abs_diff(a.e_[i], b.e_[i]));
        return m;
    }

private:
    void check_same_shape(const MatrixJet& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw ContractViolation("MatrixJet: shape mismatch");
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<Jet> e_;
};

/// Solve A X = B in the jet ring by elimination with partial pivoting on
/// constant-term magnitude.  Throws SingularWronskian when the constant-term
/// matrix is singular or its 1-norm condition number exceeds the threshold.
inline MatrixJet mat_jet_solve(const MatrixJet& A, const MatrixJet& B,
                               double cond_threshold = 1e10, double eps_pivot = 1e-12) {
    if (A.rows() != A.cols() || A.rows() != B.rows())
        throw ContractViolation("mat_jet_solve: shape mismatch");
    const int n = A.rows(), r = B.cols();
    const double cond = A.value().cond1();
    if (!(cond < cond_threshold))
        throw SingularWronskian(A.base(), cond, "jet linear system ill-conditioned at sample point");

    MatrixJet a(A), b(B);
    const double scale = std::max(a.value().max_abs(), 1e-300);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(a(row, col).value()) > std::abs(a(piv, col).value())) piv = row;
        if (std::abs(a(piv, col).value()) <= eps_pivot * scale)
            throw SingularWronskian(A.base(), std::numeric_limits<double>::infinity(),
                                    "jet linear system singular at sample point");
        if (piv != col)
            for (int j = 0; j < n; ++j) std::swap(a(piv, j), a(col, j));
        if (piv != col)
            for (int j = 0; j < r; ++j) std::swap(b(piv, j), b(col, j));
        const Jet pinv = a(col, col).inverse(0.0);
        for (int j = col; j < n; ++j) a(col, j) = a(col, j) * pinv;
        for (int j = 0; j < r; ++j) b(col, j) = b(col, j) * pinv;
        for (int row = 0; row < n; ++row) {
            if (row == col) continue;
            const Jet f = a(row, col);
            if (f.max_abs() == 0.0) continue;
            for (int j = col; j < n; ++j) a(row, j) = a(row, j) - f * a(col, j);
            for (int j = 0; j < r; ++j) b(row, j) = b(row, j) - f * b(col, j);
        }
    }
    return b;
}

/// Determinant in the jet ring by division-free expansion (DP over column
/// subsets).  Handles matrices whose constant term, or whole jet, is
/// singular; intended for the modest sizes Wronskians reach here.
inline Jet mat_jet_det(const MatrixJet& A) {
    if (A.rows() != A.cols()) throw ContractViolation("mat_jet_det: non-square matrix");
    const int n = A.rows();
    if (n == 0) throw ContractViolation("mat_jet_det: empty matrix");
    if (n > 20) throw ContractViolation("mat_jet_det: dimension too large for subset expansion");
    const cx x0 = A.base();
    const int K = A.order();
    // dp[S] = det of the submatrix on rows 0..popcount(S)-1 and column set S.
    std::vector<Jet> dp(size_t{1} << n, Jet(x0, K));
    dp[0] = Jet::constant(x0, K, 1.0);
    for (unsigned S = 1; S < (1u << n); ++S) {
        const int row = __builtin_popcount(S) - 1;
        Jet acc(x0, K);
        int pos = 0;
        for (int col = 0; col < n; ++col) {
            if (!(S & (1u << col))) continue;
            Jet term = A(row, col) * dp[S & ~(1u << col)];
            acc = ((row + pos) % 2 == 0) ? acc + term : acc - term;
            ++pos;
        }
        dp[S] = acc;
    }
    return dp[(1u << n) - 1];
}

} // namespace susym
