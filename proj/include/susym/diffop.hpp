#pragma once

#include <utility>
#include <vector>

#include "susym/config.hpp"
#include "susym/func.hpp"
#include "susym/probes.hpp"
#include "susym/report.hpp"
#include "susym/sampling.hpp"

namespace susym {

inline double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Matrix linear differential operator  sum_j X_j(x) d^j.  Coefficients are
/// matrix functions indexed by derivative order; the vector length fixes the
/// formal order (trailing coefficients may evaluate to zero).
class MatDiffOperator {
public:
    MatDiffOperator(int n, std::vector<FuncPtr> coeffs) : n_(n), coeffs_(std::move(coeffs)) {
        if (coeffs_.empty()) throw ContractViolation("MatDiffOperator: no coefficients");
        for (const auto& c : coeffs_)
            if (!c || c->rows() != n_ || c->cols() != n_)
                throw ContractViolation("MatDiffOperator: coefficient shape mismatch");
    }

    static MatDiffOperator zero(int n) {
        return MatDiffOperator(n, {make_const_func(CMat::zero(n, n))});
    }
    static MatDiffOperator const_op(CMat m) {
        const int n = m.rows();
        return MatDiffOperator(n, {make_const_func(std::move(m))});
    }
    /// Y * d^k
    static MatDiffOperator monomial(CMat Y, int k) {
        const int n = Y.rows();
        std::vector<FuncPtr> c(static_cast<size_t>(k) + 1, make_const_func(CMat::zero(n, n)));
        c[static_cast<size_t>(k)] = make_const_func(std::move(Y));
        return MatDiffOperator(n, std::move(c));
    }

    int dim() const { return n_; }
    int order() const { return static_cast<int>(coeffs_.size()) - 1; }
    const FuncPtr& coeff(int j) const { return coeffs_.at(static_cast<size_t>(j)); }
    const std::vector<FuncPtr>& coeffs() const { return coeffs_; }

    std::vector<cx> singular_points() const {
        std::vector<cx> out;
        for (const auto& c : coeffs_)
            for (cx p : c->singular_points()) out.push_back(p);
        return out;
    }

    /// Apply to a jet of the argument.  The argument jet must carry at least
    /// order() extra coefficients beyond the requested result order.
    MatrixJet apply_to_jet(const MatrixJet& f) const {
        if (f.rows() != n_) throw ContractViolation("MatDiffOperator: argument dimension mismatch");
        const int K = f.order() - order();
        if (K < 0) throw ContractViolation("MatDiffOperator: argument jet order too small");
        const cx x0 = f.base();
        MatrixJet acc(n_, f.cols(), x0, K);
        MatrixJet df = f;
        for (int j = 0; j <= order(); ++j) {
            acc = acc + coeffs_[static_cast<size_t>(j)]->eval(x0, K) * df.truncated(K);
            if (j < order()) df = df.derivative();
        }
        return acc;
    }

    /// Apply to a matrix function; queries the argument at order K + order().
    MatrixJet apply(const FuncPtr& f, cx x0, int K) const {
        return apply_to_jet(f->eval(x0, K + order()));
    }

    /// The application as a function object (for chaining through factor
    /// sequences and kernel-transport checks).
    FuncPtr applied(FuncPtr f) const {
        MatDiffOperator self(*this);
        std::vector<cx> poles = singular_points();
        for (cx p : f->singular_points()) poles.push_back(p);
        return std::make_shared<LambdaFunc>(
            n_, f->cols(),
            [self, f](cx x0, int K) { return self.apply(f, x0, K); }, std::move(poles));
    }

    friend MatDiffOperator operator*(cx s, const MatDiffOperator& a) {
        std::vector<FuncPtr> c;
        c.reserve(a.coeffs_.size());
        for (const auto& f : a.coeffs_) c.push_back(make_lincomb({{s, f}}));
        return MatDiffOperator(a.n_, std::move(c));
    }

    /// Y * A (constant matrix times operator).
    friend MatDiffOperator left_mul(const CMat& Y, const MatDiffOperator& a) {
        std::vector<FuncPtr> c;
        c.reserve(a.coeffs_.size());
        FuncPtr yf = make_const_func(Y);
        for (const auto& f : a.coeffs_) c.push_back(make_prod(yf, f));
        return MatDiffOperator(a.n_, std::move(c));
    }

    friend MatDiffOperator operator+(const MatDiffOperator& a, const MatDiffOperator& b) {
        return lincomb_ops(a, b, 1.0);
    }
    friend MatDiffOperator operator-(const MatDiffOperator& a, const MatDiffOperator& b) {
        return lincomb_ops(a, b, -1.0);
    }

private:
    static MatDiffOperator lincomb_ops(const MatDiffOperator& a, const MatDiffOperator& b, cx sb) {
        if (a.n_ != b.n_) throw ContractViolation("MatDiffOperator: dimension mismatch");
        const int ord = std::max(a.order(), b.order());
        std::vector<FuncPtr> c;
        for (int j = 0; j <= ord; ++j) {
            std::vector<std::pair<cx, FuncPtr>> terms;
            if (j <= a.order()) terms.push_back({1.0, a.coeffs_[static_cast<size_t>(j)]});
            if (j <= b.order()) terms.push_back({sb, b.coeffs_[static_cast<size_t>(j)]});
            if (terms.empty()) throw ContractViolation("MatDiffOperator: empty sum");
            c.push_back(make_lincomb(std::move(terms)));
        }
        return MatDiffOperator(a.n_, std::move(c));
    }

    int n_;
    std::vector<FuncPtr> coeffs_;
};

/// Composition A after B via the Leibniz rule:
///   coefficient of d^m in A o B is  sum over j,k,r with j - r + k = m of
///   binom(j, r) X^A_j (X^B_k)^{(r)}.
/// Each composed coefficient queries B's coefficients at order K + r.
inline MatDiffOperator compose(const MatDiffOperator& A, const MatDiffOperator& B) {
    if (A.dim() != B.dim()) throw ContractViolation("compose: dimension mismatch");
    const int n = A.dim(), a = A.order(), b = B.order();
    std::vector<cx> poles = A.singular_points();
    for (cx p : B.singular_points()) poles.push_back(p);
    std::vector<FuncPtr> out;
    for (int m = 0; m <= a + b; ++m) {
        auto acoeffs = A.coeffs();
        auto bcoeffs = B.coeffs();
        out.push_back(std::make_shared<LambdaFunc>(
            n, n,
            [acoeffs, bcoeffs, a, b, m, n](cx x0, int K) {
                MatrixJet acc(n, n, x0, K);
                for (int j = 0; j <= a; ++j)
                    for (int r = 0; r <= j; ++r) {
                        const int k = m - j + r;
                        if (k < 0 || k > b) continue;
                        MatrixJet bk = bcoeffs[static_cast<size_t>(k)]->eval(x0, K + r);
                        for (int t = 0; t < r; ++t) bk = bk.derivative();
                        acc = acc + binom(j, r) * (acoeffs[static_cast<size_t>(j)]->eval(x0, K) * bk);
                    }
                return acc;
            },
            poles));
    }
    return MatDiffOperator(n, std::move(out));
}

/// Schroedinger-form Hamiltonian  -I d^2 + V(x).
struct Hamiltonian {
    FuncPtr V;

    int dim() const { return V->rows(); }

    MatDiffOperator op() const {
        const int n = dim();
        return MatDiffOperator(n, {V, make_const_func(CMat::zero(n, n)),
                                   make_const_func(-1.0 * CMat::identity(n))});
    }
};

inline Hamiltonian make_hamiltonian(FuncPtr V) {
    if (V->rows() != V->cols()) throw ContractViolation("Hamiltonian: potential not square");
    return Hamiltonian{std::move(V)};
}

/// Polynomial with roots and multiplicities: P(z) = prod_l (z - root_l)^{mult_l}.
struct SpectralPolynomial {
    std::vector<std::pair<cx, int>> roots;

    int degree() const {
        int d = 0;
        for (const auto& [r, m] : roots) d += m;
        return d;
    }

    cx eval(cx z) const {
        cx v = 1.0;
        for (const auto& [r, m] : roots)
            for (int i = 0; i < m; ++i) v *= z - r;
        return v;
    }
};

/// P(H) as an operator: product of (H - root I) factors.
inline MatDiffOperator poly_of_H(const SpectralPolynomial& P, const Hamiltonian& H) {
    const int n = H.dim();
    MatDiffOperator acc = MatDiffOperator::const_op(CMat::identity(n));
    bool first = true;
    for (const auto& [root, mult] : P.roots)
        for (int i = 0; i < mult; ++i) {
            MatDiffOperator factor = H.op() - MatDiffOperator::const_op(root * CMat::identity(n));
            acc = first ? factor : compose(acc, factor);
            first = false;
        }
    return acc;
}

struct DivisionResult {
    MatDiffOperator quotient;
    MatDiffOperator remainder;
};

/// Right Euclidean division A = Q o B + R with ord R < ord B.  The divisor's
/// leading coefficient must be pointwise invertible where evaluation happens;
/// the quotient's coefficients are lazy and memoized.
inline DivisionResult right_divide(const MatDiffOperator& A, const MatDiffOperator& B) {
    if (A.dim() != B.dim()) throw ContractViolation("right_divide: dimension mismatch");
    const int n = A.dim(), a = A.order(), b = B.order();
    if (b > a)
        return {MatDiffOperator::zero(n), A};

    std::vector<cx> poles = A.singular_points();
    for (cx p : B.singular_points()) poles.push_back(p);

    // rem holds the still-to-be-reduced coefficients, highest first removed.
    std::vector<FuncPtr> rem = A.coeffs();
    auto bcoeffs = B.coeffs();
    std::vector<FuncPtr> quot(static_cast<size_t>(a - b) + 1);

    for (int m = a; m >= b; --m) {
        const int d = m - b;
        FuncPtr top = rem[static_cast<size_t>(m)];
        FuncPtr lead = bcoeffs[static_cast<size_t>(b)];
        FuncPtr q = std::make_shared<LambdaFunc>(
            n, n,
            [top, lead, n](cx x0, int K) {
                MatrixJet L = lead->eval(x0, K);
                MatrixJet inv = mat_jet_solve(L, MatrixJet::identity(n, x0, K));
                return top->eval(x0, K) * inv;
            },
            poles);
        quot[static_cast<size_t>(d)] = q;

        std::vector<FuncPtr> next(static_cast<size_t>(m));
        for (int j = 0; j < m; ++j) {
            FuncPtr base = rem[static_cast<size_t>(j)];
            next[static_cast<size_t>(j)] = std::make_shared<LambdaFunc>(
                n, n,
                [base, q, bcoeffs, d, j, b, n](cx x0, int K) {
                    MatrixJet acc = base->eval(x0, K);
                    for (int k = 0; k <= b; ++k) {
                        const int r = d + k - j;
                        if (r < 0 || r > d) continue;
                        MatrixJet bk = bcoeffs[static_cast<size_t>(k)]->eval(x0, K + r);
                        for (int t = 0; t < r; ++t) bk = bk.derivative();
                        acc = acc - binom(d, r) * (q->eval(x0, K) * bk);
                    }
                    return acc;
                },
                poles);
        }
        rem = std::move(next);
    }

    if (rem.empty()) rem.push_back(make_const_func(CMat::zero(n, n)));
    return {MatDiffOperator(n, std::move(quot)), MatDiffOperator(n, std::move(rem))};
}

/// Largest normalized coefficient difference over a seeded point sample.
inline double op_coeff_distance(const MatDiffOperator& A, const MatDiffOperator& B,
                                const Config& cfg = {}) {
    if (A.dim() != B.dim()) throw ContractViolation("op_coeff_distance: dimension mismatch");
    std::vector<cx> avoid = A.singular_points();
    for (cx p : B.singular_points()) avoid.push_back(p);
    SampleStream stream(cfg.seed, cfg.window);
    const auto pts = stream.draw_avoiding(cfg.sample_points, avoid);
    const int ord = std::max(A.order(), B.order());
    double worst = 0.0;
    for (double x : pts)
        for (int j = 0; j <= ord; ++j) {
            CMat va = j <= A.order() ? A.coeff(j)->eval(x, 0).value() : CMat::zero(A.dim(), A.dim());
            CMat vb = j <= B.order() ? B.coeff(j)->eval(x, 0).value() : CMat::zero(B.dim(), B.dim());
            const double scale = std::max(va.max_abs(), vb.max_abs());
            worst = std::max(worst, normalized(max_abs_diff(va, vb), scale));
        }
    return worst;
}

/// Largest normalized coefficient magnitude of an operator over the sample
/// (used for remainder-vanishing checks).
inline double op_norm_sampled(const MatDiffOperator& A, const Config& cfg = {}) {
    return op_coeff_distance(A, MatDiffOperator::zero(A.dim()), cfg);
}

/// Residual of the product identity A = C o B measured by applying both
/// sides to the probe battery at seeded points.  Application keeps jet
/// errors relative; forming the composed coefficients would differentiate
/// C's and B's coefficient functions to high order and amplify them.
/// The difference is normalized by the magnitude of the terms actually
/// summed (backward error): where C's coefficients are large and the sum
/// cancels, the identity cannot be certified below that scale times machine
/// precision, and a genuine failure still shows up at the well-conditioned
/// points of the sample.
inline double product_residual_applied(const MatDiffOperator& A, const MatDiffOperator& C,
                                       const MatDiffOperator& B, const Config& cfg = {}) {
    if (A.dim() != C.dim() || A.dim() != B.dim())
        throw ContractViolation("product_residual_applied: dimension mismatch");
    std::vector<cx> avoid = A.singular_points();
    for (cx p : C.singular_points()) avoid.push_back(p);
    for (cx p : B.singular_points()) avoid.push_back(p);
    const auto probes = probe_battery(A.dim());
    return max_over_resampled(
        [&](double x) {
            double worst = 0.0;
            for (const auto& f : probes) {
                const CMat va = A.apply(f, x, 0).value();
                const FuncPtr bf = B.applied(f);
                const CMat vc = C.apply(bf, x, 0).value();
                const MatrixJet g = bf->eval(x, C.order());
                double term_sum = 0.0, fact = 1.0;
                for (int j = 0; j <= C.order(); ++j) {
                    if (j > 0) fact *= j;
                    term_sum += C.coeff(j)->eval(x, 0).value().max_abs() *
                                g.coeff(j).max_abs() * fact;
                }
                const double scale = std::max({va.max_abs(), vc.max_abs(), term_sum});
                worst = std::max(worst, normalized(max_abs_diff(va, vc), scale));
            }
            return worst;
        },
        avoid, cfg.sample_points, cfg.seed, cfg.window, cfg.resample_retries);
}

/// Residual of the intertwining relation Q H_src = H_dst Q measured by
/// applying both sides to the probe battery at seeded points.
inline double intertwining_residual(const MatDiffOperator& Q, const Hamiltonian& H_src,
                                    const Hamiltonian& H_dst, const Config& cfg = {}) {
    MatDiffOperator lhs = compose(Q, H_src.op());
    MatDiffOperator rhs = compose(H_dst.op(), Q);
    std::vector<cx> avoid = lhs.singular_points();
    for (cx p : rhs.singular_points()) avoid.push_back(p);
    SampleStream stream(cfg.seed, cfg.window);
    const auto pts = stream.draw_avoiding(cfg.sample_points, avoid);
    const auto probes = probe_battery(Q.dim());
    double worst = 0.0;
    for (const auto& f : probes)
        for (double x : pts) {
            CMat va = lhs.apply(f, x, 0).value();
            CMat vb = rhs.apply(f, x, 0).value();
            const double scale = std::max(va.max_abs(), vb.max_abs());
            worst = std::max(worst, normalized(max_abs_diff(va, vb), scale));
        }
    return worst;
}

} // namespace susym
