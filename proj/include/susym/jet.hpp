#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "susym/errors.hpp"

namespace susym {

using cx = std::complex<double>;

/// Truncated Taylor jet at a base point: coeff(k) = f^{(k)}(x0)/k!.
///
/// Every operation is prefix-exact: coefficient k of a result depends only on
/// coefficients <= k of the inputs (plus the shift consumed by derivative()).
/// Mixed-order operands are allowed; the result carries the shorter order.
/// Base points must agree exactly.
class Jet {
public:
    Jet() = default;
    Jet(cx x0, int order) : x0_(x0), c_(static_cast<size_t>(order) + 1) {
        if (order < 0) throw ContractViolation("Jet: negative order");
    }

    static Jet constant(cx x0, int order, cx value) {
        Jet j(x0, order);
        j.c_[0] = value;
        return j;
    }
    static Jet variable(cx x0, int order) {
        Jet j(x0, order);
        j.c_[0] = x0;
        if (order >= 1) j.c_[1] = 1.0;
        return j;
    }
    static Jet from_coeffs(cx x0, std::vector<cx> coeffs) {
        if (coeffs.empty()) throw ContractViolation("Jet: empty coefficient list");
        Jet j;
        j.x0_ = x0;
        j.c_ = std::move(coeffs);
        return j;
    }

    cx base() const { return x0_; }
    int order() const { return static_cast<int>(c_.size()) - 1; }

    cx coeff(int k) const {
        if (k < 0 || k > order()) throw ContractViolation("Jet: coefficient index out of range");
        return c_[static_cast<size_t>(k)];
    }
    void set_coeff(int k, cx v) {
        if (k < 0 || k > order()) throw ContractViolation("Jet: coefficient index out of range");
        c_[static_cast<size_t>(k)] = v;
    }
    cx value() const { return c_[0]; }

    /// f^{(k)}(x0) = k! * coeff(k).
    cx deriv_value(int k) const {
        double fact = 1.0;
        for (int i = 2; i <= k; ++i) fact *= i;
        return coeff(k) * fact;
    }

    Jet truncated(int new_order) const {
        if (new_order < 0 || new_order > order())
            throw ContractViolation("Jet: truncation order out of range");
        Jet j(x0_, new_order);
        std::copy(c_.begin(), c_.begin() + new_order + 1, j.c_.begin());
        return j;
    }

    /// Jet of f' at the same point; consumes one order of lookahead.
    Jet derivative() const {
        if (order() < 1) throw ContractViolation("Jet: derivative needs order >= 1");
        Jet j(x0_, order() - 1);
        for (int k = 0; k + 1 <= order(); ++k)
            j.c_[static_cast<size_t>(k)] = static_cast<double>(k + 1) * c_[static_cast<size_t>(k) + 1];
        return j;
    }

    Jet derivative(int times) const {
        Jet j(*this);
        for (int i = 0; i < times; ++i) j = j.derivative();
        return j;
    }

    /// Horner evaluation of the truncated polynomial at x0 + dx.
    cx eval_shift(cx dx) const {
        cx acc = c_.back();
        for (int k = order() - 1; k >= 0; --k) acc = acc * dx + c_[static_cast<size_t>(k)];
        return acc;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : c_) m = std::max(m, std::abs(v));
        return m;
    }

    Jet operator-() const {
        Jet j(*this);
        for (auto& v : j.c_) v = -v;
        return j;
    }

    friend Jet operator+(const Jet& a, const Jet& b) {
        int K = common_order(a, b);
        Jet r(a.x0_, K);
        for (int k = 0; k <= K; ++k) r.c_[static_cast<size_t>(k)] = a.c_[static_cast<size_t>(k)] + b.c_[static_cast<size_t>(k)];
        return r;
    }
    friend Jet operator-(const Jet& a, const Jet& b) {
        int K = common_order(a, b);
        Jet r(a.x0_, K);
        for (int k = 0; k <= K; ++k) r.c_[static_cast<size_t>(k)] = a.c_[static_cast<size_t>(k)] - b.c_[static_cast<size_t>(k)];
        return r;
    }
    /// Cauchy product truncated at the shorter order.
    friend Jet operator*(const Jet& a, const Jet& b) {
        int K = common_order(a, b);
        Jet r(a.x0_, K);
        for (int i = 0; i <= K; ++i) {
            const cx ai = a.c_[static_cast<size_t>(i)];
            if (ai == cx{}) continue;
            for (int j = 0; i + j <= K; ++j)
                r.c_[static_cast<size_t>(i + j)] += ai * b.c_[static_cast<size_t>(j)];
        }
        return r;
    }
    friend Jet operator*(const Jet& a, cx s) {
        Jet r(a);
        for (auto& v : r.c_) v *= s;
        return r;
    }
    friend Jet operator*(cx s, const Jet& a) { return a * s; }
    friend Jet operator+(const Jet& a, cx s) {
        Jet r(a);
        r.c_[0] += s;
        return r;
    }
    friend Jet operator+(cx s, const Jet& a) { return a + s; }
    friend Jet operator-(const Jet& a, cx s) { return a + (-s); }
    friend Jet operator-(cx s, const Jet& a) { return (-a) + s; }

    /// Series reciprocal: b_0 = 1/a_0, b_k = -(sum_{i=1..k} a_i b_{k-i}) / a_0.
    /// Throws SingularPoint when the constant term is negligible against the
    /// jet's own scale.
    Jet inverse(double eps = 1e-12) const {
        const double scale = std::max(1.0, max_abs());
        if (std::abs(c_[0]) <= eps * scale)
            throw SingularPoint(x0_, "Jet: reciprocal of series with vanishing constant term");
        const int K = order();
        Jet r(x0_, K);
        r.c_[0] = 1.0 / c_[0];
        for (int k = 1; k <= K; ++k) {
            cx s{};
            for (int i = 1; i <= k; ++i) s += c_[static_cast<size_t>(i)] * r.c_[static_cast<size_t>(k - i)];
            r.c_[static_cast<size_t>(k)] = -s / c_[0];
        }
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b) { return a * b.inverse(); }
    friend Jet operator/(const Jet& a, cx s) { return a * (cx{1.0} / s); }
    friend Jet operator/(cx s, const Jet& a) { return a.inverse() * s; }

    friend double max_abs_diff(const Jet& a, const Jet& b) {
        int K = common_order(a, b);
        double m = 0.0;
        for (int k = 0; k <= K; ++k) m = std::max(m, std::abs(a.c_[static_cast<size_t>(k)] - b.c_[static_cast<size_t>(k)]));
        return m;
    }

private:
    static int common_order(const Jet& a, const Jet& b) {
        if (a.x0_ != b.x0_) throw ContractViolation("Jet: base point mismatch");
        return std::min(a.order(), b.order());
    }

    cx x0_{};
    std::vector<cx> c_{cx{}};
};

inline Jet jet_exp(const Jet& a) {
    const int K = a.order();
    Jet r(a.base(), K);
    r.set_coeff(0, std::exp(a.coeff(0)));
    for (int k = 1; k <= K; ++k) {
        cx s{};
        for (int j = 1; j <= k; ++j) s += static_cast<double>(j) * a.coeff(j) * r.coeff(k - j);
        r.set_coeff(k, s / static_cast<double>(k));
    }
    return r;
}

inline std::pair<Jet, Jet> jet_sin_cos(const Jet& a) {
    const int K = a.order();
    Jet s(a.base(), K), c(a.base(), K);
    s.set_coeff(0, std::sin(a.coeff(0)));
    c.set_coeff(0, std::cos(a.coeff(0)));
    for (int k = 1; k <= K; ++k) {
        cx ss{}, cc{};
        for (int j = 1; j <= k; ++j) {
            const cx ja = static_cast<double>(j) * a.coeff(j);
            ss += ja * c.coeff(k - j);
            cc += ja * s.coeff(k - j);
        }
        s.set_coeff(k, ss / static_cast<double>(k));
        c.set_coeff(k, -cc / static_cast<double>(k));
    }
    return {s, c};
}

/// Integer power by square-and-multiply; negative exponents go through the
/// series reciprocal (and can throw SingularPoint).
inline Jet jet_pow_int(const Jet& a, long long m) {
    Jet base = m < 0 ? a.inverse() : a;
    unsigned long long e = m < 0 ? static_cast<unsigned long long>(-m) : static_cast<unsigned long long>(m);
    Jet acc = Jet::constant(a.base(), a.order(), 1.0);
    while (e) {
        if (e & 1ull) acc = acc * base;
        base = base * base;
        e >>= 1;
    }
    return acc;
}

} // namespace susym
