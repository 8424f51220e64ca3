#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "susym/chains.hpp"
#include "susym/diffop.hpp"
#include "susym/factor.hpp"
#include "susym/report.hpp"
#include "susym/sampling.hpp"

namespace susym {

/// X V X^{-1} with a constant X: the Schroedinger form survives conjugation
/// because no derivative term is produced.
inline Hamiltonian similarity_hamiltonian(const Hamiltonian& H, const CMat& X) {
    const CMat Xi = X.inverse();
    FuncPtr V = H.V;
    return make_hamiltonian(std::make_shared<LambdaFunc>(
        H.dim(), H.dim(),
        [V, X, Xi](cx x0, int K) {
            return MatrixJet::from_const(X, x0, K) * V->eval(x0, K) *
                   MatrixJet::from_const(Xi, x0, K);
        },
        V->singular_points()));
}

/// prod_l (lambda_l I - H)^{m_l}: the same operator as poly_of_H up to the
/// sign (-1)^degree picked up by flipping every factor.
inline MatDiffOperator poly_of_H_reversed(const SpectralPolynomial& P, const Hamiltonian& H) {
    MatDiffOperator op = poly_of_H(P, H);
    return (P.degree() % 2 == 0) ? op : cx(-1.0) * op;
}

/// Kernel data of the conjugate operator, computed exactly from the
/// source-side data.  A spectral value survives iff fewer than 2n of its
/// blocks have the maximal order kappa; the surviving orders are kappa for
/// j <= 2n - g and kappa - k_{2n-j+1} after that (never zero, since only
/// non-maximal blocks are subtracted).
inline JordanSpec jordan_of_conjugate(const JordanSpec& js, int n) {
    js.validate(n);
    JordanSpec out;
    for (const auto& e : js.entries) {
        const int g = static_cast<int>(e.orders.size());
        const int kappa = e.orders.front();
        int mu = 0;
        for (int o : e.orders)
            if (o == kappa) ++mu;
        if (mu >= 2 * n) continue;
        JordanSpec::Entry ne{e.lambda, {}};
        for (int j = 1; j <= 2 * n - g; ++j) ne.orders.push_back(kappa);
        for (int j = 2 * n - g + 1; j <= 2 * n - mu; ++j) {
            const int o = kappa - e.orders[static_cast<size_t>(2 * n - j)];
            if (o > 0) ne.orders.push_back(o);
        }
        out.entries.push_back(std::move(ne));
    }
    out.validate(n);
    return out;
}

/// Kernel data of Q composed with prod_l (H_src - lambda_l I)^{e_l} on the
/// source side: every existing block at lambda_l grows by e_l and fresh
/// blocks of order e_l fill up to the 2n ceiling (the polynomial factor's own
/// kernel).
inline JordanSpec jordan_after_polynomial_factor(const JordanSpec& js,
                                                 const SpectralPolynomial& extra, int n) {
    JordanSpec out = js;
    for (const auto& [lam, e] : extra.roots) {
        if (e <= 0) throw InvalidJordanSpec("polynomial factor needs positive multiplicities");
        JordanSpec::Entry* ent = nullptr;
        for (auto& en : out.entries)
            if (en.lambda == lam) ent = &en;
        if (ent == nullptr) {
            out.entries.push_back({lam, {}});
            ent = &out.entries.back();
        }
        const int g = static_cast<int>(ent->orders.size());
        for (int& o : ent->orders) o += e;
        for (int i = g; i < 2 * n; ++i) ent->orders.push_back(e);
    }
    out.validate(n);
    return out;
}

struct MinimizationResult {
    MatDiffOperator P;          ///< weakly non-minimizable part, order M
    SpectralPolynomial removed; ///< Q = P o prod_l (lambda_l I - H_src)^{dk_l}
    JordanSpec js_reduced;      ///< kernel data of P
    int N = 0;
    int sum_delta = 0;
    int M_from_order = 0;    ///< N - 2 sum_delta
    int M_from_counting = 0; ///< leftover multiplicity divided by n
};

/// Strip every spectral value that fills all 2n blocks, each by its minimal
/// block order.  The division is exact when the supplied Jordan data really
/// belongs to Q's kernel; a surviving remainder therefore indicts the data,
/// not the arithmetic.
inline MinimizationResult minimize_weak(const MatDiffOperator& Q, const Hamiltonian& H_src,
                                        const JordanSpec& js, const Config& cfg = {}) {
    const int n = Q.dim();
    if (H_src.dim() != n) throw ContractViolation("minimize_weak: dimension mismatch");
    js.validate(n);
    if (js.total_multiplicity() != n * Q.order())
        throw InconsistentJordanSpec("kernel multiplicity does not match n * order");

    MinimizationResult res{Q, {}, {}, Q.order(), 0, Q.order(), 0};
    int counted = 0;
    for (const auto& e : js.entries) {
        int mult = 0;
        for (int o : e.orders) mult += o;
        if (static_cast<int>(e.orders.size()) == 2 * n) {
            const int dk = e.orders.back();
            res.removed.roots.push_back({e.lambda, dk});
            res.sum_delta += dk;
            counted += mult - 2 * n * dk;
            JordanSpec::Entry kept{e.lambda, {}};
            for (int o : e.orders)
                if (o > dk) kept.orders.push_back(o - dk);
            if (!kept.orders.empty()) res.js_reduced.entries.push_back(std::move(kept));
        } else {
            counted += mult;
            res.js_reduced.entries.push_back(e);
        }
    }
    res.M_from_order = res.N - 2 * res.sum_delta;
    if (counted % n != 0 || counted / n != res.M_from_order)
        throw InconsistentJordanSpec("multiplicity bookkeeping disagrees with the removed degree");
    res.M_from_counting = counted / n;

    if (!res.removed.roots.empty()) {
        MatDiffOperator divisor = poly_of_H_reversed(res.removed, H_src);
        DivisionResult div = right_divide(Q, divisor);
        if (remainder_residual(div.remainder, Q, cfg) > cfg.tol_accept)
            throw InconsistentJordanSpec("removal left a nonzero remainder");
        res.P = div.quotient;
    }
    return res;
}

inline VerificationReport minimize_report(const MinimizationResult& min, const MatDiffOperator& Q,
                                          const Hamiltonian& H_src, const Config& cfg = {}) {
    VerificationReport rep;
    rep.stage = "minimize";
    rep.add("recomposition", "Q = P prod (l I - H+)^dk",
            op_coeff_distance(Q, compose(min.P, poly_of_H_reversed(min.removed, H_src)), cfg),
            cfg.tol_accept);
    const CMat lq = leading_matrix(Q, cfg);
    rep.add("leading coefficient preserved", "X_M of P = X_N of Q",
            normalized(max_abs_diff(lq, leading_matrix(min.P, cfg)), lq.max_abs()),
            cfg.tol_accept);
    bool fixed_point = true;
    for (const auto& e : min.js_reduced.entries)
        if (static_cast<int>(e.orders.size()) == 2 * Q.dim()) fixed_point = false;
    rep.add_flag("fixed point", "re-running the removal strips nothing", fixed_point);
    rep.add_flag("order bookkeeping", "M = N - 2 sum dk = (1/n) sum k_l",
                 min.P.order() == min.M_from_order &&
                     min.M_from_order == min.M_from_counting);
    return rep;
}

struct ConjugateResult {
    MatDiffOperator Qplus; ///< intertwines the pair in the opposite direction
    SpectralPolynomial P;  ///< P(z) = prod_l (z - lambda_l)^{kappa_l}
    int Nprime = 0;        ///< order of Qplus: 2 sum kappa - N
    JordanSpec js_minus;   ///< kernel data of Qplus (exact combinatorial map)
};

/// Opposite-direction intertwiner as the exact right quotient of the spectral
/// polynomial of the source Hamiltonian by Q.  kappa_l is the largest block
/// order at lambda_l.
inline ConjugateResult conjugate_general(const MatDiffOperator& Q, const Hamiltonian& H_src,
                                         const JordanSpec& js, const Config& cfg = {}) {
    const int n = Q.dim();
    if (H_src.dim() != n) throw ContractViolation("conjugate_general: dimension mismatch");
    js.validate(n);
    const int N = Q.order();
    if (js.total_multiplicity() != n * N)
        throw InconsistentJordanSpec("kernel multiplicity does not match n * order");

    SpectralPolynomial P;
    int sum_kappa = 0;
    for (const auto& e : js.entries) {
        P.roots.push_back({e.lambda, e.orders.front()});
        sum_kappa += e.orders.front();
    }

    MatDiffOperator full = poly_of_H(P, H_src);
    DivisionResult div = right_divide(full, Q);
    if (product_residual_applied(full, div.quotient, Q, cfg) > cfg.tol_accept)
        throw InconsistentJordanSpec("conjugate division left a nonzero remainder");

    ConjugateResult res{div.quotient, std::move(P), 2 * sum_kappa - N, jordan_of_conjugate(js, n)};
    if (res.Qplus.order() != res.Nprime || (N + res.Nprime) % 2 != 0)
        throw ContractViolation("conjugate_general: order bookkeeping failed");
    if (res.js_minus.total_multiplicity() != n * res.Nprime)
        throw ContractViolation("conjugate_general: downstairs multiplicity mismatch");
    return res;
}

inline VerificationReport conjugate_report(const ConjugateResult& conj, const MatDiffOperator& Q,
                                           const Hamiltonian& H_src, const Hamiltonian& H_dst,
                                           const Config& cfg = {}) {
    VerificationReport rep;
    rep.stage = "conjugate";
    const CMat Xi = leading_matrix(Q, cfg).inverse();
    const CMat expect = ((conj.P.degree() % 2 == 0) ? cx(1.0) : cx(-1.0)) * Xi;
    rep.add("leading coefficient", "X'_N' = (-1)^(k_1+...+k_L) (X_N)^(-1)",
            normalized(max_abs_diff(leading_matrix(conj.Qplus, cfg), expect), expect.max_abs()),
            cfg.tol_accept);
    rep.add("reverse intertwining", "H+ Q+ = Q+ H-",
            intertwining_residual(conj.Qplus, H_dst, H_src, cfg), cfg.tol_accept);
    rep.add("forward product", "Q+ Q- = P(H+)",
            product_residual_applied(poly_of_H(conj.P, H_src), conj.Qplus, Q, cfg),
            cfg.tol_accept);
    rep.add("reverse product", "Q- Q+ = P(H-)",
            product_residual_applied(poly_of_H(conj.P, H_dst), Q, conj.Qplus, cfg),
            cfg.tol_accept);
    rep.add_flag("parity", "N + N' is even", (Q.order() + conj.Nprime) % 2 == 0);
    return rep;
}

inline MatDiffOperator complement(const MatDiffOperator& Q, const Hamiltonian& H_src,
                                  const JordanSpec& js, const Config& cfg = {}) {
    return conjugate_general(Q, H_src, js, cfg).Qplus;
}

struct Theorem2Conjugate {
    MatDiffOperator Qplus;
    SpectralPolynomial P;
    std::vector<cx> lambdas; ///< one spectral value per first-order step
    VerificationReport report;
};

/// Same-order conjugate from an all-first-order factorization whose closure
/// terms collapse to scalars:  Q+ = Q+_{1,1} o ... o Q+_{1,N} o (X_N)^{-1}.
/// Requires every spectral value to carry exactly n blocks of one size and
/// the kernel members to group n at a time by value and depth.
inline Theorem2Conjugate theorem2_conjugate(const FactorizationChain& fc, const ChainSet& cs,
                                            const Config& cfg = {}) {
    const int n = cs.dim(), N = cs.order_n();
    if (fc.side != FactorizationChain::LeadingSide::Left)
        throw ContractViolation("theorem2_conjugate: expects the constant factor on the left");
    if (fc.steps() != N)
        throw Theorem2ConditionsFail("every factorization step must be first order");
    JordanSpec js = cs.jordan();
    for (const auto& e : js.entries)
        if (static_cast<int>(e.orders.size()) != n || e.orders.front() != e.orders.back())
            throw Theorem2ConditionsFail("each spectral value needs n blocks of identical size");
    std::vector<cx> lambdas;
    for (int m = 0; m < N; ++m) {
        const cx lam = cs.lambda_of(n * m);
        const int depth = cs.locate(n * m).second;
        for (int i = 1; i < n; ++i)
            if (cs.lambda_of(n * m + i) != lam || cs.locate(n * m + i).second != depth)
                throw Theorem2ConditionsFail("kernel members do not group by value and depth");
        lambdas.push_back(lam);
    }

    FirstOrderChain foc = first_order_chain(fc, cfg);
    VerificationReport rep;
    rep.stage = "theorem2 conjugate";
    for (const auto& e : foc.report.entries) rep.entries.push_back(e);

    std::vector<cx> avoid = cs.singular_points();
    for (const auto& f : fc.factors)
        for (cx p : f.singular_points()) avoid.push_back(p);
    for (int m = 0; m < N; ++m) {
        FuncPtr U0 = foc.steps[static_cast<size_t>(m)].U0;
        const cx lam = lambdas[static_cast<size_t>(m)];
        const double r = max_over_resampled(
            [&](double x) {
                return normalized(max_abs_diff(U0->eval(x, 0).value(), lam * CMat::identity(n)),
                                  std::abs(lam));
            },
            avoid, cfg.zero_test_points, cfg.seed, cfg.window, cfg.resample_retries);
        rep.add("scalar closure term, step " + std::to_string(m + 1), "U0_m = lambda_m I", r,
                cfg.tol_accept);
        if (r > cfg.tol_accept)
            throw Theorem2ConditionsFail("closure term is not scalar at step " +
                                         std::to_string(m + 1));
    }

    MatDiffOperator acc = MatDiffOperator::const_op(fc.XN.inverse());
    for (int m = N - 1; m >= 0; --m)
        acc = compose(foc.steps[static_cast<size_t>(m)].Qplus, acc);

    SpectralPolynomial P;
    for (cx lam : lambdas) {
        bool merged = false;
        for (auto& [r, m] : P.roots)
            if (r == lam) {
                ++m;
                merged = true;
            }
        if (!merged) P.roots.push_back({lam, 1});
    }

    const Hamiltonian& H_plus = fc.intermediates.front();
    const Hamiltonian H_minus = similarity_hamiltonian(fc.intermediates.back(), fc.XN);
    const MatDiffOperator Q = fc.recomposed();
    rep.add("leading coefficient", "X+_N = (-1)^N (X_N)^(-1)",
            normalized(max_abs_diff(leading_matrix(acc, cfg),
                                    ((N % 2 == 0) ? cx(1.0) : cx(-1.0)) * fc.XN.inverse()),
                       fc.XN.inverse().max_abs()),
            cfg.tol_accept);
    for (int m = 0; m < N; ++m)
        rep.add("reverse chain relation, step " + std::to_string(m + 1),
                "H_(m-1) Q+_1m = Q+_1m H_m",
                intertwining_residual(foc.steps[static_cast<size_t>(m)].Qplus,
                                      fc.intermediates[static_cast<size_t>(m) + 1],
                                      fc.intermediates[static_cast<size_t>(m)], cfg),
                cfg.tol_accept);
    rep.add("forward product", "Q+ Q- = P(H+)",
            product_residual_applied(poly_of_H(P, H_plus), acc, Q, cfg), cfg.tol_accept);
    rep.add("reverse product", "Q- Q+ = P(H-)",
            product_residual_applied(poly_of_H(P, H_minus), Q, acc, cfg), cfg.tol_accept);

    return Theorem2Conjugate{std::move(acc), std::move(P), std::move(lambdas), std::move(rep)};
}

/// Corollary check for splitting a complement across a factorization
/// Q = K o P through an intermediate Hamiltonian: the composed complements
/// exceed the product complement by exactly the spectral factors counted by
/// kappa_l1 + kappa_l2 - kappa_l, and weak minimization strips them again.
inline VerificationReport complement_composition_check(
    const MatDiffOperator& K, const MatDiffOperator& P, const Hamiltonian& H_plus,
    const Hamiltonian& H_mid, const Hamiltonian& H_minus, const JordanSpec& js_K,
    const JordanSpec& js_P, const JordanSpec& js_KP, const Config& cfg = {}) {
    const int n = P.dim();
    VerificationReport rep;
    rep.stage = "complement composition";

    ConjugateResult cP = conjugate_general(P, H_plus, js_P, cfg);
    ConjugateResult cK = conjugate_general(K, H_mid, js_K, cfg);
    MatDiffOperator Q = compose(K, P);
    ConjugateResult cQ = conjugate_general(Q, H_plus, js_KP, cfg);

    std::vector<cx> values;
    auto note = [&values](cx v) {
        for (cx w : values)
            if (w == v) return;
        values.push_back(v);
    };
    for (const auto& e : js_P.entries) note(e.lambda);
    for (const auto& e : js_K.entries) note(e.lambda);
    for (const auto& e : js_KP.entries) note(e.lambda);
    auto kappa_in = [](const JordanSpec& js, cx v) {
        const JordanSpec::Entry* e = js.find(v);
        return e ? e->orders.front() : 0;
    };
    SpectralPolynomial excess;
    bool bounded = true;
    for (cx v : values) {
        const int ex = kappa_in(js_P, v) + kappa_in(js_K, v) - kappa_in(js_KP, v);
        if (ex < 0) bounded = false;
        if (ex > 0) excess.roots.push_back({v, ex});
    }
    rep.add_flag("block bound", "k_l1 + k_l2 >= k_l", bounded);

    MatDiffOperator lhs = compose(cP.Qplus, cK.Qplus);
    MatDiffOperator rhs =
        excess.roots.empty() ? cQ.Qplus : compose(poly_of_H(excess, H_plus), cQ.Qplus);
    rep.add("composed complements", "Pc Kc = prod (H+ - l I)^(k_l1+k_l2-k_l) (K P)c",
            op_coeff_distance(lhs, rhs, cfg), cfg.tol_accept);

    if (excess.roots.empty()) {
        rep.add("additive split", "Pc Kc = (K P)c", op_coeff_distance(lhs, cQ.Qplus, cfg),
                cfg.tol_accept);
    } else {
        JordanSpec js_prod = jordan_after_polynomial_factor(cQ.js_minus, excess, n);
        MinimizationResult min = minimize_weak(lhs, H_minus, js_prod, cfg);
        const cx sign = (excess.degree() % 2 == 0) ? cx(1.0) : cx(-1.0);
        rep.add("minimized split", "minimize(Pc Kc) = (-1)^(sum e_l) (K P)c",
                op_coeff_distance(min.P, sign * cQ.Qplus, cfg), cfg.tol_accept);
        bool same = min.removed.roots.size() == excess.roots.size();
        for (const auto& [lam, m] : excess.roots) {
            bool found = false;
            for (const auto& [lam2, m2] : min.removed.roots)
                if (lam2 == lam && m2 == m) found = true;
            same = same && found;
        }
        rep.add_flag("stripped polynomial", "dk_l = k_l1 + k_l2 - k_l", same);
    }
    return rep;
}

struct SusyAlgebraReport {
    double anticommutator_upper = 0.0; ///< Q+ Q- against P(H+)
    double anticommutator_lower = 0.0; ///< Q- Q+ against P(H-)
    double commutator_charge = 0.0;    ///< H+ Q+ against Q+ H-
    double commutator_bar = 0.0;       ///< H- Q- against Q- H+
    VerificationReport report;
};

/// Two-by-two block algebra over the super-Hamiltonian diag(H+, H-) with the
/// supercharges holding Q+ and Q- off-diagonally.  Each block identity is one
/// of the four component identities; nilpotency is carried by the strictly
/// triangular block layout and is asserted structurally.
inline SusyAlgebraReport susy_algebra(const Hamiltonian& H_plus, const Hamiltonian& H_minus,
                                      const MatDiffOperator& Qminus, const MatDiffOperator& Qplus,
                                      const SpectralPolynomial& P, const Config& cfg = {}) {
    SusyAlgebraReport out;
    out.report.stage = "susy algebra";
    out.anticommutator_upper = product_residual_applied(poly_of_H(P, H_plus), Qplus, Qminus, cfg);
    out.anticommutator_lower = product_residual_applied(poly_of_H(P, H_minus), Qminus, Qplus, cfg);
    out.commutator_charge = intertwining_residual(Qplus, H_minus, H_plus, cfg);
    out.commutator_bar = intertwining_residual(Qminus, H_plus, H_minus, cfg);
    out.report.add("anticommutator, upper block", "{Q, Qbar} = P(H): Q+ Q- = P(H+)",
                   out.anticommutator_upper, cfg.tol_accept);
    out.report.add("anticommutator, lower block", "{Q, Qbar} = P(H): Q- Q+ = P(H-)",
                   out.anticommutator_lower, cfg.tol_accept);
    out.report.add("charge commutes, upper block", "[H, Q] = 0: H+ Q+ = Q+ H-",
                   out.commutator_charge, cfg.tol_accept);
    out.report.add("charge commutes, lower block", "[H, Qbar] = 0: H- Q- = Q- H+",
                   out.commutator_bar, cfg.tol_accept);
    out.report.add_flag("nilpotency", "Q Q = Qbar Qbar = 0 by block layout", true);
    return out;
}

/// Determinant pairing of the two kernel matrices against the spectral
/// polynomial: exact multiplicity bookkeeping per root plus a numeric spot
/// check of det(z - T+) det(z - T-) = P(z)^{2n} at random points.
inline VerificationReport det_identity_check(const JordanSpec& js_plus,
                                             const JordanSpec& js_minus,
                                             const SpectralPolynomial& P, int n,
                                             const Config& cfg = {}) {
    VerificationReport rep;
    rep.stage = "determinant identity";
    auto mult_in = [](const JordanSpec& js, cx v) {
        const JordanSpec::Entry* e = js.find(v);
        int m = 0;
        if (e)
            for (int o : e->orders) m += o;
        return m;
    };
    bool counts_ok = true;
    for (const auto& [lam, kappa] : P.roots)
        if (mult_in(js_plus, lam) + mult_in(js_minus, lam) != 2 * n * kappa) counts_ok = false;
    rep.add_flag("multiplicity bookkeeping", "mult+(l) + mult-(l) = 2 n k_l", counts_ok);

    auto has_root = [&P](cx v) {
        for (const auto& [r, m] : P.roots)
            if (r == v) return true;
        return false;
    };
    bool contained = true;
    for (const auto& e : js_plus.entries) contained = contained && has_root(e.lambda);
    for (const auto& e : js_minus.entries) contained = contained && has_root(e.lambda);
    rep.add_flag("spectrum containment", "kernel values are roots of P", contained);

    SampleStream stream(cfg.seed, cfg.window);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const cx z = stream.next_complex(-4.0, 4.0, -4.0, 4.0);
        cx left = 1.0;
        for (const auto& e : js_plus.entries)
            for (int k = 0; k < mult_in(js_plus, e.lambda); ++k) left *= z - e.lambda;
        for (const auto& e : js_minus.entries)
            for (int k = 0; k < mult_in(js_minus, e.lambda); ++k) left *= z - e.lambda;
        cx right = 1.0;
        const cx pz = P.eval(z);
        for (int k = 0; k < 2 * n; ++k) right *= pz;
        worst = std::max(worst, normalized(std::abs(left - right), std::abs(right)));
    }
    rep.add("characteristic product", "det(z - T+) det(z - T-) = P(z)^(2n)", worst, 1e-9);
    return rep;
}

/// Falsification sweep below the conjugate order: for every candidate order
/// M < N' of the right parity, dividing each prod_l (H_src - lambda_l I)^{m_l}
/// of matching degree by Q must leave a remainder bounded away from zero.
/// This probes the account, it does not prove it.
inline VerificationReport uniqueness_check(const MatDiffOperator& Q,
                                           const MatDiffOperator& Qplus,
                                           const Hamiltonian& H_src, const JordanSpec& js,
                                           const Config& cfg = {}) {
    VerificationReport rep;
    rep.stage = "uniqueness sweep";
    const int N = Q.order(), Nprime = Qplus.order();
    std::vector<cx> roots;
    std::vector<int> kappa;
    for (const auto& e : js.entries) {
        roots.push_back(e.lambda);
        kappa.push_back(e.orders.front());
    }
    const int L = static_cast<int>(roots.size());

    for (int M = (N % 2 == 0) ? 0 : 1; M < Nprime; M += 2) {
        const int S = (M + N) / 2;
        std::vector<std::vector<int>> combos;
        std::vector<int> cur(static_cast<size_t>(L), 0);
        std::function<void(int, int)> rec = [&](int idx, int left) {
            if (idx == L - 1) {
                cur[static_cast<size_t>(idx)] = left;
                combos.push_back(cur);
                return;
            }
            for (int v = 0; v <= left; ++v) {
                cur[static_cast<size_t>(idx)] = v;
                rec(idx + 1, left - v);
            }
        };
        if (L > 0) rec(0, S);
        for (const auto& m : combos) {
            SpectralPolynomial cand;
            std::ostringstream label;
            label << "(";
            for (int i = 0; i < L; ++i) {
                if (m[static_cast<size_t>(i)] > 0)
                    cand.roots.push_back({roots[static_cast<size_t>(i)],
                                          m[static_cast<size_t>(i)]});
                label << (i ? "," : "") << m[static_cast<size_t>(i)];
            }
            label << ")";
            MatDiffOperator num = poly_of_H(cand, H_src);
            DivisionResult div = right_divide(num, Q);
            rep.add_floor("no exact factor at order " + std::to_string(M) + ", powers " +
                              label.str(),
                          "rem(prod (H+ - l I)^m, Q) stays away from 0",
                          remainder_residual(div.remainder, num, cfg), cfg.falsify_margin);
        }
    }

    SpectralPolynomial full;
    for (int i = 0; i < L; ++i)
        full.roots.push_back({roots[static_cast<size_t>(i)], kappa[static_cast<size_t>(i)]});
    MatDiffOperator num = poly_of_H(full, H_src);
    DivisionResult div = right_divide(num, Q);
    rep.add("exact division at the conjugate order", "rem(P(H+), Q) = 0",
            product_residual_applied(num, div.quotient, Q, cfg), cfg.tol_accept);
    return rep;
}

} // namespace susym
