#pragma once

#include <string>

#include "susym/builder.hpp"

namespace susym {

/// Leading coefficient of an operator read at a drawn sample point (for
/// operators whose leading is constant by construction).
inline CMat leading_matrix(const MatDiffOperator& Q, const Config& cfg = {}) {
    SampleStream stream(cfg.seed, cfg.window);
    const double x = stream.draw_avoiding(1, Q.singular_points()).at(0);
    return Q.coeff(Q.order())->eval(x, 0).value();
}

/// Factorization of Q = X_N * (factor_M o ... o factor_1) into steps with
/// leading coefficient I, with the intermediate Hamiltonians H_0 = H_src,
/// ..., H_M linked by  factor_m H_{m-1} = H_m factor_m.  A mirrored variant
/// places the constant X_N on the right instead.
struct FactorizationChain {
    enum class LeadingSide { Left, Right };

    std::vector<MatDiffOperator> factors;
    std::vector<Hamiltonian> intermediates;
    std::vector<int> ladder;
    CMat XN;
    LeadingSide side = LeadingSide::Left;

    int steps() const { return static_cast<int>(factors.size()); }

    /// factor_upto o ... o factor_1 (all steps when upto < 0).
    MatDiffOperator composed(int upto = -1) const {
        const int m = upto < 0 ? steps() : upto;
        if (m < 1) throw ContractViolation("FactorizationChain: nothing to compose");
        MatDiffOperator acc = factors[0];
        for (int i = 1; i < m; ++i) acc = compose(factors[static_cast<size_t>(i)], acc);
        return acc;
    }

    /// The full operator the chain recomposes to.
    MatDiffOperator recomposed() const {
        MatDiffOperator inner = composed();
        return side == LeadingSide::Left ? left_mul(XN, inner)
                                         : compose(inner, MatDiffOperator::const_op(XN));
    }
};

inline double op_norm_resampled(const MatDiffOperator& A, const Config& cfg) {
    return max_over_resampled(
        [&](double x) {
            double worst = 0.0;
            for (int j = 0; j <= A.order(); ++j)
                worst = std::max(worst, normalized(A.coeff(j)->eval(x, 0).value().max_abs(), 0.0));
            return worst;
        },
        A.singular_points(), cfg.sample_points, cfg.seed, cfg.window, cfg.resample_retries);
}

/// Remainder magnitude relative to the dividend's coefficient scale at the
/// same points (exact divisions leave only cancellation noise).
inline double remainder_residual(const MatDiffOperator& R, const MatDiffOperator& A,
                                 const Config& cfg) {
    std::vector<cx> avoid = R.singular_points();
    for (cx p : A.singular_points()) avoid.push_back(p);
    return max_over_resampled(
        [&](double x) {
            double scale = 0.0, mag = 0.0;
            for (int j = 0; j <= A.order(); ++j)
                scale = std::max(scale, A.coeff(j)->eval(x, 0).value().max_abs());
            for (int j = 0; j <= R.order(); ++j)
                mag = std::max(mag, R.coeff(j)->eval(x, 0).value().max_abs());
            return normalized(mag, scale);
        },
        avoid, cfg.sample_points, cfg.seed, cfg.window, cfg.resample_retries);
}

inline FactorizationChain factorize(const MatDiffOperator& Q, const ChainSet& cs,
                                    std::vector<int> ladder, const Config& cfg = {}) {
    const int n = cs.dim(), N = cs.order_n();
    if (Q.dim() != n || Q.order() != N)
        throw ContractViolation("factorize: operator does not match chain set");
    if (ladder.empty() || ladder.back() != N) throw ContractViolation("factorize: ladder must end at N");
    for (size_t i = 0; i < ladder.size(); ++i) {
        if (ladder[i] < 1 || ladder[i] > N) throw ContractViolation("factorize: ladder entry out of range");
        if (i > 0 && ladder[i] <= ladder[i - 1])
            throw ContractViolation("factorize: ladder must increase strictly");
    }
    const auto good = nonvanishing_ladder(cs, cfg);
    for (size_t i = 0; i + 1 < ladder.size(); ++i)
        if (std::find(good.begin(), good.end(), ladder[i]) == good.end())
            throw DegenerateBasis("ladder step " + std::to_string(ladder[i]) +
                                  " has identically vanishing Wronskian");

    FactorizationChain fc;
    fc.ladder = ladder;
    fc.XN = leading_matrix(Q, cfg);
    fc.intermediates.push_back(cs.hamiltonian());

    MatDiffOperator prev_hat = MatDiffOperator::const_op(CMat::identity(n));
    for (size_t m = 0; m < ladder.size(); ++m) {
        MatDiffOperator hat = build_intertwiner(cs.prefix(n * ladder[m]), cfg);
        MatDiffOperator factor = m == 0 ? hat : [&] {
            DivisionResult div = right_divide(hat, prev_hat);
            if (remainder_residual(div.remainder, hat, cfg) > cfg.tol_accept)
                throw FactorizationResidual("division remainder above tolerance in factor step");
            return div.quotient;
        }();
        fc.factors.push_back(factor);
        fc.intermediates.push_back(partner_hamiltonian(factor, fc.intermediates.back()));
        prev_hat = hat;
    }
    return fc;
}

/// Certificate for a factorization: recomposition on probes, the chain
/// intertwinings, kernel annihilation per step, and transport of each kernel
/// member's spectral value through the partial compositions.
inline VerificationReport factorization_report(const FactorizationChain& fc,
                                               const MatDiffOperator& Q, const ChainSet& cs,
                                               const Config& cfg = {}) {
    VerificationReport rep;
    rep.stage = "factorize";
    const int n = cs.dim();

    std::vector<cx> avoid = Q.singular_points();
    for (const auto& f : fc.factors)
        for (cx p : f.singular_points()) avoid.push_back(p);
    for (cx p : cs.singular_points()) avoid.push_back(p);

    {
        MatDiffOperator R = fc.recomposed();
        const auto probes = probe_battery(n);
        const double r = max_over_resampled(
            [&](double x) {
                double worst = 0.0;
                for (const auto& f : probes) {
                    const CMat va = Q.apply(f, x, 0).value();
                    const CMat vb = R.apply(f, x, 0).value();
                    worst = std::max(worst,
                                     normalized(max_abs_diff(va, vb), std::max(va.max_abs(), vb.max_abs())));
                }
                return worst;
            },
            avoid, cfg.sample_points, cfg.seed, cfg.window, cfg.resample_retries);
        rep.add("recomposition", "Q = X_N Q_M ... Q_1", r, cfg.tol_accept);
    }

    for (int m = 0; m < fc.steps(); ++m) {
        const double r = intertwining_residual(fc.factors[static_cast<size_t>(m)],
                                               fc.intermediates[static_cast<size_t>(m)],
                                               fc.intermediates[static_cast<size_t>(m) + 1], cfg);
        rep.add("step intertwining " + std::to_string(m + 1), "Q_m H_{m-1} = H_m Q_m", r,
                cfg.tol_accept);
    }

    for (int m = 0; m < fc.steps(); ++m) {
        MatDiffOperator C = fc.composed(m + 1);
        const double r = kernel_residual(C, cs.prefix(n * fc.ladder[static_cast<size_t>(m)]), cfg);
        rep.add("kernel annihilation " + std::to_string(m + 1), "Q_m ... Q_1 Phi_l = 0", r,
                cfg.tol_accept);
    }

    // spectral-value transport: images of step-m kernel members under the
    // partial composition still satisfy the chain relations for their lambda
    // against the intermediate Hamiltonian.
    {
        double worst = 0.0;
        for (int m = 1; m < fc.steps(); ++m) {
            MatDiffOperator C = fc.composed(m);
            MatDiffOperator Hop = fc.intermediates[static_cast<size_t>(m)].op();
            const int lo = n * fc.ladder[static_cast<size_t>(m) - 1];
            const int hi = n * fc.ladder[static_cast<size_t>(m)];
            for (int l = lo; l < hi; ++l) {
                FuncPtr img = C.applied(cs.member(l));
                const int p = cs.predecessor(l);
                FuncPtr pre = p >= 0 ? C.applied(cs.member(p)) : nullptr;
                const cx lambda = cs.lambda_of(l);
                worst = std::max(
                    worst,
                    max_over_resampled(
                        [&](double x) {
                            CMat v = Hop.apply(img, x, 0).value() - lambda * img->eval(x, 0).value();
                            CMat e = pre ? pre->eval(x, 0).value() : CMat::zero(n, 1);
                            return normalized(max_abs_diff(v, e), std::max(v.max_abs(), e.max_abs()));
                        },
                        avoid, cfg.sample_points, cfg.seed, cfg.window, cfg.resample_retries));
            }
        }
        rep.add("spectral transport", "(H_m - lambda) C Phi = C Phi_prev", worst, cfg.tol_accept);
    }
    return rep;
}

/// One first-order step with its closure operator and the matrix U_{0,j}
/// linking them:  H_{j-1} = Qplus Qminus + U0.
struct FirstOrderStep {
    MatDiffOperator Qminus;
    MatDiffOperator Qplus;
    FuncPtr U0;
};

struct FirstOrderChain {
    std::vector<FirstOrderStep> steps;
    VerificationReport report;
};

/// Remark-style closure data for an all-first-order factorization:
/// Qplus_j = -I d + X_{0,j},  U_{0,j} = V_{j-1} - X_{0,j}^2 + X_{0,j}',
/// verifying the closure identity and the commutation [U_{0,j}, Qminus_j] = 0.
inline FirstOrderChain first_order_chain(const FactorizationChain& fc, const Config& cfg = {}) {
    const int M = fc.steps();
    for (const auto& f : fc.factors)
        if (f.order() != 1) throw ContractViolation("first_order_chain: all factors must be order 1");
    FirstOrderChain out;
    out.report.stage = "first-order-chain";
    const int n = fc.factors[0].dim();
    for (int j = 0; j < M; ++j) {
        const MatDiffOperator& Qm = fc.factors[static_cast<size_t>(j)];
        FuncPtr X0 = Qm.coeff(0);
        MatDiffOperator Qp(n, {X0, make_const_func(-1.0 * CMat::identity(n))});
        FuncPtr Vprev = fc.intermediates[static_cast<size_t>(j)].V;
        std::vector<cx> poles = Qm.singular_points();
        for (cx p : Vprev->singular_points()) poles.push_back(p);
        FuncPtr U0 = std::make_shared<LambdaFunc>(
            n, n,
            [Vprev, X0](cx x0, int K) {
                MatrixJet x = X0->eval(x0, K);
                MatrixJet dx = X0->eval(x0, K + 1).derivative();
                return Vprev->eval(x0, K) - x * x + dx;
            },
            poles);

        MatDiffOperator U0op(n, {U0});
        const double closure =
            op_coeff_distance(compose(Qp, Qm) + U0op, fc.intermediates[static_cast<size_t>(j)].op(), cfg);
        out.report.add("closure " + std::to_string(j + 1), "H_{j-1} = Q+ Q- + U0", closure,
                       cfg.tol_accept);
        const double comm = op_coeff_distance(compose(U0op, Qm), compose(Qm, U0op), cfg);
        out.report.add("commutation " + std::to_string(j + 1), "[U0, Q-] = 0", comm, cfg.tol_accept);

        out.steps.push_back({Qm, Qp, U0});
    }
    return out;
}

/// Conjugated factorization with the constant leading factor moved to the
/// right:  Q = (X Q_M X^{-1}) o ... o (X Q_1 X^{-1}) o X.
inline FactorizationChain mirror_factorization(const FactorizationChain& fc) {
    if (fc.side != FactorizationChain::LeadingSide::Left)
        throw ContractViolation("mirror_factorization: chain already mirrored");
    const CMat X = fc.XN;
    const CMat Xi = X.inverse();
    const int n = X.rows();
    FactorizationChain out;
    out.ladder = fc.ladder;
    out.XN = X;
    out.side = FactorizationChain::LeadingSide::Right;
    for (const auto& f : fc.factors)
        out.factors.push_back(compose(left_mul(X, f), MatDiffOperator::const_op(Xi)));
    for (const auto& H : fc.intermediates) {
        FuncPtr V = H.V;
        out.intermediates.push_back(make_hamiltonian(std::make_shared<LambdaFunc>(
            n, n,
            [V, X, Xi, n](cx x0, int K) {
                return MatrixJet::from_const(X, x0, K) * V->eval(x0, K) *
                       MatrixJet::from_const(Xi, x0, K);
            },
            V->singular_points())));
    }
    return out;
}

struct ReductionResult {
    MatDiffOperator K;
    MatDiffOperator P;
    Hamiltonian H_mid;
};

/// Split Q = K o P across an intermediate Hamiltonian, with P built from the
/// first nM kernel members.  The prefix Wronskian must be nonzero at every
/// scanned point of the window; any detected zero means the would-be factor
/// coefficients have a pole on the axis.
inline ReductionResult reduce(const MatDiffOperator& Q, const ChainSet& cs, int M,
                              const Config& cfg = {}) {
    const int n = cs.dim(), N = cs.order_n();
    if (M < 1 || M > N) throw ContractViolation("reduce: M out of range");

    ChainSet prefix = cs.prefix(n * M);
    FuncPtr W = prefix_wronskian(prefix, M);
    std::vector<double> scan = uniform_grid(cfg.window, cfg.axis_scan_points);
    {
        SampleStream stream(cfg.seed, cfg.window);
        for (double x : stream.draw_avoiding(cfg.zero_test_points, cs.singular_points()))
            scan.push_back(x);
    }
    for (double x : scan) {
        const double scale = std::max(wronskian_scale(prefix, M, x), 1e-300);
        if (std::abs(W->eval(x, 0).value()(0, 0)) <= cfg.tol_zero * scale)
            throw NotRegularlyReducible("prefix Wronskian vanishes on the axis");
    }

    MatDiffOperator P = build_intertwiner(prefix, cfg);
    DivisionResult div = right_divide(Q, P);
    if (remainder_residual(div.remainder, Q, cfg) > cfg.tol_accept)
        throw FactorizationResidual("reduction remainder above tolerance");
    Hamiltonian H_mid = partner_hamiltonian(P, cs.hamiltonian());
    return {div.quotient, P, H_mid};
}

inline VerificationReport reduction_report(const ReductionResult& red, const MatDiffOperator& Q,
                                           const Hamiltonian& H_src, const Hamiltonian& H_dst,
                                           const Config& cfg = {}) {
    VerificationReport rep;
    rep.stage = "reduce";
    rep.add("recomposition", "Q = K P", op_coeff_distance(Q, compose(red.K, red.P), cfg),
            cfg.tol_accept);
    rep.add("inner intertwining", "P H+ = H_M P",
            intertwining_residual(red.P, H_src, red.H_mid, cfg), cfg.tol_accept);
    rep.add("outer intertwining", "K H_M = H- K",
            intertwining_residual(red.K, red.H_mid, H_dst, cfg), cfg.tol_accept);
    return rep;
}

struct IrreducibleExample {
    ChainSet cs;
    MatDiffOperator Q;
    VerificationReport certificate;
};

/// Diagonal construction whose proper prefix Wronskians vanish identically:
/// stacked scalar chains of lengths N(n-c), one spectral value.  The
/// certificate records the sign identity for the full Wronskian, the
/// identically-zero prefix Wronskians, and reduce() refusing every proper
/// split.  This certifies the exhibited obstruction at the scanned points; it
/// is numerical evidence, not a proof over all factorizations.
inline IrreducibleExample irreducible_example(const std::vector<ScalarChain>& comps, int N,
                                              const Config& cfg = {}) {
    const int n = static_cast<int>(comps.size());
    ChainSet cs = assemble_diag(comps, N);

    VerificationReport rep;
    rep.stage = "irreducible-example";

    // scalar Wronskians W_{c,N} of the first N members of each component
    std::vector<FuncPtr> Wc;
    std::vector<ChainSet> scalar_sets;
    for (int c = 0; c < n; ++c) {
        Chain ch{comps[static_cast<size_t>(c)].lambda, {}};
        ch.members.assign(comps[static_cast<size_t>(c)].members.begin(),
                          comps[static_cast<size_t>(c)].members.begin() + N);
        ChainSet scs(make_hamiltonian(comps[static_cast<size_t>(c)].potential), {std::move(ch)});
        Wc.push_back(prefix_wronskian(scs, N));
        scalar_sets.push_back(std::move(scs));
    }
    {
        SampleStream stream(cfg.seed, cfg.window);
        const auto pts = stream.draw_avoiding(cfg.zero_test_points, cs.singular_points());
        for (int c = 0; c < n; ++c)
            for (double x : pts) {
                const double scale = std::max(wronskian_scale(scalar_sets[static_cast<size_t>(c)], N, x), 1e-300);
                if (std::abs(Wc[static_cast<size_t>(c)]->eval(x, 0).value()(0, 0)) <= cfg.tol_zero * scale)
                    throw BadScalarData("component Wronskian vanishes at a sample point");
            }

        // full stacked Wronskian against the signed product of the scalar ones
        const int e = (n * (n - 1) * N * (N - 1) / 4) % 2;
        const double sign = e ? -1.0 : 1.0;
        FuncPtr Wfull = prefix_wronskian(cs, N);
        double worst = 0.0;
        for (double x : pts) {
            cx lhs = Wfull->eval(x, 0).value()(0, 0);
            cx rhs = sign;
            for (int c = 0; c < n; ++c) rhs *= Wc[static_cast<size_t>(c)]->eval(x, 0).value()(0, 0);
            worst = std::max(worst, normalized(std::abs(lhs - rhs), std::max(std::abs(lhs), std::abs(rhs))));
        }
        rep.add("stacked wronskian sign identity",
                "W = (-1)^{n(n-1)N(N-1)/4} W_{1,N} ... W_{n,N}", worst, cfg.tol_accept);

        // proper prefixes vanish identically at every scanned point
        for (int M = 1; M < N; ++M) {
            FuncPtr Wm = prefix_wronskian(cs, M);
            double worst_ratio = 0.0;
            for (double x : pts) {
                const double scale = std::max(wronskian_scale(cs.prefix(n * M), M, x), 1e-300);
                worst_ratio = std::max(worst_ratio,
                                       std::abs(Wm->eval(x, 0).value()(0, 0)) / scale);
            }
            rep.add("prefix wronskian " + std::to_string(M) + " identically zero", "W_M = 0",
                    worst_ratio, cfg.tol_zero);
        }
    }

    MatDiffOperator Q = build_intertwiner(cs, cfg);
    {
        VerificationReport ic = certify_intertwining(Q, cs.hamiltonian(), cfg);
        for (auto& e : ic.entries) rep.entries.push_back(e);
    }
    for (int M = 1; M < N; ++M) {
        bool refused = false;
        try {
            reduce(Q, cs, M, cfg);
        } catch (const NotRegularlyReducible&) {
            refused = true;
        }
        rep.add_flag("reduce refuses M=" + std::to_string(M), "no regular split at M", refused);
    }
    return {std::move(cs), std::move(Q), std::move(rep)};
}

} // namespace susym
