#pragma once

#include <memory>

#include "susym/chains.hpp"

namespace susym {

/// Pointwise kernel solve behind the constructed operator's coefficients.
/// At each base point the nN x nN jet system
///   sum_{j<N} X_j(x) Phi_l^{(j)}(x) = -X_N Phi_l^{(N)}(x),   l = 1..nN
/// is solved once for all rows of all X_j; coefficients then index into the
/// cached solution.  Row l of the system matrix lists member l's components
/// and derivatives (the same layout as the Wronskian matrix), so solvability
/// at a point is exactly nonvanishing of W_N there.
class KernelSolve {
public:
    KernelSolve(ChainSet cs, CMat XN, Config cfg)
        : cs_(std::move(cs)), XN_(std::move(XN)), cfg_(cfg) {
        n_ = cs_.dim();
        N_ = cs_.order_n();
        if (XN_.rows() != n_ || XN_.cols() != n_)
            throw ContractViolation("KernelSolve: leading coefficient shape mismatch");
        XN_.inverse(); // reject degenerate leading coefficient up front
    }

    int dim() const { return n_; }
    int order() const { return N_; }
    const CMat& leading() const { return XN_; }
    const ChainSet& chain_set() const { return cs_; }

    /// Jet of coefficient X_j at (x0, K).
    MatrixJet coeff(int j, cx x0, int K) const {
        MatrixJet Y = solved(x0, K);
        MatrixJet X(n_, n_, x0, K);
        for (int r = 0; r < n_; ++r)
            for (int c = 0; c < n_; ++c) X(r, c) = Y(j * n_ + c, r);
        return X;
    }

private:
    MatrixJet solved(cx x0, int K) const {
        const std::pair<double, double> key{x0.real(), x0.imag()};
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = cache_.find(key);
            if (it != cache_.end() && it->second.order() >= K) return it->second.truncated(K);
        }
        const int m = n_ * N_;
        MatrixJet A(m, m, x0, K);
        MatrixJet B(m, n_, x0, K);
        for (int l = 0; l < m; ++l) {
            MatrixJet f = cs_.member(l)->eval(x0, K + N_);
            for (int j = 0; j < N_; ++j) {
                for (int c = 0; c < n_; ++c) A(l, j * n_ + c) = f(c, 0).truncated(K);
                f = f.derivative();
            }
            // f now holds Phi_l^{(N)} at order K
            for (int r = 0; r < n_; ++r) {
                Jet rhs(x0, K);
                for (int c = 0; c < n_; ++c) rhs = rhs + XN_(r, c) * f(c, 0).truncated(K);
                B(l, r) = -1.0 * rhs;
            }
        }
        MatrixJet Y = mat_jet_solve(A, B, cfg_.cond_threshold, cfg_.eps_pivot);
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = cache_.find(key);
            if (it == cache_.end() || it->second.order() < Y.order()) cache_.insert_or_assign(key, Y);
        }
        return Y;
    }

    ChainSet cs_;
    CMat XN_;
    Config cfg_;
    int n_ = 0, N_ = 0;
    mutable std::mutex mu_;
    mutable std::map<std::pair<double, double>, MatrixJet> cache_;
};

/// The order-N operator with leading coefficient X_N whose kernel is spanned
/// by the chain members.
inline MatDiffOperator build_intertwiner(const ChainSet& cs, CMat XN, const Config& cfg = {}) {
    auto solver = std::make_shared<KernelSolve>(cs, std::move(XN), cfg);
    const int n = solver->dim(), N = solver->order();
    std::vector<cx> poles = cs.singular_points();
    std::vector<FuncPtr> coeffs;
    for (int j = 0; j < N; ++j)
        coeffs.push_back(std::make_shared<LambdaFunc>(
            n, n, [solver, j](cx x0, int K) { return solver->coeff(j, x0, K); }, poles));
    coeffs.push_back(make_const_func(solver->leading()));
    return MatDiffOperator(n, std::move(coeffs));
}

inline MatDiffOperator build_intertwiner(const ChainSet& cs, const Config& cfg = {}) {
    return build_intertwiner(cs, CMat::identity(cs.dim()), cfg);
}

/// Partner potential  V_dst = X_N V_src X_N^{-1} + 2 X_{N-1}' X_N^{-1}.
/// The leading coefficient is read off pointwise (it must be constant for
/// the formula to apply; builder and division outputs satisfy this).
inline FuncPtr partner_potential(const MatDiffOperator& Q, FuncPtr V_src) {
    const int n = Q.dim();
    if (V_src->rows() != n || V_src->cols() != n)
        throw ContractViolation("partner_potential: potential shape mismatch");
    const int N = Q.order();
    FuncPtr lead = Q.coeff(N);
    FuncPtr sub = N >= 1 ? Q.coeff(N - 1) : nullptr;
    std::vector<cx> poles = Q.singular_points();
    for (cx p : V_src->singular_points()) poles.push_back(p);
    return std::make_shared<LambdaFunc>(
        n, n,
        [lead, sub, V_src, n](cx x0, int K) {
            const CMat XN = lead->eval(x0, 0).value();
            const CMat XNi = XN.inverse();
            MatrixJet acc = MatrixJet::from_const(XN, x0, K) * V_src->eval(x0, K) *
                            MatrixJet::from_const(XNi, x0, K);
            if (sub) {
                MatrixJet dsub = sub->eval(x0, K + 1).derivative();
                acc = acc + 2.0 * (dsub * MatrixJet::from_const(XNi, x0, K));
            }
            return acc;
        },
        poles);
}

inline Hamiltonian partner_hamiltonian(const MatDiffOperator& Q, const Hamiltonian& H_src) {
    return make_hamiltonian(partner_potential(Q, H_src.V));
}

/// Worst normalized magnitude of Q applied to the chain members (kernel
/// membership certificate).
inline double kernel_residual(const MatDiffOperator& Q, const ChainSet& cs, const Config& cfg = {}) {
    std::vector<cx> avoid = Q.singular_points();
    for (cx p : cs.singular_points()) avoid.push_back(p);
    SampleStream stream(cfg.seed, cfg.window);
    const auto pts = stream.draw_avoiding(cfg.sample_points, avoid);
    double worst = 0.0;
    for (int l = 0; l < cs.total(); ++l)
        for (double x : pts) {
            MatrixJet f = cs.member(l)->eval(x, Q.order());
            // cancellation scale: sum of term magnitudes
            double scale = 0.0;
            MatrixJet df = f;
            for (int j = 0; j <= Q.order(); ++j) {
                scale += Q.coeff(j)->eval(x, 0).value().one_norm() * df.truncated(0).value().max_abs();
                if (j < Q.order()) df = df.derivative();
            }
            const CMat img = Q.apply_to_jet(f).value();
            worst = std::max(worst, normalized(img.max_abs(), scale));
        }
    return worst;
}

/// Certificate that Q intertwines H_src with the partner it induces.
inline VerificationReport certify_intertwining(const MatDiffOperator& Q, const Hamiltonian& H_src,
                                               const Config& cfg = {}) {
    VerificationReport rep;
    rep.stage = "certify-intertwining";
    const Hamiltonian H_dst = partner_hamiltonian(Q, H_src);
    const double r = intertwining_residual(Q, H_src, H_dst, cfg);
    rep.add("intertwining", "Q H+ - H- Q = 0", r, cfg.tol_accept);
    return rep;
}

} // namespace susym
