#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <vector>

#include "susym/config.hpp"
#include "susym/func.hpp"

namespace susym {

/// Scalar associated-function chain defined by initial data and the coupled
/// ODEs  -phi_i'' + (v - lambda) phi_i = phi_{i-1}  (phi_{-1} = 0),
/// integrated from the anchor point by Taylor stepping of fixed order with
/// deterministic step control.  Accepted full steps are cached per direction
/// (append-only frontier); the final partial step toward a query point uses
/// the node's Taylor polynomials directly, so queries never perturb the grid.
class OdeScalarChain {
public:
    OdeScalarChain(FuncPtr v, cx lambda, std::vector<std::array<cx, 2>> seeds, double anchor,
                   Config cfg = {})
        : v_(std::move(v)), lambda_(lambda), anchor_(anchor), cfg_(cfg) {
        if (v_->rows() != 1 || v_->cols() != 1)
            throw ContractViolation("OdeScalarChain: potential must be scalar");
        if (seeds.empty()) throw ContractViolation("OdeScalarChain: no seeds");
        p_ = static_cast<int>(seeds.size());
        Node root;
        root.x = anchor_;
        for (const auto& s : seeds) {
            root.val.push_back(s[0]);
            root.der.push_back(s[1]);
        }
        fwd_.push_back(root);
        bwd_.push_back(root);
    }

    int length() const { return p_; }

    /// Jet of member i at a real point, any order.
    Jet member_jet(int i, double x, int order) const {
        if (i < 0 || i >= p_) throw ContractViolation("OdeScalarChain: member index out of range");
        std::lock_guard<std::mutex> lock(mu_);
        auto [val, der] = state_at(x);
        auto jets = jets_at(x, val, der, order);
        return jets[static_cast<size_t>(i)];
    }

private:
    struct Node {
        double x = 0.0;
        std::vector<cx> val, der;
    };

    std::vector<Jet> jets_at(double x, const std::vector<cx>& val, const std::vector<cx>& der,
                             int order) const {
        const int K = std::max(order, 2);
        const Jet w = v_->eval(x, K)(0, 0) - lambda_;
        std::vector<Jet> jets;
        jets.reserve(static_cast<size_t>(p_));
        for (int i = 0; i < p_; ++i) {
            Jet c(cx{x}, K);
            c.set_coeff(0, val[static_cast<size_t>(i)]);
            if (K >= 1) c.set_coeff(1, der[static_cast<size_t>(i)]);
            for (int k = 0; k + 2 <= K; ++k) {
                cx conv{};
                for (int j = 0; j <= k; ++j) conv += w.coeff(j) * c.coeff(k - j);
                if (i > 0) conv -= jets[static_cast<size_t>(i) - 1].coeff(k);
                c.set_coeff(k + 2, conv / static_cast<double>((k + 1) * (k + 2)));
            }
            jets.push_back(c.truncated(order));
        }
        return jets;
    }

    /// Deterministic step size from the node state alone.
    double step_size(const std::vector<Jet>& jets) const {
        const int P = cfg_.ode_taylor_order;
        double scale = 1.0;
        for (const auto& j : jets) scale = std::max(scale, std::abs(j.coeff(0)));
        double h = 0.5;
        for (int iter = 0; iter < 60; ++iter) {
            double err = 0.0;
            for (const auto& j : jets)
                err = std::max(err, std::abs(j.coeff(P)) * std::pow(h, P) +
                                        std::abs(j.coeff(P - 1)) * std::pow(h, P - 1));
            if (err <= cfg_.ode_local_tol * scale) return h;
            h *= 0.6;
            if (h < cfg_.ode_min_step)
                throw IntegrationFailure("step size underflow in chain integration");
        }
        throw IntegrationFailure("step size control failed to settle");
    }

    std::pair<std::vector<cx>, std::vector<cx>> state_at(double x) const {
        const int dir = x >= anchor_ ? +1 : -1;
        auto& frontier = dir > 0 ? fwd_ : bwd_;
        const int P = cfg_.ode_taylor_order;
        // last cached node not past x
        size_t idx = frontier.size() - 1;
        while (idx > 0 && (dir > 0 ? frontier[idx].x > x : frontier[idx].x < x)) --idx;
        if (idx + 1 < frontier.size()) {
            // x lies inside an accepted step; the node's polynomials cover it
            const Node& node = frontier[idx];
            auto jets = jets_at(node.x, node.val, node.der, P);
            return shift_state(jets, cx{x - node.x});
        }
        for (;;) {
            const Node& node = frontier.back();
            auto jets = jets_at(node.x, node.val, node.der, P);
            const double h = step_size(jets);
            if (std::abs(x - node.x) <= h) return shift_state(jets, cx{x - node.x});
            Node next;
            next.x = node.x + dir * h;
            auto [val, der] = shift_state(jets, cx{dir * h});
            next.val = std::move(val);
            next.der = std::move(der);
            frontier.push_back(std::move(next));
        }
    }

    static std::pair<std::vector<cx>, std::vector<cx>> shift_state(const std::vector<Jet>& jets,
                                                                   cx dx) {
        std::vector<cx> val, der;
        for (const auto& j : jets) {
            val.push_back(j.eval_shift(dx));
            der.push_back(j.derivative().eval_shift(dx));
        }
        return {val, der};
    }

    FuncPtr v_;
    cx lambda_;
    double anchor_;
    int p_ = 0;
    Config cfg_;
    mutable std::mutex mu_;
    mutable std::vector<Node> fwd_, bwd_;
};

/// Chain members as 1x1 evaluators backed by a shared integrator.
inline std::vector<FuncPtr> chain_from_scalar(FuncPtr v, cx lambda,
                                              std::vector<std::array<cx, 2>> seeds, double anchor,
                                              Config cfg = {}) {
    auto impl = std::make_shared<OdeScalarChain>(std::move(v), lambda, std::move(seeds), anchor, cfg);
    std::vector<FuncPtr> members;
    for (int i = 0; i < impl->length(); ++i)
        members.push_back(std::make_shared<LambdaFunc>(
            1, 1,
            [impl, i](cx x0, int K) {
                if (x0.imag() != 0.0)
                    throw ContractViolation("ODE-backed chain members evaluate on the real axis only");
                MatrixJet m(1, 1, x0, K);
                m(0, 0) = impl->member_jet(i, x0.real(), K);
                return m;
            }));
    return members;
}

} // namespace susym
