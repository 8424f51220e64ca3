#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "susym/diffop.hpp"

namespace susym {

/// Jordan data: spectral values with nonincreasing block orders.
struct JordanSpec {
    struct Entry {
        cx lambda;
        std::vector<int> orders;
    };
    std::vector<Entry> entries;

    int total_multiplicity() const {
        int t = 0;
        for (const auto& e : entries)
            for (int o : e.orders) t += o;
        return t;
    }

    const Entry* find(cx lambda) const {
        for (const auto& e : entries)
            if (e.lambda == lambda) return &e;
        return nullptr;
    }

    /// Distinct spectral values, positive nonincreasing orders, and at most
    /// 2n blocks per value when attached to an n-dimensional problem.
    void validate(int n) const {
        for (size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            if (e.orders.empty()) throw InvalidJordanSpec("spectral value with no blocks");
            for (size_t j = 0; j + 1 < e.orders.size(); ++j)
                if (e.orders[j] < e.orders[j + 1])
                    throw InvalidJordanSpec("block orders must be nonincreasing");
            for (int o : e.orders)
                if (o <= 0) throw InvalidJordanSpec("block orders must be positive");
            if (static_cast<int>(e.orders.size()) > 2 * n)
                throw InvalidJordanSpec("more than 2n blocks for one spectral value");
            for (size_t j = i + 1; j < entries.size(); ++j)
                if (entries[j].lambda == e.lambda)
                    throw InvalidJordanSpec("repeated spectral value");
        }
    }
};

/// One chain of formal associated vector-functions: (H - lambda) member_0 = 0,
/// (H - lambda) member_i = member_{i-1}.
struct Chain {
    cx lambda;
    std::vector<FuncPtr> members;
};

/// A Hamiltonian together with chains whose flattened members are the kernel
/// basis of the operator under construction.  Flat ordering groups chains by
/// spectral value (first-appearance order) and walks each group depth-major:
/// all depth-0 members, then depth-1, and so on.  Each chain's members thus
/// appear in increasing depth, so every flat prefix splits into chain
/// depth-prefixes (which are themselves chains), and members sharing a
/// spectral value and depth sit consecutively.
class ChainSet {
public:
    ChainSet(Hamiltonian H, std::vector<Chain> chains)
        : H_(std::move(H)), chains_(std::move(chains)) {
        const int n = H_.dim();
        int max_len = 0;
        for (size_t c = 0; c < chains_.size(); ++c) {
            if (chains_[c].members.empty()) throw InvalidChain("empty chain");
            for (const auto& m : chains_[c].members)
                if (!m || m->rows() != n || m->cols() != 1)
                    throw InvalidChain("chain member must be an n-vector function");
            max_len = std::max(max_len, static_cast<int>(chains_[c].members.size()));
        }
        std::vector<cx> groups;
        for (const auto& ch : chains_)
            if (std::find(groups.begin(), groups.end(), ch.lambda) == groups.end())
                groups.push_back(ch.lambda);
        for (cx lambda : groups)
            for (int d = 0; d < max_len; ++d)
                for (size_t c = 0; c < chains_.size(); ++c)
                    if (chains_[c].lambda == lambda &&
                        d < static_cast<int>(chains_[c].members.size()))
                        flat_.push_back({static_cast<int>(c), d});
        if (flat_.empty()) throw InvalidChain("no chain members");
    }

    int dim() const { return H_.dim(); }
    int total() const { return static_cast<int>(flat_.size()); }

    /// Order N of the operator the set characterizes (total = n * N).
    int order_n() const {
        if (total() % dim() != 0)
            throw InvalidChain("member count not divisible by dimension");
        return total() / dim();
    }

    const Hamiltonian& hamiltonian() const { return H_; }
    const std::vector<Chain>& chains() const { return chains_; }

    std::pair<int, int> locate(int flat) const { return flat_.at(static_cast<size_t>(flat)); }
    const FuncPtr& member(int flat) const {
        auto [c, d] = locate(flat);
        return chains_[static_cast<size_t>(c)].members[static_cast<size_t>(d)];
    }
    cx lambda_of(int flat) const { return chains_[static_cast<size_t>(locate(flat).first)].lambda; }

    /// Flat index of the chain predecessor, or -1 for a chain bottom.
    int predecessor(int flat) const {
        auto [c, d] = locate(flat);
        if (d == 0) return -1;
        for (int i = 0; i < total(); ++i)
            if (flat_[static_cast<size_t>(i)] == std::pair<int, int>{c, d - 1}) return i;
        return -1;
    }

    /// First `count` flat members as their own ChainSet (chains cut to
    /// depth-prefixes, empty chains dropped).
    ChainSet prefix(int count) const {
        if (count <= 0 || count > total()) throw ContractViolation("ChainSet: bad prefix length");
        std::vector<int> keep(chains_.size(), 0);
        for (int i = 0; i < count; ++i) {
            auto [c, d] = flat_[static_cast<size_t>(i)];
            keep[static_cast<size_t>(c)] = std::max(keep[static_cast<size_t>(c)], d + 1);
        }
        std::vector<Chain> cut;
        for (size_t c = 0; c < chains_.size(); ++c) {
            if (keep[c] == 0) continue;
            Chain ch{chains_[c].lambda, {}};
            ch.members.assign(chains_[c].members.begin(), chains_[c].members.begin() + keep[c]);
            cut.push_back(std::move(ch));
        }
        return ChainSet(H_, std::move(cut));
    }

    std::vector<cx> singular_points() const {
        std::vector<cx> out = H_.V->singular_points();
        for (const auto& ch : chains_)
            for (const auto& m : ch.members)
                for (cx p : m->singular_points()) out.push_back(p);
        return out;
    }

    /// Jordan data read off the chain structure: block orders per distinct
    /// spectral value are the chain lengths, nonincreasing.
    JordanSpec jordan() const {
        JordanSpec js;
        for (const auto& ch : chains_) {
            JordanSpec::Entry* ent = nullptr;
            for (auto& e : js.entries)
                if (e.lambda == ch.lambda) ent = &e;
            if (!ent) {
                js.entries.push_back({ch.lambda, {}});
                ent = &js.entries.back();
            }
            ent->orders.push_back(static_cast<int>(ch.members.size()));
        }
        for (auto& e : js.entries)
            std::sort(e.orders.begin(), e.orders.end(), std::greater<int>());
        js.validate(dim());
        return js;
    }

private:
    Hamiltonian H_;
    std::vector<Chain> chains_;
    std::vector<std::pair<int, int>> flat_;
};

/// Worst normalized residual of the defining chain relations
/// (H - lambda) member_0 = 0 and (H - lambda) member_i = member_{i-1}
/// over seeded sample points; also requires each chain bottom to be nonzero
/// somewhere.
inline double chain_relation_residual(const ChainSet& cs, const Config& cfg = {}) {
    SampleStream stream(cfg.seed, cfg.window);
    const auto pts = stream.draw_avoiding(cfg.zero_test_points, cs.singular_points());
    const MatDiffOperator Hop = cs.hamiltonian().op();
    double worst = 0.0;
    for (const auto& ch : cs.chains()) {
        double bottom_mag = 0.0;
        for (double x : pts) {
            for (size_t d = 0; d < ch.members.size(); ++d) {
                CMat img = Hop.apply(ch.members[d], x, 0).value() -
                           ch.lambda * ch.members[d]->eval(x, 0).value();
                CMat expect = d == 0 ? CMat::zero(cs.dim(), 1)
                                     : ch.members[d - 1]->eval(x, 0).value();
                const double scale = std::max(img.max_abs(), expect.max_abs());
                worst = std::max(worst, normalized(max_abs_diff(img, expect), scale));
            }
            bottom_mag = std::max(bottom_mag, ch.members[0]->eval(x, 0).value().max_abs());
        }
        if (bottom_mag <= cfg.tol_zero) throw InvalidChain("chain bottom vanishes at all sample points");
    }
    return worst;
}

/// Evaluator of the Wronskian W_j: determinant of the nj x nj matrix whose
/// row l lists member_l's components and their derivatives up to order j-1.
/// Member jets are queried at order K + j - 1.
inline FuncPtr prefix_wronskian(const ChainSet& cs, int j) {
    const int n = cs.dim();
    if (j < 1 || j > cs.order_n()) throw ContractViolation("prefix_wronskian: j out of range");
    const int m = n * j;
    std::vector<FuncPtr> members;
    for (int l = 0; l < m; ++l) members.push_back(cs.member(l));
    std::vector<cx> poles = cs.singular_points();
    return std::make_shared<LambdaFunc>(
        1, 1,
        [members, n, j, m](cx x0, int K) {
            MatrixJet W(m, m, x0, K);
            for (int l = 0; l < m; ++l) {
                MatrixJet f = members[static_cast<size_t>(l)]->eval(x0, K + j - 1);
                for (int q = 0; q < j; ++q) {
                    for (int c = 0; c < n; ++c) W(l, q * n + c) = f(c, 0).truncated(K);
                    if (q + 1 < j) f = f.derivative();
                }
            }
            MatrixJet out(1, 1, x0, K);
            out(0, 0) = mat_jet_det(W);
            return out;
        },
        poles);
}

/// Hadamard bound for the same matrix at a point (scale for zero tests).
inline double wronskian_scale(const ChainSet& cs, int j, double x) {
    const int n = cs.dim();
    const int m = n * j;
    double bound = 1.0;
    for (int l = 0; l < m; ++l) {
        MatrixJet f = cs.member(l)->eval(x, j - 1);
        double row2 = 0.0;
        for (int q = 0; q < j; ++q) {
            for (int c = 0; c < n; ++c) {
                const double a = std::abs(f(c, 0).coeff(0));
                row2 += a * a;
            }
            if (q + 1 < j) f = f.derivative();
        }
        bound *= std::sqrt(row2);
    }
    return bound;
}

/// Indices j whose Wronskian W_j is nonzero somewhere on the seeded sample.
/// j = N must be nonvanishing at every tested point; otherwise the basis
/// cannot characterize an operator with invertible leading coefficient.
inline std::vector<int> nonvanishing_ladder(const ChainSet& cs, const Config& cfg = {}) {
    const int N = cs.order_n();
    SampleStream stream(cfg.seed, cfg.window);
    const auto pts = stream.draw_avoiding(cfg.zero_test_points, cs.singular_points());
    std::vector<int> ladder;
    for (int j = 1; j <= N; ++j) {
        FuncPtr W = prefix_wronskian(cs, j);
        bool nonzero_somewhere = false, zero_somewhere = false;
        for (double x : pts) {
            const double w = std::abs(W->eval(x, 0).value()(0, 0));
            const double scale = std::max(wronskian_scale(cs, j, x), 1e-300);
            if (w > cfg.tol_zero * scale)
                nonzero_somewhere = true;
            else
                zero_somewhere = true;
        }
        if (j == N && zero_somewhere)
            throw DegenerateBasis("kernel-basis Wronskian vanishes at a sample point");
        if (nonzero_somewhere) ladder.push_back(j);
    }
    return ladder;
}

/// The structured matrix T with H Phi_i = sum_j T_ij Phi_j, plus the Jordan
/// data it realizes.  Chain relations are certified at sample points first.
inline std::pair<CMat, JordanSpec> t_matrix(const ChainSet& cs, const Config& cfg = {}) {
    const double resid = chain_relation_residual(cs, cfg);
    if (resid > cfg.tol_accept)
        throw InvalidChain("chain relations fail at sample points");
    const int d = cs.total();
    CMat T(d, d);
    for (int i = 0; i < d; ++i) {
        T(i, i) = cs.lambda_of(i);
        const int p = cs.predecessor(i);
        if (p >= 0) T(i, p) = 1.0;
    }
    return {T, cs.jordan()};
}

/// Scalar chain data for one diagonal component: potential, shared spectral
/// value, and chain members (all 1x1 evaluators).
struct ScalarChain {
    FuncPtr potential;
    cx lambda;
    std::vector<FuncPtr> members;
};

/// Stack scalar chains of lengths N(n-c) (c = 0-based component) into the
/// single length-nN chain of the diagonal Hamiltonian: component c of flat
/// member l is scalar member l - c*N of chain c, zero below the chain bottom.
inline ChainSet assemble_diag(const std::vector<ScalarChain>& comps, int N) {
    const int n = static_cast<int>(comps.size());
    if (n < 1 || N < 1) throw ContractViolation("assemble_diag: need n >= 1, N >= 1");
    for (int c = 0; c < n; ++c) {
        if (static_cast<int>(comps[static_cast<size_t>(c)].members.size()) != N * (n - c))
            throw BadChainLengths("component " + std::to_string(c + 1) + " needs length N(n-c)");
        if (comps[static_cast<size_t>(c)].lambda != comps[0].lambda)
            throw InvalidChain("stacked components must share the spectral value");
        for (const auto& m : comps[static_cast<size_t>(c)].members)
            if (m->rows() != 1 || m->cols() != 1)
                throw InvalidChain("scalar chain member must be 1x1");
        if (comps[static_cast<size_t>(c)].potential->rows() != 1)
            throw InvalidChain("scalar potential must be 1x1");
    }

    std::vector<cx> vpoles;
    for (const auto& sc : comps)
        for (cx p : sc.potential->singular_points()) vpoles.push_back(p);
    std::vector<FuncPtr> pots;
    for (const auto& sc : comps) pots.push_back(sc.potential);
    FuncPtr V = std::make_shared<LambdaFunc>(
        n, n,
        [pots, n](cx x0, int K) {
            MatrixJet m(n, n, x0, K);
            for (int c = 0; c < n; ++c) m(c, c) = pots[static_cast<size_t>(c)]->eval(x0, K)(0, 0);
            return m;
        },
        vpoles);

    Chain big{comps[0].lambda, {}};
    for (int l = 0; l < n * N; ++l) {
        std::vector<FuncPtr> comp_members(static_cast<size_t>(n));
        std::vector<cx> poles;
        for (int c = 0; c < n; ++c) {
            const int idx = l - c * N;
            if (idx >= 0) {
                comp_members[static_cast<size_t>(c)] = comps[static_cast<size_t>(c)].members[static_cast<size_t>(idx)];
                for (cx p : comp_members[static_cast<size_t>(c)]->singular_points()) poles.push_back(p);
            }
        }
        big.members.push_back(std::make_shared<LambdaFunc>(
            n, 1,
            [comp_members, n](cx x0, int K) {
                MatrixJet v(n, 1, x0, K);
                for (int c = 0; c < n; ++c)
                    if (comp_members[static_cast<size_t>(c)])
                        v(c, 0) = comp_members[static_cast<size_t>(c)]->eval(x0, K)(0, 0);
                return v;
            },
            poles));
    }
    return ChainSet(make_hamiltonian(V), {std::move(big)});
}

} // namespace susym
