#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "susym/expr.hpp"
#include "susym/sampling.hpp"

namespace susym {
namespace gen {

using nlohmann::json;

/// Solve -P'' - 2k P' = R for a polynomial P (ascending coefficients), with
/// the integration constant gauged to zero.  Coefficientwise, with q = P',
///   -(m+1) q_{m+1} - 2k q_m = R_m
/// determines q from the top degree down, and P is the antiderivative.
inline std::vector<cx> chain_poly_step(const std::vector<cx>& R, cx k) {
    const int d = static_cast<int>(R.size()) - 1;
    std::vector<cx> q(static_cast<size_t>(d + 1), 0.0);
    for (int m = d; m >= 0; --m) {
        const cx up = (m + 1 <= d) ? cx(double(m + 1)) * q[static_cast<size_t>(m + 1)] : cx(0.0);
        q[static_cast<size_t>(m)] = -(R[static_cast<size_t>(m)] + up) / (2.0 * k);
    }
    std::vector<cx> P(static_cast<size_t>(d + 2), 0.0);
    for (int m = 0; m <= d; ++m)
        P[static_cast<size_t>(m + 1)] = q[static_cast<size_t>(m)] / cx(double(m + 1));
    return P;
}

inline bool poly_is_zero(const std::vector<cx>& P) {
    for (cx c : P)
        if (c != cx(0.0)) return false;
    return true;
}

/// P(x) e^{k x} as an expression tree (plain polynomial when k = 0).
inline ExprPtr poly_exp(const std::vector<cx>& P, cx k) {
    ExprPtr p = ScalarExpr::poly(P.empty() ? std::vector<cx>{0.0} : P);
    if (k == cx(0.0) || poly_is_zero(P)) return p;
    return ScalarExpr::mul(
        {std::move(p), ScalarExpr::exp(ScalarExpr::mul({ScalarExpr::constant(k), ScalarExpr::x()}))});
}

/// One scalar chain of polynomial-times-exponential members over the constant
/// potential shift d: lambda = d - k^2 and each depth solves the recurrence
/// above.  Small homogeneous constants from the stream keep drawn examples
/// away from degenerate configurations.
inline std::vector<std::vector<cx>> scalar_poly_chain(std::vector<cx> seed, cx k, int depth,
                                                      SampleStream& rng) {
    std::vector<std::vector<cx>> levels;
    levels.push_back(std::move(seed));
    for (int j = 1; j < depth; ++j) {
        if (poly_is_zero(levels.back())) {
            levels.push_back({cx(0.0)});
            continue;
        }
        std::vector<cx> next = chain_poly_step(levels.back(), k);
        next[0] += 0.2 * rng.next_complex(-1.0, 1.0, -1.0, 1.0);
        levels.push_back(std::move(next));
    }
    return levels;
}

inline json matrix_potential_json(const std::vector<cx>& diag) {
    const int n = static_cast<int>(diag.size());
    json rows = json::array();
    for (int r = 0; r < n; ++r) {
        json row = json::array();
        for (int c = 0; c < n; ++c)
            row.push_back(ScalarExpr::constant(r == c ? diag[static_cast<size_t>(r)] : cx(0.0))
                              ->to_json());
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Weight bounded away from zero (keeps member vectors dense and the kernel
/// solve well conditioned).
inline cx dense_weight(SampleStream& rng) {
    cx w = rng.next_complex(-1.0, 1.0, -1.0, 1.0);
    if (std::abs(w) < 0.3) w += cx(0.45, 0.45);
    return w;
}

/// Exponent with a small real part and a solid imaginary part: the member
/// envelopes stay within a modest dynamic range over the scenario window
/// while oscillation keeps the Wronskian away from real-axis zeros.
inline cx draw_exponent(SampleStream& rng) {
    const double re_sign = rng.unit() < 0.5 ? 1.0 : -1.0;
    const double im_sign = rng.unit() < 0.5 ? 1.0 : -1.0;
    return {re_sign * (0.08 + 0.22 * rng.unit()), im_sign * (0.45 + 0.7 * rng.unit())};
}

/// Spectral value d - k^2 for a fresh exponent, redrawn until it clears the
/// already-used values (near-confluent roots make the polynomial products in
/// the later stages needlessly ill conditioned).
inline cx fresh_lambda(SampleStream& rng, cx d, const std::vector<cx>& used, cx& k_out) {
    cx lambda = 0.0;
    for (int tries = 0; tries < 40; ++tries) {
        k_out = draw_exponent(rng);
        lambda = d - k_out * k_out;
        double dist = 1e300;
        for (cx v : used) dist = std::min(dist, std::abs(lambda - v));
        if (dist >= 0.25) break;
    }
    return lambda;
}

/// Seeded scenario with diagonal constant potential and closed-form
/// polynomial-exponential chains.  The exponent is drawn first and the
/// spectral value derived as d_0 - k^2, so real parts stay bounded; reusing a
/// spectral value flips every component sign, which keeps the stacked kernel
/// basis independent.
inline json random_scenario(int n, int N, std::uint64_t seed) {
    SampleStream rng(seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull, {-1.0, 1.0});
    std::vector<cx> diag;
    for (int c = 0; c < n; ++c) diag.push_back(cx(rng.next_complex(-0.4, 0.4, 0.0, 0.0).real()));

    struct ChainDraw {
        cx lambda;
        int length;
        int index_at_value;
    };
    std::vector<ChainDraw> draws;
    std::vector<cx> values;
    // more spectral-value sharing in higher dimension keeps the conjugate
    // dividend order (twice the number of distinct values here) manageable
    const double reuse_p = std::min(0.3 + 0.2 * (n - 1), 0.7);
    int rem = n * N;
    while (rem > 0) {
        const int len = (rem >= 2 && rng.unit() < 0.35) ? 2 : 1;
        cx lambda;
        bool reuse = !values.empty() && rng.unit() < reuse_p;
        int idx = 0;
        if (reuse) {
            lambda = values[static_cast<size_t>(rng.unit() * double(values.size())) % values.size()];
            for (const auto& d : draws)
                if (d.lambda == lambda) ++idx;
            if (idx + 1 > 2 * n) reuse = false;
        }
        if (!reuse) {
            cx k;
            lambda = fresh_lambda(rng, diag[0], values, k);
            values.push_back(lambda);
            idx = 0;
        }
        draws.push_back({lambda, len, idx});
        rem -= len;
    }

    json chains = json::array();
    for (const auto& d : draws) {
        const double flip = (d.index_at_value % 2 == 0) ? 1.0 : -1.0;
        std::vector<std::vector<std::vector<cx>>> comp_levels;
        std::vector<cx> ks;
        for (int c = 0; c < n; ++c) {
            const cx k = flip * std::sqrt(diag[static_cast<size_t>(c)] - d.lambda);
            ks.push_back(k);
            comp_levels.push_back(scalar_poly_chain({dense_weight(rng)}, k, d.length, rng));
        }
        json members = json::array();
        for (int j = 0; j < d.length; ++j) {
            json vec = json::array();
            for (int c = 0; c < n; ++c)
                vec.push_back(poly_exp(comp_levels[static_cast<size_t>(c)][static_cast<size_t>(j)],
                                       ks[static_cast<size_t>(c)])
                                  ->to_json());
            members.push_back(n == 1 ? vec[0] : vec);
        }
        chains.push_back({{"lambda", cx_to_json(d.lambda)}, {"members", members}});
    }

    return {{"schema", 1},
            {"name", "random-n" + std::to_string(n) + "-N" + std::to_string(N) + "-s" +
                         std::to_string(seed)},
            {"kind", "chains"},
            {"n", n},
            {"seed", seed},
            {"window", json::array({-2.5, 2.5})},
            {"potential", matrix_potential_json(diag)},
            {"chains", chains}};
}

/// Seeded scenario satisfying the same-order-conjugate hypotheses: every
/// spectral value carries exactly n chains of one shared length, so the
/// first-order ladder exists and the closure terms collapse to scalars.
inline json theorem2_scenario(int n, int N, std::uint64_t seed) {
    SampleStream rng(seed * 0x9e3779b97f4a7c15ull + 0x853c49e6748fea9bull, {-1.0, 1.0});
    std::vector<cx> diag;
    for (int c = 0; c < n; ++c) diag.push_back(cx(rng.next_complex(-0.4, 0.4, 0.0, 0.0).real()));

    std::vector<int> lens;
    int rem = N;
    while (rem > 0) {
        const int len = (rem >= 2 && rng.unit() < 0.4) ? 2 : 1;
        lens.push_back(len);
        rem -= len;
    }

    json chains = json::array();
    std::vector<cx> used;
    for (size_t g = 0; g < lens.size(); ++g) {
        cx k0;
        const cx lambda = fresh_lambda(rng, diag[0], used, k0);
        used.push_back(lambda);
        for (int i = 0; i < n; ++i) {
            const double flip = (i % 2 == 0) ? 1.0 : -1.0;
            std::vector<std::vector<std::vector<cx>>> comp_levels;
            std::vector<cx> ks;
            for (int c = 0; c < n; ++c) {
                const cx k = flip * std::sqrt(diag[static_cast<size_t>(c)] - lambda);
                ks.push_back(k);
                std::vector<cx> seed_poly{(c == i) ? cx(1.0) : 0.3 * dense_weight(rng)};
                comp_levels.push_back(scalar_poly_chain(seed_poly, k, lens[g], rng));
            }
            json members = json::array();
            for (int j = 0; j < lens[g]; ++j) {
                json vec = json::array();
                for (int c = 0; c < n; ++c)
                    vec.push_back(
                        poly_exp(comp_levels[static_cast<size_t>(c)][static_cast<size_t>(j)],
                                 ks[static_cast<size_t>(c)])
                            ->to_json());
                members.push_back(n == 1 ? vec[0] : vec);
            }
            chains.push_back({{"lambda", cx_to_json(lambda)}, {"members", members}});
        }
    }

    return {{"schema", 1},
            {"name", "theorem2-n" + std::to_string(n) + "-N" + std::to_string(N) + "-s" +
                         std::to_string(seed)},
            {"kind", "chains"},
            {"n", n},
            {"seed", seed},
            {"window", json::array({-2.5, 2.5})},
            {"potential", matrix_potential_json(diag)},
            {"chains", chains},
            {"stages", json::array({"build", "factorize", "theorem2", "minimize", "conjugate"})}};
}

/// Two decoupled shifted oscillators sharing the superpotential x: the
/// diagonal first-order intertwiner has a third-order conjugate when the two
/// shifts differ.
inline json remark9_scenario(double lambda1, double lambda2) {
    auto x = ScalarExpr::x();
    auto x2 = ScalarExpr::mul({x, x});
    auto gauss = ScalarExpr::exp(ScalarExpr::mul({ScalarExpr::constant(-0.5), x, x}));
    auto zero = ScalarExpr::constant(0.0);
    auto vdiag = [&](double l) {
        return (x2 + ScalarExpr::constant(cx(l - 1.0)))->to_json();
    };
    json potential = json::array({json::array({vdiag(lambda1), zero->to_json()}),
                                  json::array({zero->to_json(), vdiag(lambda2)})});
    json chains = json::array(
        {{{"lambda", cx_to_json(cx(lambda1))},
          {"members", json::array({json::array({gauss->to_json(), zero->to_json()})})}},
         {{"lambda", cx_to_json(cx(lambda2))},
          {"members", json::array({json::array({zero->to_json(), gauss->to_json()})})}}});
    return {{"schema", 1},
            {"name", "remark9"},
            {"kind", "chains"},
            {"n", 2},
            {"seed", 2024},
            {"potential", potential},
            {"chains", chains},
            {"stages", json::array({"build", "minimize", "conjugate", "uniqueness"})}};
}

/// Stacked-chain construction whose proper prefix Wronskians vanish
/// identically: n scalar components over the zero potential share one
/// spectral value -k^2 (k complex, so the per-component Wronskians have no
/// real zeros generically), with chain lengths N(n-c).
inline json irreducible_scenario(int n, int N, std::uint64_t seed) {
    SampleStream rng(seed * 0x9e3779b97f4a7c15ull + 0xda942042e4dd58b5ull, {-1.0, 1.0});
    const cx k(0.55 + 0.5 * rng.unit(), 0.3 + 0.35 * rng.unit());
    const cx lambda0 = -k * k;

    json comps = json::array();
    for (int c = 0; c < n; ++c) {
        const cx kc = (c % 2 == 0) ? k : -k;
        std::vector<cx> seed_poly{cx(1.0) + 0.2 * rng.next_complex(-1.0, 1.0, -1.0, 1.0)};
        auto levels = scalar_poly_chain(seed_poly, kc, N * (n - c), rng);
        json members = json::array();
        for (const auto& P : levels) members.push_back(poly_exp(P, kc)->to_json());
        comps.push_back({{"potential", ScalarExpr::constant(0.0)->to_json()},
                         {"members", members}});
    }
    return {{"schema", 1},
            {"name", "irreducible-n" + std::to_string(n) + "-N" + std::to_string(N) + "-s" +
                         std::to_string(seed)},
            {"kind", "irreducible"},
            {"n", n},
            {"N", N},
            {"seed", seed},
            {"lambda0", cx_to_json(lambda0)},
            {"components", comps}};
}

} // namespace gen
} // namespace susym
