#include <catch2/catch_amalgamated.hpp>

#include <susym/chains.hpp>
#include <susym/ode_chain.hpp>
#include <susym/builder.hpp>
#include <susym/generators.hpp>
#include <susym/scenario.hpp>

#include "oracles.hpp"

using namespace susym;

namespace {

FuncPtr exp_member(cx k, std::vector<cx> poly = {1.0}) {
    return make_scalar_func(gen::poly_exp(poly, k));
}

FuncPtr stack2(FuncPtr top, FuncPtr bottom) {
    auto zero = [] { return make_const_func(CMat::zero(1, 1)); };
    FuncPtr t = top ? top : zero();
    FuncPtr b = bottom ? bottom : zero();
    return std::make_shared<LambdaFunc>(2, 1, [t, b](cx x0, int K) {
        MatrixJet out(2, 1, x0, K);
        out(0, 0) = t->eval(x0, K)(0, 0);
        out(1, 0) = b->eval(x0, K)(0, 0);
        return out;
    });
}

cx value_at(const FuncPtr& f, double x, int r = 0) { return f->eval(x, 0).value()(r, 0); }

/// Scalar free-particle chain members over v = 0 built from polynomial
/// recursions, one component of the stacked construction.
ScalarChain free_scalar_chain(cx k, int len, cx seed = 1.0, std::uint64_t stream_seed = 7) {
    SampleStream rng(stream_seed, {-2.0, 2.0});
    std::vector<std::vector<cx>> polys = gen::scalar_poly_chain({seed}, k, len, rng);
    ScalarChain out;
    out.potential = make_const_func(CMat::zero(1, 1));
    out.lambda = -k * k;
    for (auto& p : polys) out.members.push_back(make_scalar_func(gen::poly_exp(p, k)));
    return out;
}

}  // namespace

TEST_CASE("scalar chain integration") {
    Config cfg;
    SECTION("free particle at spectral value zero") {
        FuncPtr v = make_const_func(CMat::zero(1, 1));
        std::vector<std::array<cx, 2>> seeds = {{cx(1.0), cx(0.0)}, {cx(0.5), cx(0.25)}};
        auto members = chain_from_scalar(v, 0.0, seeds, 0.0, cfg);
        REQUIRE(members.size() == 2);
        for (double x : {-1.25, 0.3, 1.8}) {
            REQUIRE(std::abs(value_at(members[0], x) - cx(1.0)) < 1e-10);
            // -phi_1'' = phi_0 with phi_1(0) = 0.5, phi_1'(0) = 0.25
            cx want = -0.5 * x * x + 0.25 * x + 0.5;
            REQUIRE(std::abs(value_at(members[1], x) - want) < 1e-9);
        }
    }
    SECTION("free particle plane wave") {
        FuncPtr v = make_const_func(CMat::zero(1, 1));
        const cx ik{0.0, 1.0};
        std::vector<std::array<cx, 2>> seeds = {{cx(1.0), ik}};
        auto members = chain_from_scalar(v, 1.0, seeds, 0.0, cfg);
        for (double x : {-2.0, 0.7, 1.6})
            REQUIRE(std::abs(value_at(members[0], x) - std::exp(ik * x)) < 1e-9);
    }
    SECTION("oscillator chain against fixed-step integration") {
        FuncPtr v = make_scalar_func(ScalarExpr::pow(ScalarExpr::x(), 2));
        std::vector<std::array<cx, 2>> seeds = {{cx(1.0), cx(0.0)}, {cx(0.2), cx(-0.1)}};
        auto members = chain_from_scalar(v, 1.0, seeds, 0.0, cfg);
        // ground state in closed form
        REQUIRE(std::abs(value_at(members[0], 1.0) - std::exp(-0.5)) < 1e-9);
        auto ref = oracle::rk4_chain([](double x) { return cx(x * x); }, 1.0, seeds, 0.0, 1.0,
                                     20000);
        for (size_t i = 0; i < 2; ++i) {
            MatrixJet j = members[i]->eval(1.0, 1);
            REQUIRE(std::abs(j(0, 0).coeff(0) - ref[i][0]) < 1e-8);
            REQUIRE(std::abs(j(0, 0).deriv_value(1) - ref[i][1]) < 1e-8);
        }
    }
    SECTION("members refuse complex base points") {
        FuncPtr v = make_const_func(CMat::zero(1, 1));
        std::vector<std::array<cx, 2>> seeds = {{cx(1.0), cx(0.0)}};
        auto members = chain_from_scalar(v, 0.0, seeds, 0.0, cfg);
        REQUIRE_THROWS_AS(members[0]->eval(cx(0.0, 0.4), 1), ContractViolation);
    }
}

TEST_CASE("stacking scalar chains") {
    Config cfg;
    SECTION("one component reduces to the scalar chain") {
        ScalarChain c = free_scalar_chain({0.4, 0.6}, 2);
        ChainSet cs = assemble_diag({c}, 2);
        REQUIRE(cs.dim() == 1);
        REQUIRE(cs.total() == 2);
        for (double x : {-0.9, 1.1})
            for (int l = 0; l < 2; ++l)
                REQUIRE(std::abs(value_at(cs.member(l), x) - value_at(c.members[static_cast<size_t>(l)], x)) <
                        1e-12);
        REQUIRE(chain_relation_residual(cs, cfg) < 1e-9);
    }
    SECTION("two components, one step") {
        ScalarChain c1 = free_scalar_chain({0.5, 0.3}, 2);
        ScalarChain c2 = free_scalar_chain({0.5, 0.3}, 1, {0.0, 1.0});
        ChainSet cs = assemble_diag({c1, c2}, 1);
        REQUIRE(cs.total() == 2);
        for (double x : {-0.8, 0.6}) {
            // flat member 0 carries only the top component
            REQUIRE(std::abs(value_at(cs.member(0), x, 0) -
                             value_at(c1.members[0], x)) < 1e-12);
            REQUIRE(std::abs(value_at(cs.member(0), x, 1)) < 1e-12);
            // flat member 1 pairs the deeper top member with the second bottom
            REQUIRE(std::abs(value_at(cs.member(1), x, 0) -
                             value_at(c1.members[1], x)) < 1e-12);
            REQUIRE(std::abs(value_at(cs.member(1), x, 1) -
                             value_at(c2.members[0], x)) < 1e-12);
        }
        REQUIRE(chain_relation_residual(cs, cfg) < 1e-9);
    }
    SECTION("two components, two steps") {
        const cx k{0.35, 0.55};
        ChainSet cs = assemble_diag({free_scalar_chain(k, 4), free_scalar_chain(k, 2, {0.2, 1.0})}, 2);
        REQUIRE(cs.total() == 4);
        REQUIRE(chain_relation_residual(cs, cfg) < 1e-9);
    }
    SECTION("wrong lengths refuse") {
        REQUIRE_THROWS_AS(
            assemble_diag({free_scalar_chain({0.4, 0.2}, 2), free_scalar_chain({0.4, 0.2}, 2)}, 2),
            BadChainLengths);
    }
}

TEST_CASE("prefix wronskians") {
    Config cfg;
    SECTION("order one is the member itself") {
        Hamiltonian H = make_hamiltonian(make_const_func(CMat::zero(1, 1)));
        ChainSet cs(H, {Chain{-0.25, {exp_member(0.5)}}});
        FuncPtr W = prefix_wronskian(cs, 1);
        for (double x : {-1.2, 0.4}) REQUIRE(std::abs(value_at(W, x) - std::exp(0.5 * x)) < 1e-12);
    }
    SECTION("generic full wronskian stays clear of zero") {
        Hamiltonian H = make_hamiltonian(make_const_func(CMat::zero(1, 1)));
        ChainSet cs(H, {Chain{-0.25, {exp_member(0.5)}}, Chain{-1.0, {exp_member(-1.0)}}});
        FuncPtr W = prefix_wronskian(cs, 2);
        for (double x : {-1.5, 0.0, 1.5}) {
            cx want = cx(-1.5) * std::exp(-0.5 * x);
            REQUIRE(std::abs(value_at(W, x) - want) < 1e-10);
        }
    }
    SECTION("stacked chains factor through component wronskians") {
        for (int n : {2, 3}) {
            const int N = 2;
            const cx k{0.45, 0.6};
            std::vector<ScalarChain> comps;
            for (int c = 0; c < n; ++c)
                comps.push_back(free_scalar_chain(k, N * (n - c), cx(0.8 + 0.3 * c, 1.0 - 0.4 * c),
                                                  static_cast<std::uint64_t>(11 + c)));
            ChainSet cs = assemble_diag(comps, N);
            FuncPtr W = prefix_wronskian(cs, N);
            const double sign = (n * (n - 1) * N * (N - 1) / 4) % 2 == 0 ? 1.0 : -1.0;
            for (double x : {-0.7, 0.5}) {
                cx prod{sign, 0.0};
                for (int c = 0; c < n; ++c) {
                    std::vector<FuncPtr> top(comps[static_cast<size_t>(c)].members.begin(),
                                             comps[static_cast<size_t>(c)].members.begin() + N);
                    ChainSet single(make_hamiltonian(comps[static_cast<size_t>(c)].potential),
                                    {Chain{comps[static_cast<size_t>(c)].lambda, top}});
                    prod *= value_at(prefix_wronskian(single, N), x);
                }
                cx got = value_at(W, x);
                REQUIRE(std::abs(got - prod) / std::max(1.0, std::abs(prod)) < 1e-8);
            }
        }
    }
}

TEST_CASE("ladder of usable prefixes") {
    Config cfg;
    Hamiltonian H1 = make_hamiltonian(make_const_func(CMat::zero(1, 1)));
    SECTION("generic basis keeps every prefix") {
        ChainSet cs(H1, {Chain{-0.25, {exp_member(0.5)}}, Chain{-1.0, {exp_member(-1.0)}}});
        REQUIRE(nonvanishing_ladder(cs, cfg) == std::vector<int>{1, 2});
    }
    SECTION("single step ladder") {
        ChainSet cs(H1, {Chain{-0.25, {exp_member(0.5)}}});
        REQUIRE(nonvanishing_ladder(cs, cfg) == std::vector<int>{1});
    }
    SECTION("stacked data loses every proper prefix") {
        ChainSet cs = assemble_diag({free_scalar_chain({0.45, 0.6}, 4),
                                     free_scalar_chain({0.45, 0.6}, 2, {0.3, 1.0})},
                                    2);
        REQUIRE(nonvanishing_ladder(cs, cfg) == std::vector<int>{2});
    }
    SECTION("dependent basis refuses") {
        ChainSet cs(H1, {Chain{-0.25, {exp_member(0.5)}}, Chain{-0.25, {exp_member(0.5, {2.0})}}});
        REQUIRE_THROWS_AS(nonvanishing_ladder(cs, cfg), DegenerateBasis);
    }
}

TEST_CASE("structured kernel matrix") {
    Config cfg;
    Hamiltonian H1 = make_hamiltonian(make_const_func(CMat::zero(1, 1)));
    SECTION("single member") {
        const cx lambda{-0.25, 0.0};
        ChainSet cs(H1, {Chain{lambda, {exp_member(0.5)}}});
        auto [T, js] = t_matrix(cs, cfg);
        REQUIRE(T.rows() == 1);
        REQUIRE(std::abs(T(0, 0) - lambda) < 1e-15);
        REQUIRE(js.entries.size() == 1);
        REQUIRE(js.entries[0].orders == std::vector<int>{1});
    }
    SECTION("two chains at one value") {
        // depth-one chain over e^{kx}: second member from the polynomial recursion
        const cx k{0.6, 0.0};
        SampleStream rng(13, {-2.0, 2.0});
        auto polys = gen::scalar_poly_chain({1.0}, k, 2, rng);
        Hamiltonian H2 = make_hamiltonian(make_const_func(CMat::zero(2, 2)));
        FuncPtr m0 = stack2(make_scalar_func(gen::poly_exp(polys[0], k)), nullptr);
        FuncPtr m1 = stack2(make_scalar_func(gen::poly_exp(polys[1], k)), nullptr);
        FuncPtr m2 = stack2(nullptr, make_scalar_func(gen::poly_exp({1.0}, -k)));
        const cx lambda = -k * k;
        ChainSet cs(H2, {Chain{lambda, {m0, m1}}, Chain{lambda, {m2}}});
        auto [T, js] = t_matrix(cs, cfg);
        REQUIRE(T.rows() == 3);
        REQUIRE(js.entries.size() == 1);
        REQUIRE(js.entries[0].orders == std::vector<int>{2, 1});
        int links = 0;
        for (int i = 0; i < 3; ++i) {
            REQUIRE(std::abs(T(i, i) - lambda) < 1e-15);
            for (int j = 0; j < 3; ++j)
                if (i != j && std::abs(T(i, j)) > 0) {
                    ++links;
                    REQUIRE(std::abs(T(i, j) - cx(1.0)) < 1e-15);
                }
        }
        REQUIRE(links == 1);
    }
    SECTION("characteristic polynomial for grouped data") {
        Scenario sc = parse_scenario(gen::theorem2_scenario(2, 2, 3));
        Config run = cfg;
        if (sc.window) run.window = *sc.window;
        ChainSet cs = build_chain_set(sc, run);
        auto [T, js] = t_matrix(cs, run);
        SampleStream zs(91, {-2.0, 2.0});
        for (int trial = 0; trial < 10; ++trial) {
            cx z = zs.next_complex(-2.0, 2.0, -1.0, 1.0);
            cx p{1.0, 0.0};
            for (const auto& e : js.entries)
                for (int rep = 0; rep < e.orders.front(); ++rep) p *= z - e.lambda;
            CMat M = CMat::identity(T.rows());
            for (int i = 0; i < T.rows(); ++i)
                for (int j = 0; j < T.rows(); ++j) M(i, j) = (i == j ? z : cx{}) - T(i, j);
            cx det = M.det();
            cx want = p * p;  // n = 2
            REQUIRE(std::abs(det - want) / std::max(1.0, std::abs(want)) < 1e-9);
        }
    }
    SECTION("broken chain relations refuse") {
        ChainSet cs(H1, {Chain{0.7, {exp_member(0.5)}}});
        REQUIRE_THROWS_AS(t_matrix(cs, cfg), InvalidChain);
    }
    SECTION("too many blocks refuse") {
        ChainSet cs(H1, {Chain{-0.25, {exp_member(0.5)}}, Chain{-0.25, {exp_member(-0.5)}},
                         Chain{-0.25, {exp_member(0.5, {3.0})}}});
        REQUIRE_THROWS_AS(cs.jordan().validate(1), InvalidJordanSpec);
    }
}

TEST_CASE("images of chains stay chains") {
    Config cfg;
    // Q built on the e^{k1 x} kernel maps the lambda_3 eigenfunction to an
    // eigenfunction of the partner at the same spectral value.
    Hamiltonian H = make_hamiltonian(make_const_func(CMat::zero(1, 1)));
    const cx k1{0.5, 0.0}, k3{0.0, 1.1};
    ChainSet cs(H, {Chain{-k1 * k1, {exp_member(k1)}}});
    MatDiffOperator Q = build_intertwiner(cs, cfg);
    Hamiltonian Hm = partner_hamiltonian(Q, H);
    FuncPtr image = Q.applied(exp_member(k3));
    ChainSet mapped(Hm, {Chain{-k3 * k3, {image}}});
    REQUIRE(chain_relation_residual(mapped, cfg) < 1e-8);
}

TEST_CASE("jordan data validation") {
    JordanSpec js;
    js.entries.push_back({cx(0.0), {1, 2}});
    REQUIRE_THROWS_AS(js.validate(1), InvalidJordanSpec);
    js.entries.clear();
    js.entries.push_back({cx(0.0), {2, 1}});
    js.entries.push_back({cx(0.0), {1}});
    REQUIRE_THROWS_AS(js.validate(2), InvalidJordanSpec);
    js.entries.clear();
    js.entries.push_back({cx(0.0), {2, 1}});
    js.entries.push_back({cx(1.0), {1}});
    REQUIRE_NOTHROW(js.validate(2));
}
