#include <catch2/catch_amalgamated.hpp>

#include <susym/builder.hpp>
#include <susym/generators.hpp>
#include <susym/scenario.hpp>

#include "oracles.hpp"

using namespace susym;

namespace {

FuncPtr exp_member(cx k) { return make_scalar_func(gen::poly_exp({1.0}, k)); }

FuncPtr unit_column(int n, int slot, ExprPtr profile) {
    std::vector<std::vector<ExprPtr>> e;
    for (int r = 0; r < n; ++r)
        e.push_back({r == slot ? profile : ScalarExpr::constant(0.0)});
    return make_expr_func(std::move(e));
}

CMat coeff_at(const MatDiffOperator& Q, int j, double x) { return Q.coeff(j)->eval(x, 0).value(); }

ExprPtr gaussian() {
    return ScalarExpr::exp(cx(-0.5) * ScalarExpr::pow(ScalarExpr::x(), 2));
}

}  // namespace

TEST_CASE("first order scalar build") {
    Config cfg;
    const cx k{0.7, 0.2};
    Hamiltonian H = make_hamiltonian(make_const_func(CMat::zero(1, 1)));
    ChainSet cs(H, {Chain{-k * k, {exp_member(k)}}});
    MatDiffOperator Q = build_intertwiner(cs, cfg);
    REQUIRE(Q.order() == 1);
    for (double x : {-1.4, 0.2, 1.1}) {
        REQUIRE(std::abs(coeff_at(Q, 1, x)(0, 0) - cx(1.0)) < 1e-10);
        REQUIRE(std::abs(coeff_at(Q, 0, x)(0, 0) + k) < 1e-10);
    }
}

TEST_CASE("diagonal matrix build") {
    Config cfg;
    const cx k1{0.6, 0.0}, k2{-0.4, 0.3};
    Hamiltonian H = make_hamiltonian(make_const_func(CMat::zero(2, 2)));
    ChainSet cs(H, {Chain{-k1 * k1, {unit_column(2, 0, gen::poly_exp({1.0}, k1))}},
                    Chain{-k2 * k2, {unit_column(2, 1, gen::poly_exp({1.0}, k2))}}});
    MatDiffOperator Q = build_intertwiner(cs, cfg);
    CMat want = CMat::zero(2, 2);
    want(0, 0) = -k1;
    want(1, 1) = -k2;
    for (double x : {-0.9, 0.8}) {
        REQUIRE(max_abs_diff(coeff_at(Q, 1, x), CMat::identity(2)) < 1e-10);
        REQUIRE(max_abs_diff(coeff_at(Q, 0, x), want) < 1e-10);
    }
}

TEST_CASE("random second order build") {
    Config cfg;
    Scenario sc = parse_scenario(gen::random_scenario(2, 2, 1));
    if (sc.window) cfg.window = *sc.window;
    ChainSet cs = build_chain_set(sc, cfg);
    MatDiffOperator Q = build_intertwiner(cs, cfg);
    REQUIRE(Q.order() == 2);
    REQUIRE(kernel_residual(Q, cs, cfg) < 1e-8);
    Hamiltonian Hm = partner_hamiltonian(Q, cs.hamiltonian());
    REQUIRE(intertwining_residual(Q, cs.hamiltonian(), Hm, cfg) < 1e-8);
}

TEST_CASE("partner potential") {
    Config cfg;
    SECTION("constant coefficient keeps the potential") {
        const cx k{0.5, 0.0};
        Hamiltonian H = make_hamiltonian(make_const_func(CMat::zero(1, 1)));
        ChainSet cs(H, {Chain{-k * k, {exp_member(k)}}});
        MatDiffOperator Q = build_intertwiner(cs, cfg);
        FuncPtr Vm = partner_potential(Q, H.V);
        for (double x : {-1.0, 0.4, 1.3})
            REQUIRE(Vm->eval(x, 0).value().max_abs() < 1e-10);
    }
    SECTION("oscillator ground state shifts the potential by two") {
        FuncPtr v = make_scalar_func(ScalarExpr::pow(ScalarExpr::x(), 2));
        Hamiltonian H = make_hamiltonian(v);
        ChainSet cs(H, {Chain{1.0, {make_scalar_func(gaussian())}}});
        MatDiffOperator Q = build_intertwiner(cs, cfg);
        // X_0 = x, so the partner picks up 2 X_0' = 2
        FuncPtr Vm = partner_potential(Q, H.V);
        for (double x : {-1.2, 0.0, 0.9, 1.7}) {
            REQUIRE(std::abs(coeff_at(Q, 0, x)(0, 0) - cx(x)) < 1e-9);
            REQUIRE(std::abs(Vm->eval(x, 0).value()(0, 0) - cx(x * x + 2.0)) < 1e-8);
        }
    }
}

TEST_CASE("intertwining certificate") {
    Config cfg;
    SECTION("identity passes at zero residual") {
        FuncPtr V = make_expr_func({{ScalarExpr::poly({0.3, 0.0, 1.0}), ScalarExpr::constant(0.1)},
                                    {ScalarExpr::constant(0.1), ScalarExpr::constant(-0.2)}});
        Hamiltonian H = make_hamiltonian(V);
        VerificationReport rep =
            certify_intertwining(MatDiffOperator::const_op(CMat::identity(2)), H, cfg);
        REQUIRE(rep.passed());
        REQUIRE(rep.worst_residual() < 1e-13);
    }
    SECTION("built operators pass") {
        Scenario sc = parse_scenario(gen::random_scenario(2, 1, 4));
        if (sc.window) cfg.window = *sc.window;
        ChainSet cs = build_chain_set(sc, cfg);
        MatDiffOperator Q = build_intertwiner(cs, cfg);
        REQUIRE(certify_intertwining(Q, cs.hamiltonian(), cfg).passed());
    }
    SECTION("corrupted coefficient fails") {
        FuncPtr v = make_scalar_func(ScalarExpr::pow(ScalarExpr::x(), 2));
        Hamiltonian H = make_hamiltonian(v);
        ChainSet cs(H, {Chain{1.0, {make_scalar_func(gaussian())}}});
        MatDiffOperator Q = build_intertwiner(cs, cfg);
        REQUIRE(certify_intertwining(Q, H, cfg).passed());
        CMat eps(1, 1);
        eps(0, 0) = 1e-3;
        MatDiffOperator Qbad = Q + MatDiffOperator::const_op(eps);
        VerificationReport rep = certify_intertwining(Qbad, H, cfg);
        REQUIRE_FALSE(rep.passed());
        REQUIRE(rep.worst_residual() > 1e-5);
    }
}

TEST_CASE("kernel is not larger than the chain span") {
    Config cfg;
    FuncPtr v = make_scalar_func(ScalarExpr::pow(ScalarExpr::x(), 2));
    Hamiltonian H = make_hamiltonian(v);
    ChainSet cs(H, {Chain{1.0, {make_scalar_func(gaussian())}}});
    MatDiffOperator Q = build_intertwiner(cs, cfg);
    FuncPtr probe = make_scalar_func(ScalarExpr::cos(ScalarExpr::x()));
    double image = 0.0, scale = 0.0;
    for (double x : uniform_grid(cfg.window, 9)) {
        image = std::max(image, Q.apply(probe, x, 0).value().max_abs());
        scale = std::max(scale, probe->eval(x, 0).value().max_abs());
    }
    REQUIRE(image > 1e-3 * scale);
}

TEST_CASE("build depends only on the kernel span") {
    Config cfg;
    const cx k1{0.55, 0.0}, k2{-0.35, 0.25};
    Hamiltonian H = make_hamiltonian(make_const_func(CMat::zero(1, 1)));
    ChainSet a(H, {Chain{-k1 * k1, {exp_member(k1)}}, Chain{-k2 * k2, {exp_member(k2)}}});
    ChainSet b(H, {Chain{-k1 * k1, {make_scalar_func(gen::poly_exp({{2.0, -0.5}}, k1))}},
                   Chain{-k2 * k2, {make_scalar_func(gen::poly_exp({{0.0, 3.0}}, k2))}}});
    MatDiffOperator Qa = build_intertwiner(a, cfg);
    MatDiffOperator Qb = build_intertwiner(b, cfg);
    REQUIRE(op_coeff_distance(Qa, Qb, cfg) < 1e-9);
}

TEST_CASE("leading coefficient covariance") {
    Config cfg;
    const cx k1{0.5, 0.0}, k2{-0.3, 0.4}, c{2.0, -1.0};
    Hamiltonian H = make_hamiltonian(make_const_func(CMat::zero(1, 1)));
    ChainSet cs(H, {Chain{-k1 * k1, {exp_member(k1)}}, Chain{-k2 * k2, {exp_member(k2)}}});
    CMat XN = CMat::identity(1);
    CMat cXN = XN;
    cXN(0, 0) = c;
    MatDiffOperator Q1 = build_intertwiner(cs, XN, cfg);
    MatDiffOperator Qc = build_intertwiner(cs, cXN, cfg);
    REQUIRE(op_coeff_distance(c * Q1, Qc, cfg) < 1e-9);
    FuncPtr V1 = partner_potential(Q1, H.V);
    FuncPtr Vc = partner_potential(Qc, H.V);
    for (double x : {-1.1, 0.2, 1.5})
        REQUIRE(max_abs_diff(V1->eval(x, 0).value(), Vc->eval(x, 0).value()) < 1e-9);
}
