#include <catch2/catch_amalgamated.hpp>

#include <susym/jet.hpp>
#include <susym/matrix_jet.hpp>
#include <susym/expr.hpp>
#include <susym/errors.hpp>

#include "oracles.hpp"

#include <random>

using namespace susym;

namespace {

Jet jet_of(const ExprPtr& e, cx x0, int order) { return e->eval(x0, order); }

std::vector<cx> coeffs_of(const Jet& j) {
    std::vector<cx> out;
    for (int k = 0; k <= j.order(); ++k) out.push_back(j.coeff(k));
    return out;
}

double coeff_dist(const Jet& j, const std::vector<cx>& expect) {
    double worst = 0.0;
    for (int k = 0; k <= j.order(); ++k)
        worst = std::max(worst, std::abs(j.coeff(k) - expect[static_cast<size_t>(k)]));
    return worst;
}

Jet random_jet(std::mt19937_64& rng, cx x0, int order) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Jet j(x0, order);
    for (int k = 0; k <= order; ++k) j.set_coeff(k, {u(rng), u(rng)});
    return j;
}

MatrixJet random_matrix_jet(std::mt19937_64& rng, int n, cx x0, int order) {
    MatrixJet A(n, n, x0, order);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) A(r, c) = random_jet(rng, x0, order);
    return A;
}

}  // namespace

TEST_CASE("jet multiplication") {
    SECTION("squaring 1+x") {
        Jet a = Jet::from_coeffs(0.0, {1.0, 1.0, 0.0});
        Jet sq = a * a;
        REQUIRE(coeff_dist(sq, {1.0, 2.0, 1.0}) < 1e-15);
    }
    SECTION("multiplication by the unit jet") {
        std::mt19937_64 rng(11);
        Jet a = random_jet(rng, 0.4, 5);
        Jet one = Jet::constant(0.4, 5, 1.0);
        REQUIRE(max_abs_diff(a * one, a) == 0.0);
    }
    SECTION("exp times exp against exp(2x)") {
        Jet e = jet_exp(Jet::variable(0.0, 3));
        Jet prod = e * e;
        REQUIRE(coeff_dist(prod, {1.0, 2.0, 2.0, 4.0 / 3.0}) < 1e-15);
        ExprPtr e2x = ScalarExpr::exp(cx(2.0) * ScalarExpr::x());
        REQUIRE(max_abs_diff(prod, jet_of(e2x, 0.0, 3)) < 1e-15);
    }
}

TEST_CASE("jet reciprocal") {
    SECTION("geometric series for 1/(1+x)") {
        Jet a = Jet::from_coeffs(0.0, {1.0, 1.0, 0.0, 0.0});
        REQUIRE(coeff_dist(a.inverse(), {1.0, -1.0, 1.0, -1.0}) < 1e-15);
    }
    SECTION("constant jet") {
        Jet two = Jet::constant(1.5, 3, 2.0);
        REQUIRE(coeff_dist(two.inverse(), {0.5, 0.0, 0.0, 0.0}) < 1e-15);
    }
    SECTION("secant series from 1/cos") {
        Jet c = jet_sin_cos(Jet::variable(0.0, 4)).second;
        Jet sec = c.inverse();
        REQUIRE(coeff_dist(sec, {1.0, 0.0, 0.5, 0.0, 5.0 / 24.0}) < 1e-14);
        // same quotient through a dense Toeplitz solve instead of the recurrence
        std::vector<cx> ref = oracle::series_divide({1.0}, coeffs_of(c));
        for (int k = 0; k <= 4; ++k)
            REQUIRE(std::abs(sec.coeff(k) - ref[static_cast<size_t>(k)]) < 1e-12);
    }
    SECTION("vanishing constant term refuses") {
        Jet x = Jet::variable(0.0, 3);
        REQUIRE_THROWS_AS(x.inverse(), SingularPoint);
    }
    SECTION("reciprocal really inverts") {
        std::mt19937_64 rng(5);
        Jet a = random_jet(rng, -0.7, 6);
        a.set_coeff(0, a.coeff(0) + cx(2.0));
        Jet prod = a * a.inverse();
        REQUIRE(coeff_dist(prod, {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0}) < 1e-13);
    }
}

TEST_CASE("expression jets") {
    SECTION("x^2 at 3") {
        ExprPtr e = ScalarExpr::pow(ScalarExpr::x(), 2);
        REQUIRE(coeff_dist(jet_of(e, 3.0, 2), {9.0, 6.0, 1.0}) < 1e-14);
    }
    SECTION("sin at 0") {
        ExprPtr e = ScalarExpr::sin(ScalarExpr::x());
        REQUIRE(coeff_dist(jet_of(e, 0.0, 3), {0.0, 1.0, 0.0, -1.0 / 6.0}) < 1e-15);
    }
    SECTION("exp(2x)/(1+x^2) against finite differences") {
        ExprPtr num = ScalarExpr::exp(cx(2.0) * ScalarExpr::x());
        ExprPtr den = ScalarExpr::poly({1.0, 0.0, 1.0});
        ExprPtr e = ScalarExpr::div(num, den);
        Jet j = jet_of(e, 1.0, 4);
        auto f = [&](double x) { return e->eval(x, 0).value(); };
        for (int k = 0; k <= 4; ++k)
            REQUIRE(std::abs(j.coeff(k) - oracle::fd_jet_coeff(f, 1.0, k)) < 1e-6);
    }
    SECTION("affine composition") {
        // sin(2x + 0.3) at 0.2 equals sin evaluated at 0.7 with rescaled coefficients
        ExprPtr e = ScalarExpr::affine_compose(ScalarExpr::sin(ScalarExpr::x()), 2.0, 0.3);
        Jet j = jet_of(e, 0.2, 3);
        auto f = [&](double x) { return std::sin(2.0 * x + 0.3); };
        for (int k = 0; k <= 3; ++k)
            REQUIRE(std::abs(j.coeff(k) - oracle::fd_jet_coeff(f, 0.2, k)) < 1e-6);
    }
    SECTION("negative integer power") {
        ExprPtr e = ScalarExpr::pow(ScalarExpr::poly({1.0, 1.0}), -1);
        REQUIRE(coeff_dist(jet_of(e, 0.0, 3), {1.0, -1.0, 1.0, -1.0}) < 1e-14);
    }
}

TEST_CASE("truncation consistency") {
    ExprPtr g = ScalarExpr::div(ScalarExpr::exp(cx(0.8) * ScalarExpr::x()),
                                ScalarExpr::poly({2.0, 0.0, 1.0}));
    ExprPtr s = ScalarExpr::sin(ScalarExpr::poly({0.3, 1.2}));
    for (const ExprPtr& e : {g, s}) {
        for (double x0 : {-1.3, 0.0, 0.9}) {
            Jet lo = jet_of(e, x0, 5);
            Jet hi = jet_of(e, x0, 9);
            REQUIRE(max_abs_diff(lo, hi.truncated(5)) < 1e-13);
        }
    }
}

TEST_CASE("jet differentiation") {
    SECTION("coefficient shift") {
        std::mt19937_64 rng(3);
        Jet a = random_jet(rng, 0.1, 6);
        Jet d = a.derivative();
        for (int k = 0; k <= 5; ++k)
            REQUIRE(std::abs(d.coeff(k) - cx(k + 1.0) * a.coeff(k + 1)) < 1e-15);
    }
    SECTION("sin differentiates to cos") {
        Jet s = jet_of(ScalarExpr::sin(ScalarExpr::x()), 0.6, 7);
        Jet c = jet_of(ScalarExpr::cos(ScalarExpr::x()), 0.6, 6);
        REQUIRE(max_abs_diff(s.derivative(), c) < 1e-14);
    }
}

TEST_CASE("jet ring axioms") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 8; ++trial) {
        Jet a = random_jet(rng, 0.25, 6);
        Jet b = random_jet(rng, 0.25, 6);
        Jet c = random_jet(rng, 0.25, 6);
        REQUIRE(max_abs_diff((a * b) * c, a * (b * c)) < 1e-12);
        REQUIRE(max_abs_diff(a * (b + c), a * b + a * c) < 1e-12);
        REQUIRE(max_abs_diff(a + b, b + a) == 0.0);
    }
}

TEST_CASE("matrix jet solve") {
    SECTION("identity system") {
        std::mt19937_64 rng(23);
        MatrixJet B(3, 2, 0.5, 4);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 2; ++c) B(r, c) = random_jet(rng, 0.5, 4);
        MatrixJet A = MatrixJet::identity(3, 0.5, 4);
        REQUIRE(max_abs_diff(mat_jet_solve(A, B), B) < 1e-15);
    }
    SECTION("diagonal system") {
        MatrixJet A(2, 2, 0.0, 3);
        A(0, 0) = Jet::from_coeffs(0.0, {1.0, 1.0, 0.0, 0.0});
        A(0, 1) = Jet::constant(0.0, 3, 0.0);
        A(1, 0) = Jet::constant(0.0, 3, 0.0);
        A(1, 1) = Jet::constant(0.0, 3, 2.0);
        MatrixJet X = mat_jet_solve(A, MatrixJet::identity(2, 0.0, 3));
        REQUIRE(coeff_dist(X(0, 0), {1.0, -1.0, 1.0, -1.0}) < 1e-14);
        REQUIRE(coeff_dist(X(1, 1), {0.5, 0.0, 0.0, 0.0}) < 1e-15);
        REQUIRE(X(0, 1).max_abs() == 0.0);
    }
    SECTION("random system residual") {
        std::mt19937_64 rng(29);
        for (int trial = 0; trial < 4; ++trial) {
            MatrixJet A = random_matrix_jet(rng, 4, 0.3, 6);
            for (int i = 0; i < 4; ++i) A(i, i) = A(i, i) + cx(3.0);
            MatrixJet B = random_matrix_jet(rng, 4, 0.3, 6);
            MatrixJet X = mat_jet_solve(A, B);
            REQUIRE(max_abs_diff(A * X, B) < 1e-10);
        }
    }
    SECTION("singular leading matrix refuses") {
        MatrixJet A(2, 2, 0.0, 2);
        A(0, 0) = Jet::variable(0.0, 2);
        A(0, 1) = Jet::constant(0.0, 2, 0.0);
        A(1, 0) = Jet::constant(0.0, 2, 0.0);
        A(1, 1) = Jet::constant(0.0, 2, 1.0);
        REQUIRE_THROWS_AS(mat_jet_solve(A, MatrixJet::identity(2, 0.0, 2)), SingularWronskian);
    }
    SECTION("conditioning gate") {
        MatrixJet A = MatrixJet::identity(2, 0.0, 2);
        A(0, 0) = Jet::constant(0.0, 2, 1e-11);
        REQUIRE_THROWS_AS(mat_jet_solve(A, MatrixJet::identity(2, 0.0, 2), 1e10),
                          SingularWronskian);
    }
}

TEST_CASE("matrix jet determinant") {
    SECTION("identity") {
        Jet d = mat_jet_det(MatrixJet::identity(3, 0.7, 4));
        REQUIRE(coeff_dist(d, {1.0, 0.0, 0.0, 0.0, 0.0}) == 0.0);
    }
    SECTION("symmetric 2x2 with off-diagonal x") {
        MatrixJet A(2, 2, 0.0, 2);
        A(0, 0) = Jet::constant(0.0, 2, 1.0);
        A(0, 1) = Jet::variable(0.0, 2);
        A(1, 0) = Jet::variable(0.0, 2);
        A(1, 1) = Jet::constant(0.0, 2, 1.0);
        REQUIRE(coeff_dist(mat_jet_det(A), {1.0, 0.0, -1.0}) < 1e-15);
    }
    SECTION("6x6 polynomial matrix against cofactor expansion") {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        MatrixJet A(6, 6, 0.2, 5);
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 6; ++c) {
                ExprPtr p = ScalarExpr::poly({{u(rng), u(rng)}, {u(rng), 0.0}, {u(rng), 0.0}});
                A(r, c) = p->eval(0.2, 5);
            }
        Jet fast = mat_jet_det(A);
        Jet slow = oracle::cofactor_det(A);
        REQUIRE(max_abs_diff(fast, slow) / std::max(1.0, slow.max_abs()) < 1e-9);
    }
    SECTION("determinant of a product") {
        std::mt19937_64 rng(37);
        MatrixJet A = random_matrix_jet(rng, 3, 0.0, 4);
        MatrixJet B = random_matrix_jet(rng, 3, 0.0, 4);
        Jet lhs = mat_jet_det(A * B);
        Jet rhs = mat_jet_det(A) * mat_jet_det(B);
        REQUIRE(max_abs_diff(lhs, rhs) < 1e-11);
    }
}

TEST_CASE("jet contract checks") {
    Jet a(0.0, 3), b(1.0, 3);
    REQUIRE_THROWS_AS(a + b, ContractViolation);
    REQUIRE_THROWS_AS(Jet::from_coeffs(0.0, {}), ContractViolation);
}
