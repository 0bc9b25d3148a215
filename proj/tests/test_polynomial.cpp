#include "mom/errors.hpp"
#include "mom/polynomial.hpp"

#include <doctest.h>

#include <random>

using namespace mom;
using C = std::complex<double>;
using IPoly = MultiPoly<double>;

namespace {

Poly x(int nv, int v) { return Poly::variable(nv, v); }
Poly c(int nv, C value) { return Poly::constant(nv, value); }

Poly random_poly(int nv, int degree, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> ex(0, degree);
    Poly p(nv);
    for (int t = 0; t < 8; ++t) {
        Exponent e(nv, 0);
        int left = degree;
        for (int v = 0; v < nv; ++v) {
            e[v] = std::min(ex(rng), left);
            left -= e[v];
        }
        p.add_term(e, C(u(rng), u(rng)));
    }
    return p;
}

/// Integer polynomial with small coefficients for exact ring checks.
IPoly random_int_poly(int nv, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> coef(-5, 5), ex(0, 2);
    IPoly p(nv);
    for (int t = 0; t < 5; ++t) {
        Exponent e(nv);
        for (auto& k : e) k = ex(rng);
        p.add_term(e, coef(rng));
    }
    return p;
}

Eigen::VectorXcd random_point(int nv, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXcd v(nv);
    for (int k = 0; k < nv; ++k) v(k) = C(n(rng), n(rng));
    return v;
}

double rel(C a, C b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

}  // namespace

TEST_CASE("addition") {
    const Poly X = x(1, 0);
    CHECK((X + c(1, 1.0)) + (X - c(1, 1.0)) == C(2.0) * X);
    CHECK(X + Poly(1) == X);
    CHECK_THROWS_AS(x(1, 0) + x(2, 0), ParameterError);
}

TEST_CASE("multiplication") {
    const Poly X = x(1, 0);
    CHECK((X + c(1, 1.0)) * (X - c(1, 1.0)) == X * X - c(1, 1.0));
    CHECK(X * c(1, 1.0) == X);
    CHECK_THROWS_AS(mul(x(1, 0), x(2, 0)), ParameterError);

    std::mt19937_64 rng(1);
    for (int k = 0; k < 10; ++k) {
        const Poly p = random_poly(3, 3, rng), q = random_poly(3, 2, rng);
        CHECK((p * q).degree() == p.degree() + q.degree());
    }
}

TEST_CASE("zero terms are pruned") {
    Poly p = x(2, 0) + c(2, 1.0);
    p -= x(2, 0);
    CHECK(p.num_terms() == 1);
    for (const auto& [e, coef] : (x(2, 0) * x(2, 1) - x(2, 1) * x(2, 0)).terms()) CHECK(coef != C(0));
    CHECK((x(2, 0) - x(2, 0)).is_zero());
    CHECK((x(2, 0) - x(2, 0)).degree() == -1);
}

TEST_CASE("differentiation") {
    const Poly X = x(2, 0), Y = x(2, 1);
    CHECK(differentiate(X * X * Y, 0) == C(2.0) * X * Y);
    CHECK(differentiate(X * X, 1).is_zero());
    CHECK_THROWS_AS(differentiate(X, 2), ParameterError);
}

TEST_CASE("derivative matches central differences") {
    std::mt19937_64 rng(2);
    const double h = 1e-6;
    for (int k = 0; k < 20; ++k) {
        const Poly p = random_poly(3, 4, rng);
        const Eigen::VectorXcd v = random_point(3, rng);
        for (int var = 0; var < 3; ++var) {
            Eigen::VectorXcd vp = v, vm = v;
            vp(var) += h;
            vm(var) -= h;
            const C fd = (evaluate(p, vp) - evaluate(p, vm)) / (2.0 * h);
            CHECK(rel(fd, evaluate(differentiate(p, var), v)) < 1e-7);
        }
    }
}

TEST_CASE("evaluation") {
    const Poly X = x(1, 0);
    Eigen::VectorXcd two(1);
    two << 2.0;
    CHECK(evaluate(X * X - c(1, 1.0), two) == C(3.0));
    Eigen::VectorXcd any(3);
    any << C(0.3, 1), C(-2, 0.5), C(7, 7);
    CHECK(evaluate(c(3, C(1.5, -2)), any) == C(1.5, -2));
    CHECK_THROWS_AS(evaluate(X, any), ParameterError);
}

TEST_CASE("expanded cube matches direct cubing") {
    const Poly s = x(2, 0) + x(2, 1);
    const Poly cube = pow(s, 3);
    CHECK(cube.num_terms() == 4);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 20; ++k) {
        const Eigen::VectorXcd v = random_point(2, rng);
        const C direct = std::pow(v(0) + v(1), 3);
        CHECK(rel(evaluate(cube, v), direct) < 1e-12);
    }
}

TEST_CASE("evaluation is a ring homomorphism") {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 50; ++k) {
        const Poly p = random_poly(4, 4, rng), q = random_poly(4, 4, rng);
        const Eigen::VectorXcd v = random_point(4, rng);
        const C pv = evaluate(p, v), qv = evaluate(q, v);
        CHECK(rel(evaluate(p + q, v), pv + qv) < 1e-12);
        CHECK(rel(evaluate(p * q, v), pv * qv) < 1e-10);
        CHECK(rel(evaluate(p - q, v), pv - qv) < 1e-12);
    }
}

TEST_CASE("ring axioms hold exactly on integer polynomials") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 30; ++k) {
        const IPoly a = random_int_poly(3, rng), b = random_int_poly(3, rng), d = random_int_poly(3, rng);
        CHECK((a + b) + d == a + (b + d));
        CHECK((a * b) * d == a * (b * d));
        CHECK(a + b == b + a);
        CHECK(a * b == b * a);
        CHECK(a * (b + d) == a * b + a * d);
        CHECK(differentiate(a + b, 1) == differentiate(a, 1) + differentiate(b, 1));
    }
}

TEST_CASE("composition") {
    const Poly X = x(1, 0);
    const Poly U = x(1, 0);
    CHECK(compose(X * X, {U + c(1, 1.0)}) == U * U + C(2.0) * U + c(1, 1.0));

    std::mt19937_64 rng(6);
    const Poly p = random_poly(2, 3, rng);
    CHECK(compose(p, {x(2, 0), x(2, 1)}) == p);
    CHECK_THROWS_AS(compose(p, {x(2, 0)}), ParameterError);
    CHECK_THROWS_AS(compose(p, {x(2, 0), x(3, 1)}), ParameterError);

    for (int k = 0; k < 20; ++k) {
        const Poly q = random_poly(3, 3, rng);
        const std::vector<Poly> subs{random_poly(2, 2, rng), random_poly(2, 2, rng), random_poly(2, 1, rng)};
        const Poly composed = compose(q, subs);
        int max_sub = 0;
        for (const auto& s : subs) max_sub = std::max(max_sub, s.degree());
        CHECK(composed.degree() <= q.degree() * max_sub);
        const Eigen::VectorXcd v = random_point(2, rng);
        Eigen::VectorXcd inner(3);
        for (int s = 0; s < 3; ++s) inner(s) = evaluate(subs[s], v);
        CHECK(rel(evaluate(composed, v), evaluate(q, inner)) < 1e-10);
    }
}

TEST_CASE("jacobian") {
    const Poly X = x(2, 0), Y = x(2, 1);
    const System sys(2, {X * X + Y, Y});
    const auto J = jacobian(sys);
    CHECK(J[0][0] == C(2.0) * X);
    CHECK(J[0][1] == c(2, 1.0));
    CHECK(J[1][0].is_zero());
    CHECK(J[1][1] == c(2, 1.0));

    const auto Jc = jacobian(System(2, {c(2, 3.0), X}));
    CHECK(Jc[0][0].is_zero());
    CHECK(Jc[0][1].is_zero());
}

TEST_CASE("jacobian matches central differences") {
    std::mt19937_64 rng(7);
    const double h = 1e-6;
    for (int k = 0; k < 10; ++k) {
        System sys(3, {random_poly(3, 4, rng), random_poly(3, 4, rng), random_poly(3, 3, rng)});
        const auto J = jacobian(sys);
        const Eigen::VectorXcd v = random_point(3, rng);
        for (int r = 0; r < 3; ++r)
            for (int var = 0; var < 3; ++var) {
                Eigen::VectorXcd vp = v, vm = v;
                vp(var) += h;
                vm(var) -= h;
                const C fd = (evaluate(sys.polys[r], vp) - evaluate(sys.polys[r], vm)) / (2.0 * h);
                CHECK(rel(fd, evaluate(J[r][var], v)) < 1e-7);
            }
    }
}

TEST_CASE("graded lex printing") {
    const Poly X = x(2, 0), Y = x(2, 1);
    CHECK(to_string(C(2.0) * X * X * Y - c(2, 1.0)) == "2*x0^2*x1 + -1");
    CHECK(to_string(X + Y + X * Y) == "1*x0*x1 + 1*x0 + 1*x1");
    CHECK(to_string(Poly(2)) == "0");
}

TEST_CASE("pruning drops relatively tiny coefficients only") {
    Poly p = x(1, 0) + c(1, 1e-16);
    CHECK(p.num_terms() == 2);
    CHECK(p.pruned(1e-14).num_terms() == 1);
    CHECK(p.pruned(1e-17).num_terms() == 2);
}
