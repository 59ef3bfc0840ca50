#include <gtest/gtest.h>

#include <cmath>

#include "support/generators.hpp"

using namespace testsupport;

TEST(Polynomial, TrailingZerosStripped) {
    const Polynomial p = P({1, 2, 0, 0});
    EXPECT_EQ(p.degree(), 1);
    EXPECT_TRUE(P({0, 0}).is_zero());
    EXPECT_EQ(P({}).degree(), -1);
}

TEST(Polynomial, DegreeOfProduct) {
    std::mt19937 rng(3);
    for (int t = 0; t < 50; ++t) {
        std::vector<Scalar> a, b;
        for (int k = 0; k < 4; ++k) a.push_back(random_rational(rng, 5));
        for (int k = 0; k < 3; ++k) b.push_back(random_rational(rng, 5));
        a.push_back(q(1));
        b.push_back(q(-2));
        const Polynomial pa(a, Backend::Exact), pb(b, Backend::Exact);
        ASSERT_EQ((pa * pb).degree(), pa.degree() + pb.degree());
    }
}

TEST(Polynomial, GcdExamples) {
    EXPECT_EQ(poly_gcd(P({-1, 0, 1}), P({-1, 1})), P({-1, 1}));
    EXPECT_EQ(poly_gcd(P({0, 1}), P({1, 1})), P({1}));
    EXPECT_EQ(poly_gcd(Polynomial(Backend::Exact), P({4, 2})), P({2, 1}));
    try {
        poly_gcd(P({1, 1}).to_backend(Backend::Approx), P({1}).to_backend(Backend::Approx));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ApproxBackendUnsupported);
    }
}

TEST(Polynomial, DivmodAndExactQuotient) {
    const auto [quot, rem] = divmod(P({-1, 0, 1}), P({-1, 1}));
    EXPECT_EQ(quot, P({1, 1}));
    EXPECT_TRUE(rem.is_zero());
    EXPECT_THROW(exact_quotient(P({1, 0, 1}), P({-1, 1})), Error);
}

TEST(Polynomial, RootsOfGoldenQuadratic) {
    // Oracle: quadratic formula.
    const double r1 = (3.0 - std::sqrt(5.0)) / 2.0;
    const double r2 = (3.0 + std::sqrt(5.0)) / 2.0;
    for (Backend b : {Backend::Exact, Backend::Approx}) {
        const auto roots = poly_roots(P({1, -3, 1}).to_backend(b));
        ASSERT_EQ(roots.size(), 2u);
        EXPECT_NEAR(roots[0].value.to_complex().real(), r1, 1e-12);
        EXPECT_NEAR(roots[1].value.to_complex().real(), r2, 1e-12);
        EXPECT_EQ(roots[0].multiplicity, 1);
        EXPECT_EQ(roots[0].approximate, b == Backend::Exact);
    }
}

TEST(Polynomial, DoubleRoot) {
    for (Backend b : {Backend::Exact, Backend::Approx}) {
        const auto roots = poly_roots(P({1, -2, 1}).to_backend(b));
        ASSERT_EQ(roots.size(), 1u);
        EXPECT_EQ(roots[0].multiplicity, 2);
        EXPECT_NEAR(std::abs(roots[0].value.to_complex() - 1.0), 0.0, 1e-7);
    }
    const auto exact = poly_roots(P({1, -2, 1}));
    EXPECT_EQ(exact[0].value, q(1));
    EXPECT_FALSE(exact[0].approximate);
}

TEST(Polynomial, GaussianRoots) {
    const auto roots = poly_roots(P({1, 0, 1}));
    ASSERT_EQ(roots.size(), 2u);
    EXPECT_EQ(roots[0].value, qi(0, -1));
    EXPECT_EQ(roots[1].value, qi(0, 1));
    EXPECT_FALSE(roots[0].approximate);
}

TEST(Polynomial, RootsReconstructPolynomial) {
    std::mt19937 rng(11);
    std::normal_distribution<double> g;
    for (int t = 0; t < 30; ++t) {
        std::vector<Scalar> c;
        const int deg = 2 + t % 9;
        for (int k = 0; k <= deg; ++k) c.push_back(ap(g(rng), g(rng)));
        const Polynomial p(c, Backend::Approx);
        Polynomial rebuilt = Polynomial::constant(p.leading());
        for (const auto& r : poly_roots(p)) rebuilt *= Polynomial::linear(r.value).pow(r.multiplicity);
        for (int k = 0; k <= deg; ++k)
            ASSERT_LT(std::abs(rebuilt.coeff(k).to_complex() - p.coeff(k).to_complex()), 1e-8 * (1.0 + p.max_abs()));
    }
}

TEST(Polynomial, ClusteredMultiplicities) {
    // (x-1)^3 (x+2)^2 (x-i)
    Polynomial p = Polynomial::linear(q(1)).pow(3) * Polynomial::linear(q(-2)).pow(2) * Polynomial::linear(qi(0, 1));
    const auto approx = poly_roots(p.to_backend(Backend::Approx));
    int total = 0;
    for (const auto& r : approx) total += r.multiplicity;
    EXPECT_EQ(total, 6);
    const auto exact = poly_roots(p);
    ASSERT_EQ(exact.size(), 3u);
    EXPECT_EQ(exact[0].value, q(-2));
    EXPECT_EQ(exact[0].multiplicity, 2);
    EXPECT_EQ(exact[1].value, qi(0, 1));
    EXPECT_EQ(exact[2].multiplicity, 3);
}

TEST(Polynomial, ShiftAndTaylor) {
    const Polynomial p = P({1, 2, 3});
    const auto t = p.taylor_at(q(1));
    // p(1+s) = 6 + 8 s + 3 s^2
    EXPECT_EQ(t[0], q(6));
    EXPECT_EQ(t[1], q(8));
    EXPECT_EQ(t[2], q(3));
}

TEST(Rational, NormalizationAndArithmetic) {
    const RationalFunction r(P({-1, 0, 1}), P({-2, 2}));
    EXPECT_EQ(r.num(), P({1, 1}) * q(1, 2));
    EXPECT_EQ(r.den(), P({1}));
    EXPECT_TRUE(r.is_polynomial());
    const RationalFunction a(P({1}), P({0, 1}));
    const RationalFunction b(P({1}), P({1, 1}));
    EXPECT_EQ(a - b, RationalFunction(P({1}), P({0, 1, 1})));
    EXPECT_EQ(a.derivative(), RationalFunction(P({-1}), P({0, 0, 1})));
    EXPECT_THROW(a.to_polynomial(), Error);
    EXPECT_THROW(a(q(0)), Error);
}

TEST(PolynomialRoots, PerturbedDoubleRootMerges) {
    // (x + 1/2)^2 (x - 2) with a 1e-14 perturbation splits the double root by ~1e-7.
    std::vector<Scalar> c{ap(-0.5 + 1e-14), ap(-1.75), ap(-1.0), ap(1.0)};
    const auto roots = poly_roots(Polynomial(c, Backend::Approx));
    ASSERT_EQ(roots.size(), 2u);
    EXPECT_EQ(roots[0].multiplicity, 2);
    EXPECT_NEAR(std::abs(roots[0].value.to_complex() + 0.5), 0.0, 1e-6);
    EXPECT_EQ(roots[1].multiplicity, 1);
}

TEST(PolynomialRoots, NearbySimpleRootsStaySeparate) {
    const Polynomial p = Polynomial::from_roots({ap(1.0), ap(1.0 + 1e-4), ap(-3.0)}, Backend::Approx);
    const auto roots = poly_roots(p);
    ASSERT_EQ(roots.size(), 3u);
    for (const auto& r : roots) EXPECT_EQ(r.multiplicity, 1);
}
