#include <gtest/gtest.h>

#include <cmath>

#include "support/generators.hpp"

using namespace testsupport;

TEST(QuasiPoly, DerivativeExamples) {
    EXPECT_EQ(qp_derivative(qp(P({0, 1}), q(1))), qp(P({1, 1}), q(1)));
    const Scalar lambda = q(-5, 3);
    EXPECT_EQ(qp_derivative(QuasiPolynomial::exponential(lambda)), qp(Polynomial::constant(lambda), lambda));
    EXPECT_EQ(qp_derivative(qp(P({0, 0, 1}), q(0)), 2), qp(P({2}), q(0)));
}

TEST(QuasiPoly, TermsMergeAndCancel) {
    const QuasiPolynomial a = qp(P({1}), q(1)) + qp(P({0, 1}), q(2));
    const QuasiPolynomial b = a - qp(P({1}), q(1));
    EXPECT_EQ(b.terms().size(), 1u);
    EXPECT_TRUE((a - a).is_zero());
    EXPECT_EQ((qp(P({1}), q(1)) * qp(P({1}), q(2))).exponent(), q(3));
}

TEST(QuasiPoly, ExpansionOfSimplePole) {
    const Scalar z = q(2, 3);
    const auto s = qp_expand_at(qp(RationalFunction(P({1}), Polynomial::linear(z)), q(0)), z, 2);
    EXPECT_EQ(s.order, -1);
    ASSERT_EQ(s.coeffs.size(), 3u);
    EXPECT_EQ(s.coeffs[0], q(1));
    EXPECT_EQ(s.coeffs[1], q(0));
    EXPECT_EQ(s.coeffs[2], q(0));
}

TEST(QuasiPoly, ExpansionOfExponential) {
    const auto s = qp_expand_at(QuasiPolynomial::exponential(q(1)), q(0), 2);
    EXPECT_EQ(s.order, 0);
    EXPECT_EQ(s.coeffs[0], q(1));
    EXPECT_EQ(s.coeffs[1], q(1));
    EXPECT_EQ(s.coeffs[2], q(1, 2));
}

TEST(QuasiPoly, ExpansionKeepsUnitSymbolic) {
    // (x+1) e^x at -1: order 1, leading coefficient e^{-1}.
    const auto s = qp_expand_at(qp(P({1, 1}), q(1)), q(-1), 1);
    EXPECT_EQ(s.order, 1);
    EXPECT_EQ(s.coeffs[0], q(1));
    EXPECT_EQ(s.unit_exponent, q(1));
    EXPECT_NEAR(std::abs(s.unit_value() * s.coeffs[0].to_complex() - std::exp(-1.0)), 0.0, 1e-15);
    const auto a = qp_expand_at(qp(P({1, 1}), q(1)).to_backend(Backend::Approx), ap(-1.0), 1);
    EXPECT_EQ(a.order, 1);
    EXPECT_NEAR(a.coeffs[0].to_complex().real(), std::exp(-1.0), 1e-14);
}

TEST(QuasiPoly, ExpansionIsMultiplicative) {
    std::mt19937 rng(5);
    for (int t = 0; t < 25; ++t) {
        const Scalar z = random_rational(rng, 2);
        const Scalar l1 = random_rational(rng, 2), l2 = random_rational(rng, 2);
        Polynomial n1 = Polynomial::linear(random_rational(rng, 2)) * Polynomial::linear(z);
        Polynomial n2 = Polynomial::linear(random_rational(rng, 2));
        const RationalFunction r1(n1, Polynomial::linear(z).pow(2));
        const RationalFunction r2(n2, Polynomial::linear(random_rational(rng, 3) + q(7)));
        const QuasiPolynomial f = qp(r1, l1), g = qp(r2, l2);
        const int K = 5;
        const auto sf = qp_expand_at(f, z, K), sg = qp_expand_at(g, z, K), sfg = qp_expand_at(f * g, z, K);
        const auto prod = sf * sg;
        ASSERT_EQ(sfg.order, sf.order + sg.order);
        ASSERT_EQ(sfg.unit_exponent, prod.unit_exponent);
        for (int k = sfg.order; k <= prod.last_order(); ++k) ASSERT_EQ(sfg.coeff_at(k), prod.coeff_at(k));
    }
}

TEST(QuasiPoly, ExpansionCommutesWithDerivative) {
    std::mt19937 rng(9);
    for (int t = 0; t < 25; ++t) {
        const Scalar z = random_rational(rng, 2);
        const Scalar lambda = random_rational(rng, 2);
        const RationalFunction r(Polynomial::linear(random_rational(rng, 2)) * Polynomial::linear(random_rational(rng, 2)),
                                 Polynomial::linear(z).pow(1 + t % 3));
        const QuasiPolynomial f = qp(r, lambda);
        const int K = 6;
        const auto s = qp_expand_at(f, z, K);
        const auto ds = s.derivative();
        const auto sd = qp_expand_at(qp_derivative(f), z, K);
        for (int k = std::max(sd.order, ds.order); k <= std::min(sd.last_order(), ds.last_order()); ++k)
            ASSERT_EQ(sd.coeff_at(k), ds.coeff_at(k));
    }
}

TEST(QuasiPoly, ExactMultiExponentAwayFromZeroRefused) {
    const QuasiPolynomial f = qp(P({1}), q(0)) + qp(P({1}), q(1));
    EXPECT_THROW(qp_expand_at(f, q(1), 2), Error);
    EXPECT_NO_THROW(qp_expand_at(f, q(0), 2));
    EXPECT_NO_THROW(qp_expand_at(f.to_backend(Backend::Approx), ap(1.0), 2));
}

TEST(QuasiPoly, Evaluation) {
    const QuasiPolynomial f = qp(P({0, 1}), q(1)) + qp(P({2}), q(0));
    EXPECT_NEAR(std::abs(f.eval(0.5) - (0.5 * std::exp(0.5) + 2.0)), 0.0, 1e-14);
}
