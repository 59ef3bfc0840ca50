#include <gtest/gtest.h>

#include "support/generators.hpp"

using namespace testsupport;

TEST(Field, RationalAddition) { EXPECT_EQ(q(1, 2) + q(1, 3), q(5, 6)); }

TEST(Field, ZeroAbsorbs) {
    EXPECT_TRUE((q(0) * qi(7, -3)).is_zero());
    EXPECT_TRUE((ap(0.0) * ap(2.5, 1.0)).is_zero());
}

TEST(Field, ConjugateProduct) {
    const Scalar p = qi(2, 1) * qi(2, -1);
    EXPECT_EQ(p, q(5));
    EXPECT_TRUE(p.is_real());
}

TEST(Field, ApproxEquality) {
    EXPECT_TRUE(approx_equal(q(1, 3), q(1, 3)));
    EXPECT_TRUE(approx_equal(ap(1.0), ap(1.0 + 1e-12)));
    EXPECT_FALSE(approx_equal(ap(1.0), ap(1.01)));
    // Relative for large magnitudes.
    EXPECT_TRUE(approx_equal(ap(1e6), ap(1e6 + 1e-4)));
    EXPECT_FALSE(approx_equal(ap(1e6), ap(1e6 + 1.0)));
}

TEST(Field, ToleranceScopeRestores) {
    {
        ToleranceScope scope(1e-3);
        EXPECT_TRUE(approx_equal(ap(1.0), ap(1.0005)));
    }
    EXPECT_FALSE(approx_equal(ap(1.0), ap(1.0005)));
    EXPECT_DOUBLE_EQ(tolerance(), kDefaultTolerance);
}

TEST(Field, MixingBackendsThrows) {
    try {
        (void)(q(1) + ap(1.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MixedBackend);
    }
    EXPECT_THROW((void)approx_equal(q(1), ap(1.0)), Error);
}

TEST(Field, DivisionByZero) {
    try {
        (void)(q(1) / q(0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DivisionByZero);
    }
    try {
        (void)(ap(1.0) / ap(1e-12));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DivisionByZero);
    }
}

TEST(Field, ExactAxiomsOnRandomValues) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const Scalar a = random_rational(rng, 9) + qi(0, 1) * random_rational(rng, 9);
        const Scalar b = random_rational(rng, 9) + qi(0, 1) * random_rational(rng, 9);
        const Scalar c = random_rational(rng, 9) + qi(0, 1) * random_rational(rng, 9);
        ASSERT_EQ((a + b) + c, a + (b + c));
        ASSERT_EQ(a * (b + c), a * b + a * c);
        ASSERT_EQ(a * b, b * a);
        if (!b.is_zero()) {
            ASSERT_EQ((a / b) * b, a);
        }
    }
}

TEST(Field, ParseAndPrint) {
    const Scalar s = Scalar::parse_exact("-3/4", "5");
    EXPECT_EQ(s, Scalar::exact(Rational(-3, 4), Rational(5)));
    EXPECT_EQ(Scalar::parse_exact(s.exact_value().re.get_str(), s.exact_value().im.get_str()), s);
    EXPECT_THROW(Scalar::parse_exact("1/0", "0"), Error);
    EXPECT_THROW(Scalar::parse_exact("abc", "0"), Error);
}

TEST(Field, FactorialAndBinomial) {
    EXPECT_EQ(factorial(5, Backend::Exact), q(120));
    EXPECT_EQ(binomial(6, 2, Backend::Exact), q(15));
    EXPECT_EQ(binomial(3, 5, Backend::Exact), q(0));
}
