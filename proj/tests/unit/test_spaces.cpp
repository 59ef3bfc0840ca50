#include <gtest/gtest.h>

#include "support/generators.hpp"

using namespace testsupport;

namespace {

FunctionSpace one_and_xex() { return FunctionSpace({qp(P({1}), q(0)), qp(P({0, 1}), q(1))}); }

std::vector<int> conj_prediction(const std::vector<int>& e, int shift) {
    const int n = static_cast<int>(e.size());
    std::vector<int> out;
    for (int i = n - 1; i >= 0; --i) out.push_back(-e[static_cast<size_t>(i)] - 1 + n - shift);
    return out;
}

}  // namespace

TEST(Spaces, WronskianOfExponentials) {
    const Scalar l1 = q(1, 2), l2 = q(-3);
    const FunctionSpace v({QuasiPolynomial::exponential(l1), QuasiPolynomial::exponential(l2)});
    const QuasiPolynomial w = v.wronskian();
    EXPECT_EQ(w.exponent(), l1 + l2);
    // Canonical order sorts lambda, so the sign follows (l2, l1).
    EXPECT_EQ(w.coefficient(), RationalFunction(Polynomial::constant(l1 - l2)));
}

TEST(Spaces, WronskianExamples) {
    EXPECT_EQ(FunctionSpace({qp(P({1}), q(0)), qp(P({0, 1}), q(0))}).wronskian(), qp(P({1}), q(0)));
    const QuasiPolynomial w = one_and_xex().wronskian();
    EXPECT_EQ(w, qp(P({1, 1}), q(1)));
}

TEST(Spaces, DependentGeneratorsRejected) {
    try {
        FunctionSpace({qp(P({1, 1}), q(0)), qp(P({2, 2}), q(0))});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateBasis);
    }
}

TEST(Spaces, MixedExponentSpanRejected) {
    // <e^x + e^{2x}> is not spanned by single-exponent functions.
    try {
        FunctionSpace({qp(P({1}), q(1)) + qp(P({1}), q(2))});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotQuasiPolynomial);
    }
    // But a pair whose span separates is fine.
    const FunctionSpace v({qp(P({1}), q(1)) + qp(P({1}), q(2)), qp(P({1}), q(1)) - qp(P({1}), q(2))});
    EXPECT_EQ(v.dimension(), 2);
    EXPECT_EQ(v.exponents().size(), 2u);
}

TEST(Spaces, ExponentsExamples) {
    const auto e = exponents_at(one_and_xex(), q(-1));
    EXPECT_EQ(e.exponents, (std::vector<int>{0, 2}));
    EXPECT_EQ(e.defect(), 1);
    const FunctionSpace lin({qp(P({1}), q(0)), qp(P({0, 1}), q(0))});
    EXPECT_EQ(exponents_at(lin, q(7, 3)).exponents, (std::vector<int>{0, 1}));
    const FunctionSpace ex({QuasiPolynomial::exponential(q(1)), QuasiPolynomial::exponential(q(2))});
    EXPECT_EQ(exponents_at(ex, q(5)).exponents, (std::vector<int>{0, 1}));
}

TEST(Spaces, SingularPointsExamples) {
    const auto s = singular_points(one_and_xex());
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].point, q(-1));
    EXPECT_EQ(s[0].exponents, (std::vector<int>{0, 2}));
    const FunctionSpace ex({QuasiPolynomial::exponential(q(1)), QuasiPolynomial::exponential(q(2))});
    EXPECT_TRUE(singular_points(ex).empty());
    const FunctionSpace quad({qp(P({1}), q(0)), qp(P({0, 1}), q(0)), qp(P({0, 0, 1}), q(0))});
    EXPECT_TRUE(singular_points(quad).empty());
}

TEST(Spaces, ApproximateBackendAgrees) {
    const FunctionSpace v = one_and_xex().to_backend(Backend::Approx);
    const auto s = singular_points(v);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_NEAR(std::abs(s[0].point.to_complex() + 1.0), 0.0, 1e-9);
    EXPECT_EQ(s[0].exponents, (std::vector<int>{0, 2}));
}

TEST(Spaces, ConjugateOfExponentials) {
    const FunctionSpace v({QuasiPolynomial::exponential(q(1)), QuasiPolynomial::exponential(q(3))});
    const FunctionSpace expected({QuasiPolynomial::exponential(q(-1)), QuasiPolynomial::exponential(q(-3))});
    EXPECT_TRUE(span_equal(conjugate(v), expected));
}

TEST(Spaces, ConjugateOfLine) {
    const QuasiPolynomial f = qp(P({1, 2}), q(1, 2));
    const FunctionSpace star = conjugate(FunctionSpace({f}));
    EXPECT_TRUE(span_equal(star, FunctionSpace({qp(RationalFunction(P({1}), P({1, 2})), q(-1, 2))})));
}

TEST(Spaces, RegularizedConjugateExample) {
    const FunctionSpace v = one_and_xex();
    const FunctionSpace star = conjugate(v);
    EXPECT_EQ(exponents_at(star, q(-1)).exponents, (std::vector<int>{-1, 1}));
    const FunctionSpace dag = regularized_conjugate(v);
    EXPECT_EQ(exponents_at(dag, q(-1)).exponents, (std::vector<int>{-2, 0}));
    const FunctionSpace ex({QuasiPolynomial::exponential(q(1)), QuasiPolynomial::exponential(q(2))});
    EXPECT_TRUE(span_equal(regularized_conjugate(ex), conjugate(ex)));
}

TEST(Spaces, DoubleConjugateIsIdentity) {
    std::mt19937 rng(21);
    for (int t = 0; t < 8; ++t) {
        const auto s = random_last_heavy(rng, 2, 2, 2);
        ASSERT_TRUE(span_equal(conjugate(conjugate(s.space)), s.space));
    }
}

TEST(Spaces, ConjugateExponentsOnRandomSpecialSpaces) {
    std::mt19937 rng(4);
    for (int t = 0; t < 8; ++t) {
        const auto s = t % 2 ? random_last_heavy(rng, 3, 2, 2) : random_split_pair(rng, 1, 1);
        const FunctionSpace star = conjugate(s.space);
        const FunctionSpace dag = regularized_conjugate(s.space);
        ASSERT_EQ(star.dimension(), s.space.dimension());
        ASSERT_EQ(dag.dimension(), s.space.dimension());
        for (const auto& sp : singular_points(s.space)) {
            ASSERT_EQ(exponents_at(star, sp.point).exponents, conj_prediction(sp.exponents, 0));
            ASSERT_EQ(exponents_at(dag, sp.point).exponents, conj_prediction(sp.exponents, sp.defect()));
        }
    }
}

TEST(Spaces, WronskianIdentityHolds) {
    std::mt19937 rng(8);
    for (int t = 0; t < 10; ++t) {
        const auto s = t % 3 == 0 ? random_split_pair(rng, 1, 1) : random_last_heavy(rng, 2 + t % 2, 2 + t % 2, 2);
        const auto w = wronskian_identity(s.space, singular_points(s.space));
        ASSERT_TRUE(w.holds()) << w.lhs << " vs " << w.rhs;
        ASSERT_EQ(w.rhs, s.space.wronskian_numerator().degree());
    }
    // A space with several functions per exponent.
    const FunctionSpace v({qp(P({1}), q(0)), qp(P({0, 0, 1}), q(0)), qp(P({1}), q(1))});
    const auto w = wronskian_identity(v, singular_points(v));
    EXPECT_TRUE(w.holds());
}

TEST(Spaces, BasisChangeInvariance) {
    std::mt19937 rng(13);
    for (int t = 0; t < 6; ++t) {
        const auto s = random_last_heavy(rng, 3, 2, 2);
        const FunctionSpace other(scramble(rng, s.space.basis()));
        ASSERT_TRUE(span_equal(other, s.space));
        ASSERT_EQ(other.basis().size(), s.space.basis().size());
        for (size_t k = 0; k < other.basis().size(); ++k) ASSERT_EQ(other.basis()[k], s.space.basis()[k]);
        const auto a = singular_points(other), b = singular_points(s.space);
        ASSERT_EQ(a.size(), b.size());
        for (size_t k = 0; k < a.size(); ++k) ASSERT_EQ(a[k].exponents, b[k].exponents);
        ASSERT_TRUE(span_equal(conjugate(other), conjugate(s.space)));
    }
}

TEST(Spaces, ClassifySpecialFindsDegrees) {
    // <1, (x - t) e^x>: Wronskian (x - t + 1) e^x, singular point t - 1.
    const Scalar t = q(5, 2);
    const FunctionSpace v({qp(P({1}), q(0)), qp(Polynomial::linear(t), q(1))});
    const SpecialSpace s = classify_special(v, {t - q(1), q(7)});
    EXPECT_EQ(s.n, (std::vector<int>{0, 1}));
    EXPECT_EQ(s.m, (std::vector<int>{1, 0}));
    EXPECT_EQ(s.trivial_points(), (std::vector<int>{1}));
}

TEST(Spaces, ClassifySpecialAllowsNonSingularPoints) {
    const FunctionSpace v({QuasiPolynomial::exponential(q(0)), QuasiPolynomial::exponential(q(1))});
    const SpecialSpace s = classify_special(v, {q(0), q(1)});
    EXPECT_EQ(s.n, (std::vector<int>{0, 0}));
    EXPECT_EQ(s.m, (std::vector<int>{0, 0}));
}

TEST(Spaces, ClassifySpecialErrors) {
    // Repeated exponent: not special.
    const FunctionSpace cubic({qp(P({1}), q(0)), qp(P({0, 0, 0, 1}), q(0))});
    try {
        classify_special(cubic, {q(0), q(1)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotSpecial);
    }
    // A single point is not enough.
    EXPECT_THROW(classify_special(FunctionSpace({qp(P({1}), q(0)), qp(P({-2, 1}), q(1))}), {q(1)}), Error);
    // A singular point outside z.
    const FunctionSpace v({qp(P({1}), q(0)), qp(P({-2, 1}), q(1))});
    try {
        classify_special(v, {q(3), q(4)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingSingularPoint);
    }
    // Exponent pattern violated: <1, x^2 e^x> at 0 has exponents {0, 2}, fine, but
    // <x, x^2 e^x> at 0 starts at 1.
    const FunctionSpace w({qp(P({0, 1}), q(0)), qp(P({0, 0, 1}), q(1))});
    try {
        classify_special(w, {q(0), q(-1)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotSpecial);
    }
}

TEST(Spaces, RandomSpecialSpacesClassify) {
    std::mt19937 rng(17);
    for (int t = 0; t < 6; ++t) {
        const auto s = random_last_heavy(rng, 2 + t % 2, 2 + (t / 2) % 2, 2);
        const SpecialSpace sp = classify_special(s.space, s.z, s.lambda);
        ASSERT_EQ(sp.n, s.n);
        ASSERT_EQ(sp.m, s.m);
    }
}
