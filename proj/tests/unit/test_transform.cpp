#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bispectral/transform.hpp"
#include "support/generators.hpp"

using namespace testsupport;

namespace {

// (1 / 2 pi i) \oint e^{ux} f(x) dx over a small circle, trapezoidal rule.
Complex numeric_residue(const QuasiPolynomial& f, Complex z0, Complex u, double radius = 0.05, int samples = 512) {
    Complex acc = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double th = 2.0 * std::numbers::pi * k / samples;
        const Complex w = radius * Complex(std::cos(th), std::sin(th));
        acc += std::exp(u * (z0 + w)) * f.eval(z0 + w) * w;
    }
    return acc / static_cast<double>(samples);
}

bool all_passed(const std::vector<DualityCheck>& checks, std::string* why) {
    for (const auto& c : checks)
        if (!c.passed) {
            *why = c.name + ": " + c.detail;
            return false;
        }
    return true;
}

// Generic approximate space <p_1 e^{l_1 x}, ..., p_N e^{l_N x}> with deg p_i >= 1.
FunctionSpace random_generic_approx(std::mt19937& rng, int N) {
    std::uniform_real_distribution<double> unit(-1.5, 1.5);
    std::uniform_int_distribution<int> deg(1, 2);
    std::vector<QuasiPolynomial> gens;
    for (int i = 0; i < N; ++i) {
        std::vector<Scalar> c;
        const int d = deg(rng);
        for (int k = 0; k < d; ++k) c.push_back(ap(unit(rng), unit(rng)));
        c.push_back(ap(1.0));
        gens.push_back(QuasiPolynomial::term(RationalFunction(Polynomial(std::move(c), Backend::Approx)), ap(i - 0.5 * (N - 1)), 'x'));
    }
    return FunctionSpace(gens);
}

const double kGolden = (3.0 + std::sqrt(5.0)) / 2.0;

}  // namespace

TEST(Transform, CauchyKernelExamples) {
    const Scalar z = q(2, 3);
    EXPECT_EQ(contour_transform(qp(RationalFunction(P({1}), Polynomial::linear(z)), q(0)), z),
              QuasiPolynomial::exponential(z, 'u'));
    const Polynomial sq = Polynomial::linear(z).pow(2);
    EXPECT_EQ(contour_transform(qp(RationalFunction(P({1}), sq), q(0)), z), qp(P({0, 1}), z, 'u'));
    // Regular at z: no contribution.
    EXPECT_TRUE(contour_transform(qp(P({1, 2}), q(1)), z).is_zero());
    EXPECT_TRUE(contour_transform(qp(RationalFunction(P({1}), P({5, 1})), q(0)), z).is_zero());
}

TEST(Transform, ExponentialFactorExactAndApprox) {
    const Scalar lambda = q(1, 2), z = q(3);
    const QuasiPolynomial f = qp(RationalFunction(P({1}), Polynomial::linear(z)), lambda);
    // Exact drops the constant e^{lambda z}.
    EXPECT_EQ(contour_transform(f, z), QuasiPolynomial::exponential(z, 'u'));
    const QuasiPolynomial g = contour_transform(f.to_backend(Backend::Approx), ap(3));
    ASSERT_EQ(g.terms().size(), 1u);
    EXPECT_NEAR(std::abs(g.coefficient().num().coeff(0).to_complex() - std::exp(1.5)), 0.0, 1e-9);
}

TEST(Transform, MatchesNumericContourIntegral) {
    std::mt19937 rng(2);
    for (int t = 0; t < 8; ++t) {
        const Scalar z0 = random_rational(rng, 2);
        const Scalar lambda = random_rational(rng, 2);
        const int d = 1 + t % 3;
        const Polynomial num = Polynomial::linear(random_rational(rng, 2)) * P({1, 1, 1}) + P({2});
        const QuasiPolynomial f = qp(RationalFunction(num, Polynomial::linear(z0).pow(d)), lambda);
        const QuasiPolynomial fa = f.to_backend(Backend::Approx);
        const QuasiPolynomial r = contour_transform(fa, z0.to_backend(Backend::Approx));
        for (const Complex u : {Complex(0.3, 0.1), Complex(-1.2, 0.4)}) {
            const Complex expected = numeric_residue(fa, z0.to_complex(), u);
            ASSERT_NEAR(std::abs(r.eval(u) - expected), 0.0, 1e-9 * std::max(1.0, std::abs(expected)));
        }
        // Exact result differs by the dropped constant e^{lambda z0}.
        const QuasiPolynomial re = contour_transform(f, z0);
        const Complex unit = std::exp(lambda.to_complex() * z0.to_complex());
        ASSERT_NEAR(std::abs(re.eval(0.7) * unit - r.eval(0.7)), 0.0, 1e-9 * std::max(1.0, std::abs(r.eval(0.7))));
    }
}

TEST(Transform, DualOfOneAndXEx) {
    const FunctionSpace v({qp(P({1}), q(0)), qp(P({0, 1}), q(1))});
    const TransformResult r = bispectral_dual(v);
    EXPECT_EQ(r.dual_space.dimension(), 1);
    EXPECT_EQ(r.dual_space.variable(), 'u');
    EXPECT_TRUE(span_equal(r.dual_space, FunctionSpace({qp(P({-1, 1}), q(-1), 'u')})));
    ASSERT_EQ(r.components.size(), 1u);
    EXPECT_EQ(r.components[0].point, q(-1));
}

TEST(Transform, DualPropertiesOnSplitPairs) {
    std::mt19937 rng(19);
    for (int t = 0; t < 4; ++t) {
        const auto s = random_split_pair(rng, 1, 1);
        const TransformResult r = bispectral_dual(s.space);
        std::string why;
        ASSERT_TRUE(all_passed(verify_bispectral_dual(s.space, r), &why)) << why;
        const TransformResult back = bispectral_dual(r.dual_space);
        ASSERT_EQ(back.dual_space.variable(), 'x');
        ASSERT_TRUE(span_equal(back.dual_space, s.space));
    }
}

TEST(Transform, DualPropertiesOnGenericApproxSpaces) {
    std::mt19937 rng(23);
    for (int t = 0; t < 6; ++t) {
        const FunctionSpace v = random_generic_approx(rng, 2 + t % 2);
        const TransformResult r = bispectral_dual(v);
        std::string why;
        ASSERT_TRUE(all_passed(verify_bispectral_dual(v, r), &why)) << why;
        ASSERT_TRUE(span_equal(bispectral_dual(r.dual_space).dual_space, v));
    }
}

TEST(Transform, WronskianBookkeepingSwaps) {
    std::mt19937 rng(29);
    for (int t = 0; t < 3; ++t) {
        const auto s = random_split_pair(rng, 1, 1);
        const TransformResult r = bispectral_dual(s.space);
        const auto wv = wronskian_identity(s.space, singular_points(s.space));
        const auto wu = wronskian_identity(r.dual_space, singular_points(r.dual_space));
        ASSERT_TRUE(wu.holds());
        ASSERT_EQ(wu.lhs, wv.rhs);
        ASSERT_EQ(wu.rhs, wv.lhs);
    }
}

TEST(Transform, SpecialDualOnRandomSpaces) {
    std::mt19937 rng(37);
    for (int t = 0; t < 6; ++t) {
        const auto s = t % 3 == 2 ? random_split_pair(rng, 1, 1) : random_last_heavy(rng, 2 + t % 2, 2 + (t / 2) % 2, 2);
        const SpecialSpace sp = classify_special(s.space, s.z, s.lambda);
        const TransformResult r = special_bispectral_dual(sp);
        ASSERT_TRUE(r.special.has_value());
        ASSERT_EQ(r.special->n, s.m);
        ASSERT_EQ(r.special->m, s.n);
        std::string why;
        ASSERT_TRUE(all_passed(verify_special_dual(sp, r), &why)) << why;
        const TransformResult back = special_bispectral_dual(*r.special);
        ASSERT_TRUE(span_equal(back.dual_space, s.space));
        ASSERT_EQ(back.special->n, s.n);
    }
}

TEST(Transform, SpecialDualAtCriticalPoint) {
    // n = m = (1, 1), lambda = (0, 1), z = (0, 1), y_1 = x - t.
    const std::vector<Scalar> lambda{ap(0), ap(1)}, z{ap(0), ap(1)};
    const MonicOperator mono = factorized_from_tuple({Polynomial::linear(ap(kGolden))}, lambda, z, {1, 1});
    std::vector<Scalar> l{ap(0), ap(-1), ap(1)};
    const DiffOperator d = mono.times(Polynomial(l, Backend::Approx));
    std::vector<QuasiPolynomial> gens;
    for (const auto& lam : lambda) {
        const auto ker = kernel_polynomials(d, lam, 3);
        ASSERT_EQ(ker.size(), 1u);
        gens.push_back(QuasiPolynomial::term(RationalFunction(ker[0]), lam));
    }
    const SpecialSpace sp = classify_special(FunctionSpace(gens), z, lambda);
    EXPECT_EQ(sp.n, (std::vector<int>{1, 1}));
    EXPECT_EQ(sp.m, (std::vector<int>{1, 1}));
    const TransformResult r = special_bispectral_dual(sp);
    ASSERT_EQ(r.dual_space.dimension(), 2);
    for (const auto& lam : z) {
        const auto blk = r.dual_space.block(lam);
        ASSERT_EQ(blk.size(), 1u);
        EXPECT_EQ(blk[0].coefficient().num().degree(), 1);
    }
    std::string why;
    EXPECT_TRUE(all_passed(verify_special_dual(sp, r), &why)) << why;
    EXPECT_TRUE(span_equal(special_bispectral_dual(*r.special).dual_space, sp.space));
}

TEST(Transform, ComponentsAreSortedAndSingleExponent) {
    std::mt19937 rng(43);
    const auto s = random_last_heavy(rng, 3, 3, 2);
    const TransformResult r = special_bispectral_dual(classify_special(s.space, s.z, s.lambda));
    for (size_t k = 0; k < r.components.size(); ++k) {
        for (const auto& f : r.components[k].functions) {
            ASSERT_TRUE(f.is_single_exponent());
            ASSERT_EQ(f.exponent(), r.components[k].point);
            ASSERT_TRUE(f.coefficient().is_polynomial());
        }
        if (k) {
            ASSERT_LT(r.components[k - 1].point.to_complex().real(), r.components[k].point.to_complex().real() + 1e-300);
        }
    }
}
