#include <gtest/gtest.h>

#include <cmath>

#include "bispectral/diffop.hpp"
#include "support/generators.hpp"

using namespace testsupport;

namespace {

DiffOperator op_of(std::vector<Polynomial> c) { return DiffOperator(std::move(c)); }

FunctionSpace one_and_xex() { return FunctionSpace({qp(P({1}), q(0)), qp(P({0, 1}), q(1))}); }

Polynomial Pa(std::initializer_list<double> coeffs) {
    std::vector<Scalar> c;
    for (double v : coeffs) c.push_back(ap(v));
    return Polynomial(std::move(c), Backend::Approx);
}

DiffOperator random_operator(std::mt19937& rng, int order, int degree) {
    std::vector<Polynomial> c;
    for (int j = 0; j <= order; ++j) {
        std::vector<Scalar> p;
        for (int i = 0; i <= degree; ++i) p.push_back(random_rational(rng, 3));
        c.emplace_back(std::move(p), Backend::Exact);
    }
    return DiffOperator(std::move(c));
}

const double kGolden = (3.0 + std::sqrt(5.0)) / 2.0;

}  // namespace

TEST(DiffOp, TableAndNormalForm) {
    // x d^2 + 3 x^2 + d
    const DiffOperator d = op_of({P({0, 0, 3}), P({1}), P({0, 1})});
    EXPECT_EQ(d.order(), 2);
    EXPECT_EQ(d.x_degree(), 2);
    EXPECT_EQ(d.entry(1, 2), q(1));
    EXPECT_EQ(d.entry(2, 0), q(3));
    EXPECT_EQ(d.entry(0, 1), q(1));
    EXPECT_EQ(d.table().size(), 3u);
    EXPECT_EQ(d.normal_form(0), P({3}));
    EXPECT_EQ(d.normal_form(1), P({0, 0, 1}));
    EXPECT_EQ(d.normal_form(2), P({0, 1}));
}

TEST(DiffOp, CompositionLeibniz) {
    const DiffOperator dx = DiffOperator::derivation(Backend::Exact);
    const DiffOperator x = DiffOperator::multiplication(P({0, 1}));
    // d o x = x d + 1
    EXPECT_EQ(dx * x, op_of({P({1}), P({0, 1})}));
    // d^2 o x^2 = x^2 d^2 + 4 x d + 2
    const DiffOperator x2 = DiffOperator::multiplication(P({0, 0, 1}));
    EXPECT_EQ(dx * dx * x2, op_of({P({2}), P({0, 4}), P({0, 0, 1})}));
}

TEST(DiffOp, CompositionMatchesApplication) {
    std::mt19937 rng(3);
    for (int t = 0; t < 10; ++t) {
        const DiffOperator a = random_operator(rng, 2, 2), b = random_operator(rng, 2, 1);
        const QuasiPolynomial f = qp(P({1, 2, 0, 1}), random_rational(rng, 2)) + qp(P({-1, 1}), q(5));
        ASSERT_EQ(apply(a * b, f), apply(a, apply(b, f)));
        ASSERT_EQ((a * b) * a, a * (b * a));
    }
}

TEST(DiffOp, FormalConjugateExamples) {
    const DiffOperator dx = DiffOperator::derivation(Backend::Exact);
    EXPECT_EQ(formal_conjugate(dx), -dx);
    const DiffOperator x = DiffOperator::multiplication(P({0, 1}));
    EXPECT_EQ(formal_conjugate(x), x);
    // (x d)* = -d o x = -x d - 1
    EXPECT_EQ(formal_conjugate(x * dx), op_of({P({-1}), P({0, -1})}));
}

TEST(DiffOp, FormalConjugateProperties) {
    std::mt19937 rng(5);
    for (int t = 0; t < 10; ++t) {
        const DiffOperator a = random_operator(rng, 3, 2), b = random_operator(rng, 2, 2);
        ASSERT_EQ(formal_conjugate(formal_conjugate(a)), a);
        ASSERT_EQ(formal_conjugate(a * b), formal_conjugate(b) * formal_conjugate(a));
    }
}

TEST(DiffOp, BispectralSwapExamples) {
    // x d + 3 -> u d_u + 3
    const DiffOperator a = op_of({P({3}), P({0, 1})});
    const DiffOperator sa = bispectral_swap(a);
    EXPECT_EQ(sa.variable(), 'u');
    EXPECT_EQ(sa.entry(1, 1), q(1));
    EXPECT_EQ(sa.entry(0, 0), q(3));
    // x^2 d -> u d^2
    const DiffOperator b = bispectral_swap(op_of({P({0}), P({0, 0, 1})}));
    EXPECT_EQ(b.order(), 2);
    EXPECT_EQ(b.entry(1, 2), q(1));
    EXPECT_EQ(b.table().size(), 1u);
    // Constant coefficients become a multiplication operator.
    const DiffOperator c = bispectral_swap(op_of({P({2}), P({-3}), P({1})}));
    EXPECT_EQ(c.order(), 0);
    EXPECT_EQ(c.coeff(0), P({2, -3, 1}));
}

TEST(DiffOp, BispectralSwapIsInvolution) {
    std::mt19937 rng(6);
    for (int t = 0; t < 10; ++t) {
        const DiffOperator a = random_operator(rng, 3, 3);
        const DiffOperator back = bispectral_swap(bispectral_swap(a));
        ASSERT_EQ(back.variable(), 'x');
        ASSERT_EQ(back, a);
    }
}

TEST(DiffOp, ApplicationToExponential) {
    // d(x e^{2x}) = (2x + 1) e^{2x}
    const DiffOperator dx = DiffOperator::derivation(Backend::Exact);
    EXPECT_EQ(apply(dx, qp(P({0, 1}), q(2))), qp(P({1, 2}), q(2)));
}

TEST(DiffOp, MonicFundamentalExamples) {
    const Scalar l1 = q(2), l2 = q(-1, 3);
    const MonicOperator e = monic_fundamental(FunctionSpace({QuasiPolynomial::exponential(l1), QuasiPolynomial::exponential(l2)}));
    EXPECT_EQ(e.order(), 2);
    EXPECT_EQ(e.bar(1), RationalFunction::constant(-(l1 + l2)));
    EXPECT_EQ(e.bar(2), RationalFunction::constant(l1 * l2));

    const MonicOperator lin = monic_fundamental(FunctionSpace({qp(P({1}), q(0)), qp(P({0, 1}), q(0))}));
    EXPECT_TRUE(lin.bar(1).is_zero());
    EXPECT_TRUE(lin.bar(2).is_zero());

    const MonicOperator v = monic_fundamental(one_and_xex());
    EXPECT_EQ(v.bar(1), RationalFunction(P({-2, -1}), P({1, 1})));
    EXPECT_TRUE(v.bar(2).is_zero());
}

TEST(DiffOp, RegularizeExample) {
    const FunctionSpace v = one_and_xex();
    const DiffOperator d = regularize(monic_fundamental(v), v);
    EXPECT_EQ(d, op_of({P({0}), P({-2, -1}), P({1, 1})}));
    EXPECT_EQ(regularize(monic_fundamental(v), singular_points(v)), d);
}

TEST(DiffOp, RegularizeApproximate) {
    const FunctionSpace v = one_and_xex().to_backend(Backend::Approx);
    const DiffOperator d = regularize(monic_fundamental(v), v);
    EXPECT_EQ(d, op_of({P({0}), P({-2, -1}), P({1, 1})}).to_backend(Backend::Approx));
}

TEST(DiffOp, SwapOfRegularizedExample) {
    const FunctionSpace v = one_and_xex();
    const DiffOperator s = bispectral_swap(regularize(monic_fundamental(v), v));
    // (u^2 - u) d_u + u^2 - 2u
    EXPECT_EQ(s.coeff(1), P({0, -1, 1}));
    EXPECT_EQ(s.coeff(0), P({0, -2, 1}));
    EXPECT_EQ(s.order(), 1);
    EXPECT_TRUE(apply(s, qp(P({-1, 1}), q(-1), 'u')).is_zero());
}

TEST(DiffOp, ConjugateOfRegularizedKillsRegularizedConjugate) {
    std::mt19937 rng(9);
    std::vector<FunctionSpace> spaces{one_and_xex()};
    for (int t = 0; t < 4; ++t) spaces.push_back(random_last_heavy(rng, 2 + t % 2, 2, 2).space);
    for (const auto& v : spaces) {
        const auto sing = singular_points(v);
        const DiffOperator dstar = formal_conjugate(regularize(monic_fundamental(v), sing));
        const FunctionSpace dag = regularized_conjugate(v, sing);
        for (const auto& f : dag.basis()) ASSERT_TRUE(apply(dstar, f).is_zero()) << f.to_string();
    }
}

TEST(DiffOp, RegularizedOperatorStructure) {
    std::mt19937 rng(12);
    for (int t = 0; t < 8; ++t) {
        const int N = 2 + t % 2, M = 2 + (t / 2) % 2;
        const auto s = t % 4 == 3 ? random_split_pair(rng, 1, 1) : random_last_heavy(rng, N, M, 2);
        const auto sing = singular_points(s.space);
        const MonicOperator mono = monic_fundamental(s.space);
        const DiffOperator d = regularize(mono, sing);
        const int n = s.space.dimension();
        ASSERT_EQ(d.order(), n);

        Polynomial a0 = P({1});
        int defect_sum = 0;
        for (const auto& e : sing) {
            a0 *= Polynomial::linear(e.point).pow(e.defect());
            defect_sum += e.defect();
        }
        ASSERT_EQ(d.leading_view(0), a0);
        for (int i = 0; i <= n; ++i) ASSERT_LE(d.leading_view(i).degree(), defect_sum);

        // The normal form leads with prod (d - lambda_i)^{N_i}.
        Polynomial b0 = P({1});
        const auto lam = s.space.exponents();
        const auto mult = s.space.multiplicities();
        for (size_t k = 0; k < lam.size(); ++k) b0 *= Polynomial::linear(lam[k]).pow(mult[k]);
        ASSERT_EQ(d.normal_form(0), b0);
        // Coprime when every degree is positive; a pure exponential e^{lambda x}
        // makes lambda a common root.
        Polynomial g(Backend::Exact);
        for (int k = 0; k <= d.x_degree(); ++k) g = poly_gcd(g, d.normal_form(k));
        Polynomial common = P({1});
        for (size_t i = 0; i < s.lambda.size(); ++i)
            if (s.n[i] == 0) common *= Polynomial::linear(s.lambda[i]);
        ASSERT_EQ(g, common);

        for (const auto& e : sing) {
            const int ma = e.defect();
            for (int i = 1; i <= n; ++i) {
                if (mono.bar(i).is_zero()) continue;
                ASSERT_GE(rational_order_at(mono.bar(i), e.point), -std::min(i, ma));
            }
            if (ma <= n) {
                ASSERT_EQ(rational_order_at(mono.bar(ma), e.point), -ma);
            }
        }
    }
}

TEST(DiffOp, FactorizedCriticalPointApprox) {
    // n = m = (1, 1), lambda = (0, 1), z = (0, 1), y_1 = x - t.
    for (const double t : {kGolden, 3.0 - kGolden}) {
        const MonicOperator mono =
            factorized_from_tuple({Polynomial::linear(ap(t))}, {ap(0), ap(1)}, {ap(0), ap(1)}, {1, 1});
        const DiffOperator d = mono.times(Pa({0, -1, 1}));
        EXPECT_EQ(d, DiffOperator({Pa({2 - t, 1}), Pa({1, -1, -1}), Pa({0, -1, 1})}, 'x', Backend::Approx))
            << d.to_string();
        const PhiMatrix phi = extract_phi(d, {ap(0), ap(1)}, {ap(0), ap(1)});
        EXPECT_LE(phi.residual, 1e-8);
        EXPECT_NEAR(std::abs(phi.phi[0][0].to_complex() - (2 - t)), 0.0, 1e-9);
        EXPECT_NEAR(std::abs(phi.phi[0][1].to_complex() - (t - 3)), 0.0, 1e-9);
        EXPECT_NEAR(std::abs(phi.phi[1][0].to_complex() - (t - 3)), 0.0, 1e-9);
        EXPECT_NEAR(std::abs(phi.phi[1][1].to_complex() - (2 - t)), 0.0, 1e-9);
        // Kernel: one polynomial of degree 1 for each exponent.
        for (const double l : {0.0, 1.0}) {
            const auto ker = kernel_polynomials(d, ap(l), 3);
            ASSERT_EQ(ker.size(), 1u);
            EXPECT_EQ(ker[0].degree(), 1);
            EXPECT_NEAR(std::abs(predicted_degree(d, ap(l)).to_complex() - 1.0), 0.0, 1e-12);
        }
        const auto ker1 = kernel_polynomials(d, ap(1), 3);
        EXPECT_NEAR(std::abs(ker1[0].coeff(0).to_complex() + t), 0.0, 1e-8);
    }
}

TEST(DiffOp, FactorizedRejectsNonCriticalTuple) {
    try {
        factorized_from_tuple({Polynomial::linear(ap(0.5))}, {ap(0), ap(1)}, {ap(0), ap(1)}, {1, 1})
            .times(Pa({0, -1, 1}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotRegularizable);
    }
    EXPECT_THROW(factorized_from_tuple({Polynomial::linear(q(0))}, {q(0), q(1)}, {q(0), q(1)}, {1, 1}), Error);
    try {
        factorized_from_tuple({P({1, 0, 1}) * P({1, 0, 1})}, {q(0), q(1)}, {q(0), q(1)}, {1, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonAdmissibleTuple);
    }
}

TEST(DiffOp, FactorizedMatchesSpecialFundamental) {
    std::mt19937 rng(31);
    for (int t = 0; t < 4; ++t) {
        const auto s = t % 2 ? random_split_pair(rng, 1, 1) : random_last_heavy(rng, 2, 2, 1);
        const SpecialSpace sp = classify_special(s.space, s.z, s.lambda);
        const MonicOperator mono = factorized_from_tuple({sp.p(1).monic()}, s.lambda, s.z, s.m);
        Polynomial l = P({1});
        for (const auto& z : s.z) l *= Polynomial::linear(z);
        ASSERT_EQ(mono.times(l), special_fundamental(sp));
    }
}

TEST(DiffOp, KernelSolveExact) {
    const FunctionSpace v = one_and_xex();
    const DiffOperator d = regularize(monic_fundamental(v), v);
    const auto k0 = kernel_polynomials(d, q(0), 4);
    ASSERT_EQ(k0.size(), 1u);
    EXPECT_EQ(k0[0], P({1}));
    const auto k1 = kernel_polynomials(d, q(1), 4);
    ASSERT_EQ(k1.size(), 1u);
    EXPECT_EQ(k1[0], P({0, 1}));
    EXPECT_TRUE(kernel_polynomials(d, q(2), 4).empty());
    EXPECT_EQ(predicted_degree(d, q(1)), q(1));
    EXPECT_EQ(predicted_degree(d, q(0)), q(0));
}

TEST(DiffOp, PredictedDegreeMatchesKernelOnRandomSpaces) {
    std::mt19937 rng(41);
    for (int t = 0; t < 6; ++t) {
        const auto s = random_last_heavy(rng, 2 + t % 2, 2, 2);
        const DiffOperator d = special_fundamental(classify_special(s.space, s.z, s.lambda));
        for (size_t i = 0; i < s.lambda.size(); ++i) {
            const auto ker = kernel_polynomials(d, s.lambda[i], s.n[i] + 2);
            ASSERT_EQ(ker.size(), 1u);
            ASSERT_EQ(ker[0].degree(), s.n[i]);
            ASSERT_EQ(predicted_degree(d, s.lambda[i]), q(s.n[i]));
        }
    }
}

TEST(DiffOp, ExtractPhiRejectsOtherShapes) {
    try {
        extract_phi(op_of({P({1}), P({0}), P({1})}), {q(0), q(1)}, {q(0), q(1)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotInPhiForm);
    }
}

TEST(DiffOp, ExtractPhiOnSpecialPairs) {
    std::mt19937 rng(51);
    for (int t = 0; t < 3; ++t) {
        const auto s = random_last_heavy(rng, 2, 2, 1);
        const DiffOperator d = special_fundamental(classify_special(s.space, s.z, s.lambda));
        const PhiMatrix phi = extract_phi(d, {s.lambda[0], s.lambda[1]}, {s.z[0], s.z[1]});
        EXPECT_EQ(phi.residual, 0.0);
        // Rebuild the operator from phi.
        const Backend b = Backend::Exact;
        DiffOperator rebuilt = DiffOperator::multiplication(Polynomial::linear(s.z[0]) * Polynomial::linear(s.z[1])) *
                               (DiffOperator::derivation(b) - DiffOperator::multiplication(Polynomial::constant(s.lambda[0]))) *
                               (DiffOperator::derivation(b) - DiffOperator::multiplication(Polynomial::constant(s.lambda[1])));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                rebuilt += DiffOperator::multiplication(Polynomial::linear(s.z[static_cast<size_t>(i)])) *
                           (DiffOperator::derivation(b) - DiffOperator::multiplication(Polynomial::constant(s.lambda[static_cast<size_t>(j)]))) *
                           phi.phi[static_cast<size_t>(i)][static_cast<size_t>(j)];
        EXPECT_TRUE(equal_up_to_scalar(rebuilt, d));
    }
}
