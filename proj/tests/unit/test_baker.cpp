#include <gtest/gtest.h>

#include <cmath>

#include "bispectral/baker.hpp"
#include "bispectral/bethe.hpp"
#include "support/generators.hpp"

using namespace testsupport;

namespace {

#define EXPECT_CODE(stmt, expected)                         \
    do {                                                    \
        try {                                               \
            stmt;                                           \
            ADD_FAILURE() << "no error from " #stmt;        \
        } catch (const Error& e) {                          \
            EXPECT_EQ(e.code(), expected) << e.what();      \
        }                                                   \
    } while (0)

FunctionSpace one_and_xex() { return FunctionSpace({qp(P({1}), q(0)), qp(P({0, 1}), q(1))}); }

// psi for a two-dimensional space from the 2x2 system d^2 f + a d f + b f = 0 on its basis at x0.
Complex psi_two_dim_oracle(const FunctionSpace& s, Complex x0, Complex xi, const std::vector<Complex>& lambdas) {
    Complex f[2][3];
    for (int k = 0; k < 2; ++k)
        for (int d = 0; d < 3; ++d) f[k][d] = qp_derivative(s.basis()[k], d).eval(x0);
    // a f' + b f = -f''
    const Complex det = f[0][1] * f[1][0] - f[1][1] * f[0][0];
    const Complex a = (-f[0][2] * f[1][0] + f[1][2] * f[0][0]) / det;
    const Complex b = (-f[0][1] * f[1][2] + f[1][1] * f[0][2]) / det;
    Complex den = 1.0;
    for (const auto& l : lambdas) den *= xi - l;
    return (xi * xi + a * xi + b) / den;
}

// d^a/dxi^a of q(xi) e^{x xi} at xi0, for q with complex coefficients.
Complex kernel_derivative(const std::vector<Complex>& qc, Complex x, Complex xi0, int a) {
    Complex total = 0.0;
    for (int k = 0; k <= a; ++k) {
        Complex qk = 0.0;  // q^{(k)}(xi0)
        for (size_t j = static_cast<size_t>(k); j < qc.size(); ++j) {
            double fall = 1.0;
            for (int s = 0; s < k; ++s) fall *= static_cast<double>(j) - s;
            qk += qc[j] * fall * std::pow(xi0, static_cast<int>(j) - k);
        }
        total += std::tgamma(a + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(a - k + 1.0)) * qk * std::pow(x, a - k);
    }
    return total * std::exp(x * xi0);
}

}  // namespace

TEST(Subspace, ReadsConditions) {
    const AdmissibleSubspace w = space_to_subspace(FunctionSpace({qp(P({1}), q(2))}));
    ASSERT_EQ(w.points.size(), 1u);
    EXPECT_EQ(w.points[0], q(2));
    EXPECT_EQ(w.conditions[0], (std::vector<std::vector<Scalar>>{{q(1)}}));
    EXPECT_EQ(w.condition_count(), 1);
    // r(2) = 0
    EXPECT_TRUE(w.contains(P({-2, 1})));
    EXPECT_FALSE(w.contains(P({-1, 1})));

    const AdmissibleSubspace w2 = space_to_subspace(one_and_xex());
    // r(0) = 0 and r'(1) = 0
    EXPECT_TRUE(w2.contains(P({0, -2, 1})));
    EXPECT_FALSE(w2.contains(P({0, 1})));
}

TEST(Subspace, RoundTrip) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sample = random_split_pair(rng, 1 + trial % 2, 1 + (trial / 2) % 2);
        const FunctionSpace back = subspace_to_space(space_to_subspace(sample.space));
        EXPECT_TRUE(span_equal(back, sample.space));
        EXPECT_EQ(space_to_subspace(back).conditions, space_to_subspace(sample.space).conditions);
    }
}

TEST(Subspace, Errors) {
    const RationalFunction inv(P({1}), P({0, 1}));
    EXPECT_CODE(space_to_subspace(FunctionSpace({qp(inv, q(1))})), ErrorCode::NonPolynomialCoefficients);
    AdmissibleSubspace bad{{q(0)}, {{{q(1), q(0)}}}};
    EXPECT_CODE(subspace_to_space(bad), ErrorCode::InvalidArgument);
}

TEST(Baker, PureExponentialsGiveOne) {
    const FunctionSpace s({QuasiPolynomial::exponential(q(1)), QuasiPolynomial::exponential(q(-2))});
    for (double x : {0.5, 3.0})
        for (double xi : {4.0, -1.5}) {
            const BakerValue b = baker_function(s, ap(x), ap(xi));
            EXPECT_LT(std::abs(b.psi - 1.0), 1e-14);
            EXPECT_LT(std::abs(b.Psi - std::exp(x * xi)), 1e-12 * std::exp(x * xi));
        }
}

TEST(Baker, OneAndXeX) {
    const FunctionSpace s = one_and_xex();
    const BakerValue b = baker_function(s, q(2), q(3));
    // Dbar = d^2 - (x+2)/(x+1) d, so psi(2, 3) = (9 - 4)/(3 * 2)
    EXPECT_LT(std::abs(b.psi - 5.0 / 6.0), 1e-14);
    EXPECT_LT(std::abs(b.psi - psi_two_dim_oracle(s, 2.0, 3.0, {0.0, 1.0})), 1e-13);
    EXPECT_LT(std::abs(b.Psi - b.psi * std::exp(6.0)), 1e-10 * std::exp(6.0));
    EXPECT_CODE(baker_function(s, q(-1), q(3)), ErrorCode::PoleHit);
    EXPECT_CODE(baker_function(s, q(2), q(1)), ErrorCode::PoleHit);
}

TEST(Baker, MatchesOracleOnRandomPairs) {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 6; ++trial) {
        const auto sample = random_split_pair(rng, 1 + trial % 2, 1);
        std::vector<Complex> lam;
        for (const auto& l : sample.space.exponents()) lam.push_back(l.to_complex());
        for (double x : {2.3, 4.1}) {
            const Complex expect = psi_two_dim_oracle(sample.space, x, 5.7, lam);
            EXPECT_LT(std::abs(baker_function(sample.space, ap(x), ap(5.7)).psi - expect), 1e-10 * std::max(1.0, std::abs(expect)));
        }
    }
}

TEST(Baker, TendsToOne) {
    const FunctionSpace s = one_and_xex();
    double last = INFINITY;
    for (double r : {10.0, 100.0, 1000.0}) {
        const double dev = std::abs(baker_function(s, ap(r), ap(r)).psi - 1.0);
        EXPECT_LT(dev, last);
        last = dev;
    }
    EXPECT_LT(last, 1e-5);
}

TEST(Baker, KernelSatisfiesConditionsInXi) {
    std::mt19937 rng(19);
    for (int trial = 0; trial < 5; ++trial) {
        const auto sample = random_split_pair(rng, 1 + trial % 2, 1 + trial % 3);
        const AdmissibleSubspace w = space_to_subspace(sample.space);
        const MonicOperator op = monic_fundamental(sample.space);
        const Complex x0(2.5, 0.3);
        // q(xi) = sum bar_i(x0) xi^{N-i}, lowest degree first.
        std::vector<Complex> qc(static_cast<size_t>(op.order() + 1));
        for (int i = 0; i <= op.order(); ++i) qc[static_cast<size_t>(op.order() - i)] = op.bar(i).eval(x0);
        for (size_t i = 0; i < w.points.size(); ++i)
            for (const auto& cond : w.conditions[i]) {
                Complex sum = 0.0;
                double scale = 0.0;
                for (size_t a = 0; a < cond.size(); ++a) {
                    const Complex t = cond[a].to_complex() * kernel_derivative(qc, x0, w.points[i].to_complex(), static_cast<int>(a));
                    sum += t;
                    scale += std::abs(t);
                }
                EXPECT_LT(std::abs(sum), 1e-10 * std::max(1.0, scale));
            }
    }
}

TEST(Involution, OneAndXeX) {
    const InvolutionReport rep = verify_involution(one_and_xex());
    EXPECT_FALSE(rep.vacuous);
    EXPECT_TRUE(rep.passed);
    EXPECT_LT(rep.max_deviation, 1e-9);
    EXPECT_EQ(static_cast<int>(rep.samples.size()) + rep.skipped, 25);
    EXPECT_GE(rep.samples.size(), 20u);
}

TEST(Involution, TrivialSpaceIsVacuous) {
    const InvolutionReport rep = verify_involution(FunctionSpace({QuasiPolynomial::exponential(q(3))}));
    EXPECT_TRUE(rep.vacuous);
    EXPECT_TRUE(rep.passed);
    EXPECT_TRUE(rep.samples.empty());
}

TEST(Involution, RandomSpecialSpaces) {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 6; ++trial) {
        const auto sample = trial % 2 ? random_split_pair(rng, 1 + trial % 3, 1) : random_last_heavy(rng, 2 + trial % 2, 2, 2);
        const SpecialSpace v = classify_special(sample.space, sample.z, sample.lambda);
        const TransformResult r = special_bispectral_dual(v);
        BakerGrid grid;
        grid.seed = static_cast<std::uint64_t>(trial);
        const InvolutionReport rep = verify_involution(v.space, r.dual_space, grid);
        EXPECT_TRUE(rep.passed) << rep.max_deviation;
        EXPECT_LT(rep.max_deviation, 1e-9);
    }
}

TEST(Involution, CriticalPointSpaces) {
    const MasterSpec spec({q(0), q(1)}, {q(0), q(1)}, {1, 1}, {1, 1});
    for (const auto& cp : solve_bethe(spec).points) {
        const SpecialSpace v = space_from_critical_point(spec, cp);
        const InvolutionReport rep = verify_involution(v.space, special_bispectral_dual(v).dual_space);
        EXPECT_TRUE(rep.passed) << rep.max_deviation;
    }
}

TEST(Involution, DetectsWrongDual) {
    const FunctionSpace v = one_and_xex();
    const FunctionSpace other({qp(P({1}), q(0)), qp(P({1, 1}), q(2))});
    const InvolutionReport rep = verify_involution(v, bispectral_dual(other).dual_space);
    EXPECT_FALSE(rep.passed);
}
