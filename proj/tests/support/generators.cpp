#include "support/generators.hpp"

#include <algorithm>

namespace testsupport {

Polynomial P(std::initializer_list<long> coeffs) {
    std::vector<Scalar> c;
    for (long v : coeffs) c.push_back(q(v));
    return Polynomial(std::move(c), Backend::Exact);
}

QuasiPolynomial qp(const Polynomial& p, const Scalar& lambda, char var) {
    return QuasiPolynomial::term(RationalFunction(p), lambda, var);
}

QuasiPolynomial qp(const RationalFunction& r, const Scalar& lambda, char var) {
    return QuasiPolynomial::term(r, lambda, var);
}

Scalar random_rational(std::mt19937& rng, int range) {
    std::uniform_int_distribution<long> den(1, 3);
    const long d = den(rng);
    std::uniform_int_distribution<long> num(-range * d, range * d);
    return q(num(rng), d);
}

namespace {

std::vector<Scalar> distinct_values(std::mt19937& rng, int count, int range) {
    std::vector<Scalar> out;
    while (static_cast<int>(out.size()) < count) {
        Scalar v = random_rational(rng, range);
        if (std::none_of(out.begin(), out.end(), [&](const Scalar& w) { return w == v; })) out.push_back(v);
    }
    return out;
}

// Solves (d + mu) p = target for a polynomial p: p = sum_k (-1)^k target^(k) / mu^(k+1).
Polynomial invert_shift(const Polynomial& target, const Scalar& mu) {
    Polynomial p(Backend::Exact);
    Polynomial d = target;
    Scalar sign = q(1);
    Scalar inv = q(1) / mu;
    Scalar power = inv;
    while (!d.is_zero()) {
        p += d * (sign * power);
        d = d.derivative();
        sign = -sign;
        power *= inv;
    }
    return p;
}

}  // namespace

SpecialSample random_last_heavy(std::mt19937& rng, int N, int M, int max_m) {
    std::uniform_int_distribution<int> mult(1, max_m);
    const auto lambda = distinct_values(rng, N, 3);
    const auto z = distinct_values(rng, M, 3);
    std::vector<int> m;
    Polynomial target = P({1});
    for (int a = 0; a < M; ++a) {
        m.push_back(mult(rng));
        target *= Polynomial::linear(z[static_cast<size_t>(a)]).pow(m.back());
    }
    // Wr = const * e^{sum lambda x} * prod_{i<N} (d + lambda_N - lambda_i) p.
    Polynomial p = target;
    for (int i = 0; i + 1 < N; ++i) p = invert_shift(p, lambda[static_cast<size_t>(N - 1)] - lambda[static_cast<size_t>(i)]);
    std::vector<QuasiPolynomial> gens;
    std::vector<int> n;
    for (int i = 0; i + 1 < N; ++i) {
        gens.push_back(QuasiPolynomial::exponential(lambda[static_cast<size_t>(i)]));
        n.push_back(0);
    }
    gens.push_back(qp(p, lambda[static_cast<size_t>(N - 1)]));
    n.push_back(p.degree());
    return {FunctionSpace(gens), z, lambda, n, m};
}

SpecialSample random_split_pair(std::mt19937& rng, int n1, int n2, int max_tries) {
    for (int attempt = 0; attempt < max_tries; ++attempt) {
        const auto lambda = distinct_values(rng, 2, 2);
        const Scalar mu = lambda[1] - lambda[0];
        Polynomial p1 = P({1});
        Polynomial p2 = P({1});
        if (n1 == 1 && n2 == 1) {
            // mu (x-a)(x-b) + (b-a) splits iff k = mu (b-a) = 2 + (u + 4/u)/2 for rational u.
            Scalar u = random_rational(rng, 3);
            if (u.is_zero() || u == q(2) || u == q(-2)) continue;
            const Scalar k = q(2) + (u + q(4) / u) / q(2);
            const Scalar a = random_rational(rng, 2);
            p1 = Polynomial::linear(a);
            p2 = Polynomial::linear(a + k / mu);
        } else {
            for (int j = 0; j < n1; ++j) p1 *= Polynomial::linear(random_rational(rng, 2));
            for (int j = 0; j < n2; ++j) p2 *= Polynomial::linear(random_rational(rng, 2));
        }
        const Polynomial wr = p1 * p2.derivative() - p1.derivative() * p2 + p1 * p2 * mu;
        if (wr.degree() != n1 + n2) continue;
        const auto roots = poly_roots(wr);
        if (roots.size() < 2 || std::any_of(roots.begin(), roots.end(), [](const Root& r) { return r.approximate; })) continue;
        std::vector<Scalar> z;
        std::vector<int> m;
        for (const auto& r : roots) {
            z.push_back(r.value);
            m.push_back(r.multiplicity);
        }
        FunctionSpace space({qp(p1, lambda[0]), qp(p2, lambda[1])});
        try {
            classify_special(space, z, lambda);
        } catch (const Error&) {
            continue;
        }
        return {space, z, lambda, {n1, n2}, m};
    }
    fail(ErrorCode::InvalidArgument, "no split pair found");
}

SpecialSample random_linear_triple(std::mt19937& rng, int max_tries) {
    for (int attempt = 0; attempt < max_tries; ++attempt) {
        const auto lambda = distinct_values(rng, 3, 2);
        const QuasiPolynomial f1 = qp(Polynomial::linear(random_rational(rng, 2)), lambda[0]);
        const QuasiPolynomial f2 = qp(Polynomial::linear(random_rational(rng, 2)), lambda[1]);
        // Wr is linear in p_3 = x + c.
        auto wr = [&](const Polynomial& p3) {
            return wronskian_of({f1, f2, qp(p3, lambda[2])}, Backend::Exact).coefficient().to_polynomial();
        };
        const Polynomial wa = wr(P({1})), wb = wr(P({0, 1}));
        const Scalar z1 = random_rational(rng, 2);
        if (wa(z1).is_zero()) continue;
        const Scalar c = -wb(z1) / wa(z1);
        const Polynomial p3 = Polynomial::linear(-c);
        const Polynomial w = wb + wa * c;
        if (w.degree() != 3) continue;
        const auto roots = poly_roots(w);
        if (std::any_of(roots.begin(), roots.end(), [](const Root& r) { return r.approximate; })) continue;
        std::vector<Scalar> z;
        std::vector<int> m;
        for (const auto& r : roots) {
            z.push_back(r.value);
            m.push_back(r.multiplicity);
        }
        FunctionSpace space({f1, f2, qp(p3, lambda[2])});
        try {
            classify_special(space, z, lambda);
        } catch (const Error&) {
            continue;
        }
        return {space, z, lambda, {1, 1, 1}, m};
    }
    fail(ErrorCode::InvalidArgument, "no linear triple found");
}

std::vector<QuasiPolynomial> scramble(std::mt19937& rng, const std::vector<QuasiPolynomial>& basis) {
    const size_t n = basis.size();
    for (;;) {
        std::vector<std::vector<Scalar>> c(n, std::vector<Scalar>(n));
        for (auto& row : c)
            for (auto& v : row) v = random_rational(rng, 2);
        std::vector<QuasiPolynomial> out;
        for (size_t i = 0; i < n; ++i) {
            QuasiPolynomial f(basis.front().backend(), basis.front().variable());
            for (size_t j = 0; j < n; ++j) f += basis[j] * c[i][j];
            out.push_back(f);
        }
        if (span_rank(out) == static_cast<int>(n)) return out;
    }
}

}  // namespace testsupport
