#include "bispectral/spaces.hpp"

#include <algorithm>
#include <mutex>

#include "bispectral/linalg.hpp"

namespace bispectral {

namespace {

Polynomial one_poly(Backend b) { return Polynomial::constant(Scalar::from_int(1, b)); }

Backend generators_backend(const std::vector<QuasiPolynomial>& gs, Backend fallback) {
    for (const auto& g : gs)
        if (!g.is_zero()) return g.backend();
    return fallback;
}

// Component of every generator along one exponent, over a common denominator.
struct LambdaBlock {
    Scalar lambda;
    Polynomial denominator;
    std::vector<Polynomial> numerators;  // one per generator, possibly zero
    int max_degree = -1;
};

std::vector<LambdaBlock> build_blocks(const std::vector<QuasiPolynomial>& gs, Backend b) {
    std::vector<Scalar> lambdas;
    for (const auto& g : gs)
        for (const auto& t : g.terms())
            if (std::none_of(lambdas.begin(), lambdas.end(), [&](const Scalar& l) { return l == t.lambda; }))
                lambdas.push_back(t.lambda);
    std::sort(lambdas.begin(), lambdas.end(), lex_less);

    std::vector<LambdaBlock> blocks;
    for (const auto& lambda : lambdas) {
        LambdaBlock blk{lambda, one_poly(b), {}, -1};
        std::vector<RationalFunction> coeffs;
        for (const auto& g : gs) coeffs.push_back(g.coefficient_of(lambda));
        if (b == Backend::Exact) {
            for (const auto& r : coeffs) {
                if (r.is_zero()) continue;
                const Polynomial g = poly_gcd(blk.denominator, r.den());
                blk.denominator = exact_quotient(blk.denominator * r.den(), g);
            }
            for (const auto& r : coeffs)
                blk.numerators.push_back(r.is_zero() ? Polynomial(b) : r.num() * exact_quotient(blk.denominator, r.den()));
        } else {
            // No gcd on the approximate backend: multiply the distinct denominators.
            std::vector<Polynomial> factors;
            std::vector<int> which;
            for (const auto& r : coeffs) {
                if (r.is_zero() || r.den().degree() == 0) {
                    which.push_back(-1);
                    continue;
                }
                int idx = -1;
                for (size_t q = 0; q < factors.size(); ++q)
                    if (factors[q] == r.den()) idx = static_cast<int>(q);
                if (idx < 0) {
                    factors.push_back(r.den());
                    idx = static_cast<int>(factors.size()) - 1;
                }
                which.push_back(idx);
            }
            for (const auto& f : factors) blk.denominator *= f;
            for (size_t k = 0; k < coeffs.size(); ++k) {
                if (coeffs[k].is_zero()) {
                    blk.numerators.emplace_back(b);
                    continue;
                }
                Polynomial num = coeffs[k].num();
                for (size_t q = 0; q < factors.size(); ++q)
                    if (static_cast<int>(q) != which[k]) num *= factors[q];
                blk.numerators.push_back(num);
            }
        }
        for (const auto& p : blk.numerators) blk.max_degree = std::max(blk.max_degree, p.degree());
        blocks.push_back(std::move(blk));
    }
    return blocks;
}

// Rows: generators; columns: numerator coefficients from the top degree down.
Matrix block_matrix(const LambdaBlock& blk, Backend b) {
    const int cols = blk.max_degree + 1;
    Matrix m = zero_matrix(static_cast<int>(blk.numerators.size()), cols, b);
    for (size_t k = 0; k < blk.numerators.size(); ++k)
        for (int d = 0; d <= blk.numerators[k].degree(); ++d) m[k][static_cast<size_t>(blk.max_degree - d)] = blk.numerators[k].coeff(d);
    return m;
}

Matrix full_matrix(const std::vector<LambdaBlock>& blocks, size_t count, Backend b) {
    Matrix m(count);
    for (const auto& blk : blocks) {
        const Matrix part = block_matrix(blk, b);
        for (size_t k = 0; k < count; ++k) m[k].insert(m[k].end(), part[k].begin(), part[k].end());
    }
    return m;
}

}  // namespace

bool ExponentSequence::is_singular() const {
    for (size_t i = 0; i < exponents.size(); ++i)
        if (exponents[i] != static_cast<int>(i)) return true;
    return false;
}

int ExponentSequence::defect() const {
    const int n = static_cast<int>(exponents.size());
    int run = 0;
    while (run < n && exponents[static_cast<size_t>(run)] == run) ++run;
    return n - run;
}

struct FunctionSpace::Cache {
    std::once_flag once;
    QuasiPolynomial wronskian;
};

FunctionSpace::FunctionSpace(const std::vector<QuasiPolynomial>& generators, char variable, Backend backend)
    : backend_(generators_backend(generators, backend)),
      variable_(generators.empty() ? variable : generators.front().variable()),
      cache_(std::make_shared<Cache>()) {
    if (generators.empty()) return;
    for (const auto& g : generators) {
        if (g.is_zero()) fail(ErrorCode::DegenerateBasis, "zero function among the generators");
        if (g.backend() != backend_) fail(ErrorCode::MixedBackend, "generators from different backends");
    }
    const auto blocks = build_blocks(generators, backend_);
    if (matrix_rank(full_matrix(blocks, generators.size(), backend_), backend_) != static_cast<int>(generators.size()))
        fail(ErrorCode::DegenerateBasis, "generators are linearly dependent");

    for (const auto& blk : blocks) {
        const Echelon e = row_echelon(block_matrix(blk, backend_), backend_);
        // Pivots run from the top degree down; emit in increasing degree.
        for (auto r = static_cast<int>(e.rows.size()) - 1; r >= 0; --r) {
            std::vector<Scalar> coeffs(static_cast<size_t>(blk.max_degree + 1), Scalar::from_int(0, backend_));
            for (int d = 0; d <= blk.max_degree; ++d) coeffs[static_cast<size_t>(d)] = e.rows[static_cast<size_t>(r)][static_cast<size_t>(blk.max_degree - d)];
            basis_.push_back(QuasiPolynomial::term(RationalFunction(Polynomial(coeffs, backend_), blk.denominator), blk.lambda, variable_));
        }
    }
    if (basis_.size() != generators.size())
        fail(ErrorCode::NotQuasiPolynomial, "span is not generated by functions with a single exponent");
}

std::vector<Scalar> FunctionSpace::exponents() const {
    std::vector<Scalar> out;
    for (const auto& f : basis_)
        if (out.empty() || !(out.back() == f.exponent())) out.push_back(f.exponent());
    return out;
}

std::vector<int> FunctionSpace::multiplicities() const {
    std::vector<int> out;
    const auto lambdas = exponents();
    for (const auto& l : lambdas) out.push_back(static_cast<int>(block(l).size()));
    return out;
}

std::vector<QuasiPolynomial> FunctionSpace::block(const Scalar& lambda) const {
    std::vector<QuasiPolynomial> out;
    for (const auto& f : basis_)
        if (f.exponent() == lambda) out.push_back(f);
    return out;
}

bool FunctionSpace::has_polynomial_coefficients() const {
    return std::all_of(basis_.begin(), basis_.end(), [](const QuasiPolynomial& f) { return f.coefficient().is_polynomial(); });
}

const QuasiPolynomial& FunctionSpace::wronskian() const {
    std::call_once(cache_->once, [this] {
        cache_->wronskian = wronskian_of(basis_, backend_, variable_);
        if (!basis_.empty() && cache_->wronskian.is_zero()) fail(ErrorCode::DegenerateBasis, "Wronskian vanishes identically");
    });
    return cache_->wronskian;
}

Polynomial FunctionSpace::wronskian_numerator() const { return wronskian().coefficient().num(); }

FunctionSpace FunctionSpace::to_backend(Backend target) const {
    std::vector<QuasiPolynomial> gs;
    for (const auto& f : basis_) gs.push_back(f.to_backend(target));
    return FunctionSpace(gs, variable_, target);
}

DerivativeTable derivative_table(const std::vector<QuasiPolynomial>& fs, int rows) {
    DerivativeTable t;
    t.backend = generators_backend(fs, Backend::Exact);
    t.rows = rows;
    t.entries.assign(static_cast<size_t>(rows), {});
    for (const auto& f : fs) {
        const Scalar& lambda = f.exponent();
        const Polynomial& q = f.coefficient().den();
        const Polynomial dq = q.derivative();
        // g_k = q^(k+1) * (k-th derivative of r e^{lambda x}) / e^{lambda x}.
        Polynomial g = f.coefficient().num();
        std::vector<Polynomial> q_pow{one_poly(t.backend)};
        for (int k = 1; k <= rows; ++k) q_pow.push_back(q_pow.back() * q);
        for (int k = 0; k < rows; ++k) {
            t.entries[static_cast<size_t>(k)].push_back(g * q_pow[static_cast<size_t>(rows - 1 - k)]);
            g = g.derivative() * q - g * dq * Scalar::from_int(k + 1, t.backend) + g * q * lambda;
        }
        t.column_scale.push_back(q_pow[static_cast<size_t>(rows)]);
        t.lambdas.push_back(lambda);
    }
    return t;
}

Polynomial table_minor(const DerivativeTable& t, const std::vector<int>& rows, const std::vector<int>& cols) {
    const size_t n = rows.size();
    if (cols.size() != n) fail(ErrorCode::InvalidArgument, "minor needs a square selection");
    if (n == 0) return one_poly(t.backend);
    if (n > 20) fail(ErrorCode::InvalidArgument, "minor too large");
    // Laplace expansion over column subsets, row by row.
    std::vector<Polynomial> dp(size_t{1} << n, Polynomial(t.backend));
    std::vector<bool> seen(size_t{1} << n, false);
    dp[0] = one_poly(t.backend);
    seen[0] = true;
    for (size_t r = 0; r < n; ++r) {
        std::vector<Polynomial> next(size_t{1} << n, Polynomial(t.backend));
        std::vector<bool> next_seen(size_t{1} << n, false);
        for (size_t mask = 0; mask < dp.size(); ++mask) {
            if (!seen[mask] || static_cast<size_t>(__builtin_popcountll(mask)) != r) continue;
            for (size_t c = 0; c < n; ++c) {
                if (mask & (size_t{1} << c)) continue;
                const Polynomial& a = t.entries[static_cast<size_t>(rows[r])][static_cast<size_t>(cols[c])];
                if (a.is_zero()) continue;
                const size_t above = mask >> (c + 1);
                Polynomial term = dp[mask] * a;
                if (__builtin_popcountll(above) % 2) term = -term;
                const size_t nm = mask | (size_t{1} << c);
                next[nm] += term;
                next_seen[nm] = true;
            }
        }
        dp = std::move(next);
        seen = std::move(next_seen);
    }
    return dp.back();
}

QuasiPolynomial wronskian_of(const std::vector<QuasiPolynomial>& fs, Backend backend, char variable) {
    const Backend b = generators_backend(fs, backend);
    const int n = static_cast<int>(fs.size());
    if (n == 0) return QuasiPolynomial::exponential(Scalar::from_int(0, b), variable);
    const DerivativeTable t = derivative_table(fs, n);
    std::vector<int> idx(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) idx[static_cast<size_t>(k)] = k;
    Polynomial scale = one_poly(b);
    Scalar lambda = Scalar::from_int(0, b);
    for (int j = 0; j < n; ++j) {
        scale *= t.column_scale[static_cast<size_t>(j)];
        lambda += t.lambdas[static_cast<size_t>(j)];
    }
    const Polynomial det = table_minor(t, idx, idx);
    if (det.is_zero()) return QuasiPolynomial(b, variable);
    return QuasiPolynomial::term(RationalFunction(det, scale), lambda, variable);
}

QuasiPolynomial wronskian(const FunctionSpace& space) { return space.wronskian(); }

ExponentSequence exponents_at(const FunctionSpace& space, const Scalar& z0) {
    const int n = space.dimension();
    ExponentSequence seq{z0, {}};
    if (n == 0) return seq;
    int pole = 0;
    for (const auto& f : space.basis()) pole = std::max(pole, order_at(f.coefficient().den(), z0));
    const int lo = -pole;
    int window = n + pole + std::max(0, space.wronskian_numerator().degree()) + 2;
    for (int attempt = 0; attempt < 8; ++attempt, window *= 2) {
        Matrix m;
        for (const auto& f : space.basis()) m.push_back(laurent_window(f, z0, lo, window + 1));
        const Echelon e = row_echelon(m, space.backend());
        if (static_cast<int>(e.pivots.size()) == n) {
            for (int p : e.pivots) seq.exponents.push_back(lo + p);
            return seq;
        }
    }
    fail(ErrorCode::InsufficientPrecision, "could not certify all exponents at " + z0.to_string());
}

std::vector<ExponentSequence> singular_points(const FunctionSpace& space) {
    if (space.dimension() == 0) return {};
    std::vector<Polynomial> sources{space.wronskian().coefficient().num(), space.wronskian().coefficient().den()};
    for (const auto& f : space.basis()) sources.push_back(f.coefficient().den());
    std::vector<Scalar> candidates;
    for (const auto& p : sources) {
        if (p.degree() < 1) continue;
        for (const auto& r : poly_roots(p)) {
            if (r.approximate)
                fail(ErrorCode::InsufficientPrecision, "singular point outside Q(i) on the exact backend");
            if (std::none_of(candidates.begin(), candidates.end(), [&](const Scalar& c) { return c == r.value; }))
                candidates.push_back(r.value);
        }
    }
    std::sort(candidates.begin(), candidates.end(), lex_less);
    std::vector<ExponentSequence> out;
    for (const auto& z : candidates) {
        ExponentSequence seq = exponents_at(space, z);
        if (seq.is_singular()) out.push_back(std::move(seq));
    }
    return out;
}

FunctionSpace conjugate(const FunctionSpace& space) {
    const int n = space.dimension();
    const Backend b = space.backend();
    if (n == 0) return FunctionSpace({}, space.variable(), b);
    const DerivativeTable t = derivative_table(space.basis(), n);
    std::vector<int> all(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) all[static_cast<size_t>(k)] = k;
    const Polynomial det = table_minor(t, all, all);
    if (det.is_zero()) fail(ErrorCode::DegenerateBasis, "Wronskian vanishes identically");
    std::vector<int> rows(all.begin(), all.end() - 1);
    std::vector<QuasiPolynomial> gens;
    for (int j = 0; j < n; ++j) {
        std::vector<int> cols;
        for (int k = 0; k < n; ++k)
            if (k != j) cols.push_back(k);
        // Wr(others) / Wr(all): the column scales of the other columns cancel.
        const Polynomial minor = table_minor(t, rows, cols) * t.column_scale[static_cast<size_t>(j)];
        gens.push_back(QuasiPolynomial::term(RationalFunction(minor, det), -t.lambdas[static_cast<size_t>(j)], space.variable()));
    }
    return FunctionSpace(gens, space.variable(), b);
}

FunctionSpace regularized_conjugate(const FunctionSpace& space, const std::vector<ExponentSequence>& singular) {
    const FunctionSpace star = conjugate(space);
    Polynomial a0 = one_poly(space.backend());
    for (const auto& s : singular) a0 *= Polynomial::linear(s.point).pow(s.defect());
    const RationalFunction factor(one_poly(space.backend()), a0);
    std::vector<QuasiPolynomial> gens;
    for (const auto& f : star.basis()) gens.push_back(f * factor);
    return FunctionSpace(gens, space.variable(), space.backend());
}

FunctionSpace regularized_conjugate(const FunctionSpace& space) {
    return regularized_conjugate(space, singular_points(space));
}

int span_rank(const std::vector<QuasiPolynomial>& generators) {
    std::vector<QuasiPolynomial> gs;
    for (const auto& g : generators)
        if (!g.is_zero()) gs.push_back(g);
    if (gs.empty()) return 0;
    const Backend b = gs.front().backend();
    return matrix_rank(full_matrix(build_blocks(gs, b), gs.size(), b), b);
}

bool span_equal(const FunctionSpace& a, const FunctionSpace& b) {
    if (a.dimension() != b.dimension()) return false;
    if (a.dimension() == 0) return true;
    std::vector<QuasiPolynomial> all = a.basis();
    for (const auto& f : b.basis()) all.push_back(f.with_variable(a.variable()));
    return span_rank(all) == a.dimension();
}

WronskianIdentity wronskian_identity(const FunctionSpace& space, const std::vector<ExponentSequence>& singular) {
    if (!space.has_polynomial_coefficients())
        fail(ErrorCode::NonPolynomialCoefficients, "Wronskian identity needs polynomial coefficients");
    WronskianIdentity w;
    const int n = space.dimension();
    for (const auto& s : singular) {
        const int ma = s.defect();
        for (int b = 1; b <= ma; ++b) {
            const int mab = s.exponents[static_cast<size_t>(n - ma + b - 1)] - (n - ma);
            w.lhs += mab + 1 - b;
        }
    }
    for (const auto& lambda : space.exponents()) {
        const auto blk = space.block(lambda);
        for (size_t j = 0; j < blk.size(); ++j) w.rhs += blk[j].coefficient().num().degree() + 1 - static_cast<long>(j + 1);
    }
    return w;
}

std::vector<int> SpecialSpace::trivial_points() const {
    std::vector<int> out;
    for (size_t a = 0; a < m.size(); ++a)
        if (m[a] == 0) out.push_back(static_cast<int>(a));
    return out;
}

std::vector<ExponentSequence> SpecialSpace::exponent_data() const {
    std::vector<ExponentSequence> out;
    for (size_t a = 0; a < z.size(); ++a) {
        ExponentSequence s{z[a], {}};
        for (int i = 0; i + 1 < N(); ++i) s.exponents.push_back(i);
        s.exponents.push_back(N() - 1 + m[a]);
        out.push_back(std::move(s));
    }
    return out;
}

SpecialSpace classify_special(const FunctionSpace& space, const std::vector<Scalar>& z,
                              const std::optional<std::vector<Scalar>>& lambda_order) {
    const int n_dim = space.dimension();
    if (n_dim < 2) fail(ErrorCode::NotSpecial, "special spaces have dimension at least 2");
    if (z.size() < 2) fail(ErrorCode::NotSpecial, "special spaces need at least two points z_a");
    for (size_t a = 0; a < z.size(); ++a)
        for (size_t b = a + 1; b < z.size(); ++b)
            if (z[a] == z[b]) fail(ErrorCode::InvalidArgument, "points z_a must be distinct");
    if (!space.has_polynomial_coefficients()) fail(ErrorCode::NotSpecial, "basis coefficients are not polynomials");
    const auto lambdas = space.exponents();
    if (static_cast<int>(lambdas.size()) != n_dim)
        fail(ErrorCode::NotSpecial, "each exponent must occur exactly once in a special space");

    SpecialSpace s{space, z, {}, {}, {}, {}};
    if (lambda_order) {
        if (lambda_order->size() != lambdas.size()) fail(ErrorCode::NotSpecial, "lambda list does not match the space");
        s.lambda = *lambda_order;
    } else {
        s.lambda = lambdas;
    }
    for (const auto& l : s.lambda) {
        const auto blk = space.block(l);
        if (blk.size() != 1) fail(ErrorCode::NotSpecial, "lambda " + l.to_string() + " is not an exponent of the space");
        s.ordered.push_back(blk.front());
        s.n.push_back(blk.front().coefficient().num().degree());
    }
    for (const auto& za : z) {
        const ExponentSequence e = exponents_at(space, za);
        for (int i = 0; i + 1 < n_dim; ++i)
            if (e.exponents[static_cast<size_t>(i)] != i)
                fail(ErrorCode::NotSpecial, "exponents at " + za.to_string() + " are not of the form {0,...,N-2,N-1+m}");
        s.m.push_back(e.exponents.back() - (n_dim - 1));
    }
    long sum_n = 0;
    long sum_m = 0;
    for (int v : s.n) sum_n += v;
    for (int v : s.m) sum_m += v;
    // The Wronskian has degree sum n; its zeros at z account for sum m of them.
    if (space.wronskian_numerator().degree() != sum_m)
        fail(ErrorCode::MissingSingularPoint, "the Wronskian has zeros outside z");
    if (sum_n != sum_m) fail(ErrorCode::NotSpecial, "sum of n differs from sum of m");
    return s;
}

}  // namespace bispectral
