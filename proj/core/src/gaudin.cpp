#include "bispectral/gaudin.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace bispectral {

namespace {

using Sparse = std::map<ExponentMatrix, long>;
using IntMatrix = std::vector<std::vector<long>>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// E_ij^{(a)} = x_i d/dx_j on the a-th factor.
void add_factor_action(int i, int j, int a, const ExponentMatrix& e, long coeff, Sparse& out) {
    const auto ua = static_cast<size_t>(a);
    const long k = e[ua][static_cast<size_t>(j)];
    if (k == 0 || coeff == 0) return;
    ExponentMatrix f = e;
    f[ua][static_cast<size_t>(j)] -= 1;
    f[ua][static_cast<size_t>(i)] += 1;
    out[f] += coeff * k;
}

Sparse act(int i, int j, int a, const Sparse& v) {
    Sparse out;
    for (const auto& [e, c] : v) add_factor_action(i, j, a, e, c, out);
    return out;
}

Sparse act_total(int i, int j, const Sparse& v, int M) {
    Sparse out;
    for (int a = 0; a < M; ++a)
        for (const auto& [e, c] : v) add_factor_action(i, j, a, e, c, out);
    return out;
}

// Column k holds the image of basis vector k; everything must stay in the weight space.
template <typename F>
IntMatrix operator_matrix(const WeightBasis& b, F&& op) {
    IntMatrix out(b.size(), std::vector<long>(b.size(), 0));
    for (size_t k = 0; k < b.size(); ++k) {
        for (const auto& [e, c] : op(Sparse{{b.basis[k], 1}})) {
            if (c == 0) continue;
            auto row = b.index_of(e);
            if (!row) fail(ErrorCode::WeightMismatch, "operator leaves the weight space");
            out[*row][k] += c;
        }
    }
    return out;
}

void add_scaled(Matrix& out, const IntMatrix& m, const Scalar& s) {
    for (size_t r = 0; r < m.size(); ++r)
        for (size_t c = 0; c < m.size(); ++c)
            if (m[r][c] != 0) out[r][c] += s * Scalar::from_int(m[r][c], s.backend());
}

void check_distinct(const std::vector<Scalar>& v, const char* name) {
    for (size_t i = 0; i < v.size(); ++i)
        for (size_t j = i + 1; j < v.size(); ++j)
            if ((v[i] - v[j]).is_zero())
                fail(ErrorCode::CoincidingParameters, std::string(name) + " has repeated entries");
}

void check_two_by_two(const WeightBasis& b) {
    if (b.N != 2 || b.M != 2) fail(ErrorCode::InvalidArgument, "divided-power coordinates need N = M = 2");
}

Backend common_backend(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
    for (const auto* v : {&a, &b})
        for (const auto& s : *v)
            if (s.backend() == Backend::Approx) return Backend::Approx;
    return Backend::Exact;
}

std::vector<Scalar> on_backend(const std::vector<Scalar>& v, Backend b) {
    std::vector<Scalar> out;
    for (const auto& s : v) out.push_back(s.to_backend(b));
    return out;
}

CMat to_eigen(const Matrix& m) {
    CMat out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.size()));
    for (size_t r = 0; r < m.size(); ++r)
        for (size_t c = 0; c < m.size(); ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m[r][c].to_complex();
    return out;
}

CVec to_eigen(const std::vector<Scalar>& v) {
    CVec out(static_cast<Eigen::Index>(v.size()));
    for (size_t k = 0; k < v.size(); ++k) out(static_cast<Eigen::Index>(k)) = v[k].to_complex();
    return out;
}

std::vector<Scalar> from_complex(const std::vector<Complex>& v) {
    std::vector<Scalar> out;
    for (const auto& x : v) out.push_back(Scalar::approx(x));
    return out;
}

struct Fit {
    double deviation = 0.0;
    size_t index = 0;
};

Fit proportional_fit(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
    if (a.size() != b.size()) fail(ErrorCode::InvalidArgument, "vectors of different lengths");
    double amax = 0.0, bmax = 0.0;
    size_t pivot = 0;
    for (size_t k = 0; k < a.size(); ++k) {
        if (a[k].abs() > amax) amax = a[k].abs(), pivot = k;
        bmax = std::max(bmax, b[k].abs());
    }
    if (amax == 0.0 && bmax == 0.0) return {};
    if (amax == 0.0 || bmax == 0.0) return {1.0, pivot};
    const Complex s = b[pivot].to_complex() / a[pivot].to_complex();
    Fit f;
    for (size_t k = 0; k < a.size(); ++k) {
        const double d = std::abs(b[k].to_complex() - s * a[k].to_complex()) / bmax;
        if (d > f.deviation) f = {d, k};
    }
    return f;
}

Matrix on_backend(const Matrix& m, Backend b) {
    Matrix out;
    for (const auto& row : m) out.push_back(on_backend(row, b));
    return out;
}

std::vector<Scalar> twisted(std::vector<Scalar> v, int first_index) {
    for (size_t k = 0; k < v.size(); ++k)
        if ((first_index + static_cast<int>(k)) % 2 != 0) v[k] = -v[k];
    return v;
}

std::vector<Scalar> slice(const std::vector<Scalar>& v, int from, int to) {
    std::vector<Scalar> out;
    for (int i = from; i <= to; ++i) out.push_back(v.at(static_cast<size_t>(i)));
    return out;
}

}  // namespace

std::optional<size_t> WeightBasis::index_of(const ExponentMatrix& e) const {
    auto it = std::lower_bound(basis.begin(), basis.end(), e);
    if (it == basis.end() || *it != e) return std::nullopt;
    return static_cast<size_t>(it - basis.begin());
}

WeightBasis build_weight_basis(int N, int M, const std::vector<int>& m, const std::vector<int>& n) {
    if (N < 1 || M < 1 || static_cast<int>(m.size()) != M || static_cast<int>(n.size()) != N)
        fail(ErrorCode::WeightMismatch, "expected M highest weights and N weight entries");
    long sm = 0, sn = 0;
    for (int v : m) {
        if (v < 0) fail(ErrorCode::WeightMismatch, "negative highest weight");
        sm += v;
    }
    for (int v : n) {
        if (v < 0) fail(ErrorCode::WeightMismatch, "negative weight entry");
        sn += v;
    }
    if (sm != sn) fail(ErrorCode::WeightMismatch, "sum n != sum m");

    WeightBasis b{N, M, m, n, {}};
    ExponentMatrix cur(static_cast<size_t>(M), std::vector<int>(static_cast<size_t>(N), 0));
    std::vector<int> col = n;
    // Depth-first over the row-major entries with ascending values gives lexicographic order.
    auto rec = [&](auto&& self, int a, int i, int row_left) -> void {
        if (a == M) {
            b.basis.push_back(cur);
            return;
        }
        auto& cell = cur[static_cast<size_t>(a)][static_cast<size_t>(i)];
        auto& c = col[static_cast<size_t>(i)];
        if (i == N - 1) {
            if (row_left > c) return;
            cell = row_left;
            c -= row_left;
            if (a + 1 < M)
                self(self, a + 1, 0, m[static_cast<size_t>(a + 1)]);
            else if (std::all_of(col.begin(), col.end(), [](int x) { return x == 0; }))
                self(self, a + 1, 0, 0);
            c += row_left;
            return;
        }
        for (int v = 0; v <= std::min(row_left, c); ++v) {
            cell = v;
            c -= v;
            self(self, a, i + 1, row_left - v);
            c += v;
        }
    };
    rec(rec, 0, 0, m[0]);
    return b;
}

std::uint64_t weight_dimension(int N, int M, const std::vector<int>& m, const std::vector<int>& n) {
    if (static_cast<int>(m.size()) != M || static_cast<int>(n.size()) != N) return 0;
    if (std::any_of(m.begin(), m.end(), [](int v) { return v < 0; })) return 0;
    if (std::any_of(n.begin(), n.end(), [](int v) { return v < 0; })) return 0;
    return weight_space_dimension(m, n);
}

Matrix casimir(const WeightBasis& basis, int a, int b, Backend backend) {
    Matrix out = zero_matrix(static_cast<int>(basis.size()), static_cast<int>(basis.size()), backend);
    IntMatrix sum(basis.size(), std::vector<long>(basis.size(), 0));
    for (int i = 0; i < basis.N; ++i)
        for (int j = 0; j < basis.N; ++j) {
            IntMatrix t = operator_matrix(basis, [&](const Sparse& v) { return act(i, j, a, act(j, i, b, v)); });
            for (size_t r = 0; r < sum.size(); ++r)
                for (size_t c = 0; c < sum.size(); ++c) sum[r][c] += t[r][c];
        }
    add_scaled(out, sum, Scalar::from_int(1, backend));
    return out;
}

HamiltonianSet hamiltonians(const WeightBasis& basis, const std::vector<Scalar>& lambda_in, const std::vector<Scalar>& z_in) {
    if (static_cast<int>(lambda_in.size()) != basis.N || static_cast<int>(z_in.size()) != basis.M)
        fail(ErrorCode::InvalidArgument, "expected N values of lambda and M values of z");
    check_distinct(lambda_in, "lambda");
    check_distinct(z_in, "z");
    const Backend be = common_backend(lambda_in, z_in);
    const auto lambda = on_backend(lambda_in, be), z = on_backend(z_in, be);
    const int d = static_cast<int>(basis.size());
    const int N = basis.N, M = basis.M;

    HamiltonianSet hs{{}, {}, lambda, z};
    std::vector<std::vector<Matrix>> omega(static_cast<size_t>(M), std::vector<Matrix>(static_cast<size_t>(M)));
    for (int a = 0; a < M; ++a)
        for (int b = a + 1; b < M; ++b) {
            omega[static_cast<size_t>(a)][static_cast<size_t>(b)] = casimir(basis, a, b, be);
            omega[static_cast<size_t>(b)][static_cast<size_t>(a)] = omega[static_cast<size_t>(a)][static_cast<size_t>(b)];
        }
    // E_ii^{(a)} is diagonal: the exponent of x_i in factor a.
    auto diag = [&](int i, int a) {
        IntMatrix m(basis.size(), std::vector<long>(basis.size(), 0));
        for (size_t k = 0; k < basis.size(); ++k) m[k][k] = basis.basis[k][static_cast<size_t>(a)][static_cast<size_t>(i)];
        return m;
    };
    for (int a = 0; a < M; ++a) {
        Matrix h = zero_matrix(d, d, be);
        for (int b = 0; b < M; ++b)
            if (b != a)
                h = mat_add(h, mat_scale(omega[static_cast<size_t>(a)][static_cast<size_t>(b)],
                                         z[static_cast<size_t>(a)].one() / (z[static_cast<size_t>(a)] - z[static_cast<size_t>(b)])));
        for (int i = 0; i < N; ++i) add_scaled(h, diag(i, a), lambda[static_cast<size_t>(i)]);
        hs.H.push_back(std::move(h));
    }
    for (int i = 0; i < N; ++i) {
        Matrix g = zero_matrix(d, d, be);
        const long ni = basis.n[static_cast<size_t>(i)];
        for (int j = 0; j < N; ++j) {
            if (j == i) continue;
            IntMatrix t = operator_matrix(basis, [&](const Sparse& v) { return act_total(i, j, act_total(j, i, v, M), M); });
            for (size_t k = 0; k < t.size(); ++k) t[k][k] -= ni;
            add_scaled(g, t, lambda[static_cast<size_t>(i)].one() / (lambda[static_cast<size_t>(i)] - lambda[static_cast<size_t>(j)]));
        }
        for (int a = 0; a < M; ++a) add_scaled(g, diag(i, a), z[static_cast<size_t>(a)]);
        hs.G.push_back(std::move(g));
    }
    return hs;
}

double max_commutator(const HamiltonianSet& hs) {
    std::vector<const Matrix*> all;
    for (const auto& h : hs.H) all.push_back(&h);
    for (const auto& g : hs.G) all.push_back(&g);
    double worst = 0.0;
    for (size_t p = 0; p < all.size(); ++p)
        for (size_t q = p + 1; q < all.size(); ++q) worst = std::max(worst, max_abs(commutator(*all[p], *all[q])));
    return worst;
}

DualityMap duality_isomorphism(int N, int M, const std::vector<int>& m, const std::vector<int>& n) {
    DualityMap d{build_weight_basis(N, M, m, n), build_weight_basis(M, N, n, m), {}, {}};
    const size_t dim = d.source.size();
    if (d.target.size() != dim) fail(ErrorCode::WeightMismatch, "dual weight spaces differ in dimension");
    d.map = zero_matrix(static_cast<int>(dim), static_cast<int>(dim), Backend::Exact);
    for (size_t k = 0; k < dim; ++k) {
        const auto& e = d.source.basis[k];
        ExponentMatrix t(static_cast<size_t>(N), std::vector<int>(static_cast<size_t>(M)));
        for (int a = 0; a < M; ++a)
            for (int i = 0; i < N; ++i) t[static_cast<size_t>(i)][static_cast<size_t>(a)] = e[static_cast<size_t>(a)][static_cast<size_t>(i)];
        auto idx = d.target.index_of(t);
        if (!idx) fail(ErrorCode::WeightMismatch, "transpose missing from the dual basis");
        d.image.push_back(*idx);
        d.map[*idx][k] = Scalar::from_int(1, Backend::Exact);
    }
    return d;
}

InterchangeReport check_interchange(const DualityMap& d, const std::vector<Scalar>& lambda, const std::vector<Scalar>& z) {
    const HamiltonianSet src = hamiltonians(d.source, lambda, z);
    const HamiltonianSet dst = hamiltonians(d.target, z, lambda);
    // P X P^T, with P the permutation k -> image[k].
    auto conj = [&](const Matrix& x) {
        Matrix out = x;
        for (size_t r = 0; r < x.size(); ++r)
            for (size_t c = 0; c < x.size(); ++c) out[d.image[r]][d.image[c]] = x[r][c];
        return out;
    };
    InterchangeReport rep;
    rep.exact = src.H.front().front().front().backend() == Backend::Exact;
    auto diff = [&](const Matrix& a, const Matrix& b) { return max_abs(mat_add(a, mat_scale(b, Scalar::from_int(-1, b[0][0].backend())))); };
    bool equal = true;
    for (size_t a = 0; a < src.H.size(); ++a) {
        const Matrix lhs = conj(src.H[a]);
        rep.max_deviation = std::max(rep.max_deviation, diff(lhs, dst.G[a]));
        equal = equal && lhs == dst.G[a];
    }
    for (size_t i = 0; i < src.G.size(); ++i) {
        const Matrix lhs = conj(src.G[i]);
        rep.max_deviation = std::max(rep.max_deviation, diff(lhs, dst.H[i]));
        equal = equal && lhs == dst.H[i];
    }
    rep.exact = rep.exact && equal;
    return rep;
}

std::array<int, 2> index_bounds(const std::vector<int>& m, const std::vector<int>& n) {
    if (m.size() != 2 || n.size() != 2) fail(ErrorCode::InvalidArgument, "index bounds need two weights");
    return {std::max(0, n[1] - m[0]), std::min(m[1], n[1])};
}

Scalar divided_power_scale(int m, int k, Backend backend) {
    if (k < 0 || k > m) fail(ErrorCode::OutOfRange, "divided power index outside 0..m");
    // E_21 = x_2 d/dx_1 on a single factor with N = 2.
    Sparse v{{ExponentMatrix{{m, 0}}, 1}};
    for (int s = 0; s < k; ++s) v = act(1, 0, 0, v);
    return Scalar::from_int(v.at(ExponentMatrix{{m - k, k}}), backend) / factorial(k, backend);
}

size_t divided_index(const WeightBasis& basis, int i) {
    check_two_by_two(basis);
    const auto [alpha, beta] = index_bounds(basis.m, basis.n);
    if (i < alpha || i > beta) fail(ErrorCode::OutOfRange, "index " + std::to_string(i) + " outside alpha..beta");
    const int m1 = basis.m[0], m2 = basis.m[1], n2 = basis.n[1];
    return *basis.index_of(ExponentMatrix{{m1 - n2 + i, n2 - i}, {m2 - i, i}});
}

namespace {

Scalar divided_scale(const WeightBasis& basis, int i, Backend b) {
    return divided_power_scale(basis.m[0], basis.n[1] - i, b) * divided_power_scale(basis.m[1], i, b);
}

}  // namespace

Vector from_divided(const WeightBasis& basis, const std::vector<Scalar>& coords) {
    check_two_by_two(basis);
    const auto [alpha, beta] = index_bounds(basis.m, basis.n);
    if (static_cast<int>(coords.size()) != beta - alpha + 1) fail(ErrorCode::InvalidArgument, "expected beta - alpha + 1 coordinates");
    if (coords.empty()) return {};
    const Backend be = coords.front().backend();
    Vector v(basis.size(), Scalar::from_int(0, be));
    for (int i = alpha; i <= beta; ++i)
        v[divided_index(basis, i)] = coords[static_cast<size_t>(i - alpha)] * divided_scale(basis, i, be);
    return v;
}

std::vector<Scalar> to_divided(const WeightBasis& basis, const Vector& v) {
    check_two_by_two(basis);
    if (v.size() != basis.size()) fail(ErrorCode::InvalidArgument, "vector length differs from the basis size");
    const auto [alpha, beta] = index_bounds(basis.m, basis.n);
    std::vector<Scalar> out;
    for (int i = alpha; i <= beta; ++i) {
        const Scalar& x = v[divided_index(basis, i)];
        out.push_back(x / divided_scale(basis, i, x.backend()));
    }
    return out;
}

int weyl_index(const std::vector<int>& m, const std::vector<int>& n, int i) {
    const auto [alpha, beta] = index_bounds(m, n);
    if (i < alpha || i > beta) fail(ErrorCode::OutOfRange, "index " + std::to_string(i) + " outside alpha..beta");
    return m[1] - i;
}

WeylMap weyl_isomorphism(const WeightBasis& basis) {
    check_two_by_two(basis);
    WeylMap w{basis, build_weight_basis(2, 2, basis.m, {basis.n[1], basis.n[0]}), 0, 0, {}, {}};
    const auto [alpha, beta] = index_bounds(basis.m, basis.n);
    const auto [alpha2, beta2] = index_bounds(w.target.m, w.target.n);
    w.alpha = alpha;
    w.beta = beta;
    const int len = beta - alpha + 1;
    const int d = static_cast<int>(basis.size());
    w.divided = zero_matrix(std::max(0, beta2 - alpha2 + 1), std::max(0, len), Backend::Exact);
    w.monomial = zero_matrix(d, d, Backend::Exact);
    for (int i = alpha; i <= beta; ++i) {
        const int j = weyl_index(basis.m, basis.n, i);
        w.divided[static_cast<size_t>(j - alpha2)][static_cast<size_t>(i - alpha)] = Scalar::from_int(1, Backend::Exact);
        w.monomial[divided_index(w.target, j)][divided_index(basis, i)] =
            divided_scale(w.target, j, Backend::Exact) / divided_scale(basis, i, Backend::Exact);
    }
    return w;
}

std::vector<Scalar> universal_coefficients(const std::vector<Scalar>& t, const Scalar& z1, const Scalar& z2) {
    const Backend be = common_backend(t, {z1, z2});
    const Scalar a1 = z1.to_backend(be), a2 = z2.to_backend(be);
    const int n = static_cast<int>(t.size());
    // gen[k] = sum over subsets S of size k of prod_S 1/(t-z1) prod_{S^c} 1/(t-z2).
    std::vector<Scalar> gen{Scalar::from_int(1, be)};
    for (const auto& tj_in : t) {
        const Scalar tj = tj_in.to_backend(be);
        if ((tj - a1).is_zero() || (tj - a2).is_zero()) fail(ErrorCode::NonAdmissiblePoint, "a coordinate meets z");
        const Scalar u = tj.one() / (tj - a1), w = tj.one() / (tj - a2);
        std::vector<Scalar> next(gen.size() + 1, Scalar::from_int(0, be));
        for (size_t k = 0; k < gen.size(); ++k) {
            next[k] += gen[k] * w;
            next[k + 1] += gen[k] * u;
        }
        gen = std::move(next);
    }
    std::vector<Scalar> C;
    for (int i = 0; i <= n; ++i) C.push_back(gen[static_cast<size_t>(n - i)] * factorial(n - i, be) * factorial(i, be));
    return C;
}

std::vector<Scalar> mixed_basis_expand(const Polynomial& p, const Scalar& z1_in, const Scalar& z2_in, int n) {
    if (n < 0) fail(ErrorCode::InvalidArgument, "negative degree");
    if (p.degree() > n) fail(ErrorCode::DegreeTooHigh, "deg p = " + std::to_string(p.degree()) + " > " + std::to_string(n));
    const Backend be = p.backend() == Backend::Approx || z1_in.backend() == Backend::Approx || z2_in.backend() == Backend::Approx
                           ? Backend::Approx
                           : Backend::Exact;
    const Scalar z1 = z1_in.to_backend(be), z2 = z2_in.to_backend(be);
    const Scalar delta = z2 - z1;
    if (delta.is_zero()) fail(ErrorCode::CoincidingParameters, "z1 = z2");
    // With s = x - z2: (x-z1)^{n-i} s^i = sum_r binom(n-i, r) delta^{n-i-r} s^{i+r}; triangular in s.
    const std::vector<Scalar> a = p.to_backend(be).taylor_at(z2);
    auto coeff = [&](int k) { return k < static_cast<int>(a.size()) ? a[static_cast<size_t>(k)] : Scalar::from_int(0, be); };
    std::vector<Scalar> c;
    for (int k = 0; k <= n; ++k) {
        Scalar rest = coeff(k);
        for (int i = 0; i < k; ++i)
            rest -= c[static_cast<size_t>(i)] / (factorial(n - i, be) * factorial(i, be)) * binomial(n - i, k - i, be) * delta.pow(n - k);
        c.push_back(rest * factorial(n - k, be) * factorial(k, be) / delta.pow(n - k));
    }
    return c;
}

double proportionality_deviation(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
    return proportional_fit(a, b).deviation;
}

std::vector<Scalar> normalized_first(const std::vector<Scalar>& v) {
    double top = 0.0;
    for (const auto& x : v) top = std::max(top, x.abs());
    for (const auto& x : v) {
        if (x.abs() > 1e-12 * top) {
            std::vector<Scalar> out;
            for (const auto& y : v) out.push_back(y / x);
            return out;
        }
    }
    return v;
}

BetheVector2x2 bethe_vector_2x2(const CriticalPoint& cp, const std::vector<int>& m, const std::vector<Scalar>& z) {
    if (cp.levels.size() != 1 || m.size() != 2 || z.size() != 2)
        fail(ErrorCode::InvalidArgument, "the 2x2 Bethe vector needs one level, two weights and two points");
    const auto& t = cp.levels[0];
    for (size_t j = 0; j < t.size(); ++j)
        for (size_t k = j + 1; k < t.size(); ++k)
            if ((t[j] - t[k]).is_zero()) fail(ErrorCode::NonAdmissiblePoint, "repeated coordinate");
    const int n2 = static_cast<int>(t.size());
    const int n1 = m[0] + m[1] - n2;
    BetheVector2x2 bv;
    bv.basis = build_weight_basis(2, 2, m, {n1, n2});
    const auto [alpha, beta] = index_bounds(m, bv.basis.n);
    bv.alpha = alpha;
    bv.beta = beta;
    bv.C = universal_coefficients(t, z[0], z[1]);
    const Backend be = bv.C.front().backend();
    bv.vector = from_divided(bv.basis, slice(bv.C, alpha, beta));

    // Second path: expand p_2 = prod (x - t_j) and compare with (-1)^i C_i.
    bv.c = mixed_basis_expand(Polynomial::from_roots(on_backend(t, be), be), z[0], z[1], n2);
    bv.factor_deviation = proportionality_deviation(twisted(bv.C, 0), bv.c);
    return bv;
}

EigenvectorCheck eigenvector_check(const HamiltonianSet& hs, const Vector& w, const std::vector<Scalar>& values) {
    if (values.size() != hs.G.size() + hs.H.size()) fail(ErrorCode::InvalidArgument, "one eigenvalue per Hamiltonian expected");
    const CVec v = to_eigen(w);
    const double norm = v.norm();
    if (norm == 0.0) fail(ErrorCode::InvalidArgument, "zero vector");
    EigenvectorCheck ch;
    for (size_t i = 0; i < hs.G.size(); ++i) {
        const Complex mu = values[i].to_complex();
        ch.g_values.push_back(mu);
        ch.g_residual = std::max(ch.g_residual, (to_eigen(hs.G[i]) * v - mu * v).norm() / norm);
    }
    for (size_t a = 0; a < hs.H.size(); ++a) {
        const Complex mu = values[hs.G.size() + a].to_complex();
        ch.h_values.push_back(mu);
        ch.h_residual = std::max(ch.h_residual, (to_eigen(hs.H[a]) * v - mu * v).norm() / norm);
    }
    return ch;
}

std::array<Scalar, 3> recurrence_coefficients(const RecurrenceData& r, int i) {
    const Backend be = r.phi11.backend();
    auto I = [&](long v) { return Scalar::from_int(v, be); };
    const Scalar up = I(static_cast<long>(r.n2 - i) * (r.m2 - i));
    const Scalar down = I(static_cast<long>(i) * (r.n1 - r.m2 + i));
    const Scalar mid = I(-2L * i * i + static_cast<long>(i) * (2 * r.n2 - r.m1 + r.m2) - static_cast<long>(r.n2) * r.m2) +
                       (r.lambda1 - r.lambda2).to_backend(be) * (r.z1 - r.z2).to_backend(be) * (I(i) + r.phi11);
    return {up, down, mid};
}

std::vector<Complex> recurrence_residuals(const RecurrenceData& r, const std::vector<Scalar>& c) {
    if (static_cast<int>(c.size()) != r.n2 + 1) fail(ErrorCode::InvalidArgument, "expected coefficients c_0..c_{n_2}");
    const auto [alpha, beta] = index_bounds({r.m1, r.m2}, {r.n1, r.n2});
    auto s = [&](int i) -> Complex {
        if (i < 0 || i > r.n2) return 0.0;
        const Complex v = c[static_cast<size_t>(i)].to_complex();
        return i % 2 == 0 ? v : -v;
    };
    std::vector<Complex> res;
    double scale = 0.0;
    for (int i = alpha; i <= beta; ++i) {
        const auto k = recurrence_coefficients(r, i);
        const Complex t0 = k[0].to_complex() * s(i + 1), t1 = k[1].to_complex() * s(i - 1), t2 = k[2].to_complex() * s(i);
        res.push_back(t0 + t1 + t2);
        scale = std::max(scale, std::abs(t0) + std::abs(t1) + std::abs(t2));
    }
    if (scale > 0.0)
        for (auto& x : res) x /= scale;
    return res;
}

double recurrence_residual(const RecurrenceData& r, const std::vector<Scalar>& c) {
    double worst = 0.0;
    for (const auto& x : recurrence_residuals(r, c)) worst = std::max(worst, std::abs(x));
    return worst;
}

RecurrenceData second_symmetry(const RecurrenceData& r, const Scalar& phi12) {
    return {r.lambda2, r.lambda1, r.z1, r.z2, r.n2, r.n1, r.m1, r.m2, phi12};
}

RecurrenceData first_symmetry(const RecurrenceData& r, const Scalar& phi11_dual) {
    return {r.z1, r.z2, r.lambda1, r.lambda2, r.m1, r.m2, r.n1, r.n2, phi11_dual};
}

double DualityReport2x2::max_deviation() const {
    return std::max({cd_deviation, ce_deviation, recurrence_c, recurrence_second, recurrence_d, recurrence_e, weyl_deviation,
                     duality_deviation});
}

DualityReport2x2 duality_report_2x2(const SpecialSpace& v, double tol) {
    const TransformResult r = special_bispectral_dual(v);
    if (!r.special) fail(ErrorCode::DualityViolation, "the special transform returned no typed dual");
    return duality_report_2x2(v, *r.special, tol);
}

DualityReport2x2 duality_report_2x2(const SpecialSpace& v, const SpecialSpace& u, double tol) {
    if (v.N() != 2 || v.M() != 2 || u.N() != 2 || u.M() != 2) fail(ErrorCode::InvalidArgument, "the duality check needs N = M = 2");
    const auto& l = v.lambda;
    const auto& z = v.z;
    const int n1 = v.n[0], n2 = v.n[1], m1 = v.m[0], m2 = v.m[1];
    DualityReport2x2 rep;
    const auto [alpha, beta] = index_bounds(v.m, v.n);
    rep.alpha = alpha;
    rep.beta = beta;

    rep.phi = extract_phi(special_fundamental(v), {l[0], l[1]}, {z[0], z[1]});
    rep.phi_dual = extract_phi(special_fundamental(u), {u.lambda[0], u.lambda[1]}, {u.z[0], u.z[1]});
    rep.c = mixed_basis_expand(v.p(1), z[0], z[1], n2);
    rep.d = mixed_basis_expand(v.p(0), z[0], z[1], n1);
    rep.e = mixed_basis_expand(u.p(1), l[0], l[1], m2);

    const std::vector<Scalar> cr = slice(rep.c, alpha, beta);
    std::vector<Scalar> dr, er = slice(rep.e, alpha, beta);
    for (int i = alpha; i <= beta; ++i) dr.push_back(rep.d.at(static_cast<size_t>(m2 - i)));
    const Fit fd = proportional_fit(cr, dr), fe = proportional_fit(cr, er);
    rep.cd_deviation = fd.deviation;
    rep.ce_deviation = fe.deviation;
    rep.worst_index = alpha + static_cast<int>(fd.deviation >= fe.deviation ? fd.index : fe.index);

    const Backend be = rep.phi.phi[0][0].backend();
    const RecurrenceData rc{l[0].to_backend(be), l[1].to_backend(be), z[0].to_backend(be), z[1].to_backend(be), n1, n2, m1, m2,
                            rep.phi.phi[0][0]};
    rep.recurrence_c = recurrence_residual(rc, rep.c);
    const RecurrenceData rd = second_symmetry(rc, rep.phi.phi[0][1]);
    rep.recurrence_d = recurrence_residual(rd, rep.d);
    // c read through d_j = c_{m_2 - j}; the closed block of the p_1 equations only sees alpha..beta.
    std::vector<Scalar> d_from_c(static_cast<size_t>(n1 + 1), Scalar::from_int(0, rep.c.front().backend()));
    for (int i = alpha; i <= beta; ++i) d_from_c[static_cast<size_t>(m2 - i)] = rep.c[static_cast<size_t>(i)];
    rep.recurrence_second = recurrence_residual(rd, d_from_c);
    const RecurrenceData re = first_symmetry(rc, rep.phi_dual.phi[0][0].to_backend(be));
    rep.recurrence_e = recurrence_residual(re, rep.e);

    // Bethe vectors of the three sequences, compared through the Weyl and duality maps.
    const WeightBasis bn = build_weight_basis(2, 2, v.m, v.n);
    const WeylMap w = weyl_isomorphism(bn);
    const DualityMap dm = duality_isomorphism(2, 2, v.m, v.n);
    const auto [alpha2, beta2] = index_bounds(w.target.m, w.target.n);
    const Vector wc = from_divided(bn, twisted(cr, alpha));
    const Vector wd = from_divided(w.target, twisted(slice(rep.d, alpha2, beta2), alpha2));
    const Vector we = from_divided(dm.target, twisted(er, alpha));
    const Backend vb = wc.front().backend();
    rep.weyl_deviation = proportionality_deviation(matvec(on_backend(w.monomial, vb), wc), wd);
    rep.duality_deviation = proportionality_deviation(matvec(on_backend(dm.map, vb), wc), we);

    auto add = [&](const std::string& name, double value) {
        std::ostringstream os;
        os << "deviation " << value;
        rep.checks.push_back({name, value <= tol, os.str()});
    };
    add("c_i = d_{m2-i}", rep.cd_deviation);
    add("c_i = e_i", rep.ce_deviation);
    add("recurrence for c", rep.recurrence_c);
    add("second symmetry on c", rep.recurrence_second);
    add("recurrence for d", rep.recurrence_d);
    add("recurrence for e", rep.recurrence_e);
    add("Weyl identification", rep.weyl_deviation);
    add("duality identification", rep.duality_deviation);
    rep.passed = std::all_of(rep.checks.begin(), rep.checks.end(), [](const DualityCheck& c) { return c.passed; });
    return rep;
}

DualityReport2x2 verify_duality_2x2(const SpecialSpace& v, double tol) {
    DualityReport2x2 rep = duality_report_2x2(v, tol);
    if (!rep.passed) {
        std::ostringstream os;
        os << "c_i = d_{m2-i} = e_i fails near index " << rep.worst_index << ", max deviation " << rep.max_deviation();
        for (const auto& c : rep.checks)
            if (!c.passed) os << "; " << c.name << " " << c.detail;
        fail(ErrorCode::DualityViolation, os.str());
    }
    return rep;
}

JointSpectrum joint_spectrum(const HamiltonianSet& hs, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<CMat> ops;
    for (const auto& g : hs.G) ops.push_back(to_eigen(g));
    for (const auto& h : hs.H) ops.push_back(to_eigen(h));
    CMat mix = CMat::Zero(ops.front().rows(), ops.front().cols());
    for (const auto& op : ops) mix += Complex(u(rng), u(rng)) * op;
    Eigen::ComplexEigenSolver<CMat> es(mix);
    JointSpectrum js;
    for (Eigen::Index k = 0; k < mix.rows(); ++k) {
        CVec v = es.eigenvectors().col(k);
        v /= v.norm();
        std::vector<Complex> vals;
        for (const auto& op : ops) {
            const Complex mu = v.dot(op * v);
            vals.push_back(mu);
            js.residual = std::max(js.residual, (op * v - mu * v).norm());
        }
        js.vectors.emplace_back(v.data(), v.data() + v.size());
        js.values.push_back(std::move(vals));
    }
    return js;
}

JointEigenvector joint_eigenvector(const HamiltonianSet& hs, const std::vector<Scalar>& values) {
    std::vector<CMat> ops;
    for (const auto& g : hs.G) ops.push_back(to_eigen(g));
    for (const auto& h : hs.H) ops.push_back(to_eigen(h));
    if (ops.size() != values.size()) fail(ErrorCode::InvalidArgument, "one eigenvalue per Hamiltonian expected");
    const Eigen::Index d = ops.front().rows();
    CMat stacked(d * static_cast<Eigen::Index>(ops.size()), d);
    for (size_t k = 0; k < ops.size(); ++k)
        stacked.middleRows(static_cast<Eigen::Index>(k) * d, d) = ops[k] - values[k].to_complex() * CMat::Identity(d, d);
    Eigen::JacobiSVD<CMat> svd(stacked, Eigen::ComputeFullV);
    CVec w = svd.matrixV().col(d - 1);
    double res = 0.0;
    for (size_t k = 0; k < ops.size(); ++k)
        res = std::max(res, (ops[k] * w - values[k].to_complex() * w).norm());
    return {std::vector<Complex>(w.data(), w.data() + w.size()), res};
}

ConjectureReport conjecture_report(const MasterSpec& spec, const BetheOptions& options) {
    const int N = spec.N(), M = spec.M();
    const DualityMap dm = duality_isomorphism(N, M, spec.m(), spec.n());
    const HamiltonianSet hs = hamiltonians(dm.source, spec.lambda(), spec.z());
    const HamiltonianSet hd = hamiltonians(dm.target, spec.z(), spec.lambda());
    const MasterSpec dual = spec.dual();
    ConjectureReport rep;
    rep.dimension = dm.source.size();
    for (const auto& cp : solve_bethe(spec, options).points) {
        ConjectureEntry e;
        e.point = cp.levels;
        const auto mu = eigenvalue_gradient(spec, cp.levels);
        const JointEigenvector w = joint_eigenvector(hs, mu);
        e.eigen_residual = w.residual;

        const SpecialSpace v = space_from_critical_point(spec, cp);
        const TransformResult r = special_bispectral_dual(v);
        const CriticalPoint cpd = critical_point_from_space(*r.special);
        e.dual_point = cpd.levels;
        const auto mud = eigenvalue_gradient(dual, cpd.levels);
        const JointEigenvector wd = joint_eigenvector(hd, mud);
        e.dual_eigen_residual = wd.residual;

        // H_a on the gl_N side is G_a on the gl_M side and the other way round.
        for (int a = 0; a < M; ++a)
            e.eigenvalue_mismatch = std::max(e.eigenvalue_mismatch, (mu[static_cast<size_t>(N + a)] - mud[static_cast<size_t>(a)]).abs());
        for (int i = 0; i < N; ++i)
            e.eigenvalue_mismatch = std::max(e.eigenvalue_mismatch, (mu[static_cast<size_t>(i)] - mud[static_cast<size_t>(M + i)]).abs());

        const std::vector<Scalar> moved = matvec(on_backend(dm.map, Backend::Approx), from_complex(w.vector));
        e.proportionality = proportionality_deviation(moved, from_complex(wd.vector));
        rep.max_deviation = std::max({rep.max_deviation, e.eigen_residual, e.dual_eigen_residual, e.eigenvalue_mismatch, e.proportionality});
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

}  // namespace bispectral
