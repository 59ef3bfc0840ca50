#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "bispectral/quasipoly.hpp"

namespace bispectral {

/// Attainable orders of a space at a point, strictly increasing.
struct ExponentSequence {
    Scalar point;
    std::vector<int> exponents;

    /// True unless the exponents are 0, 1, ..., N-1.
    bool is_singular() const;
    /// The integer M_a: N minus the length of the initial run e_i = i - 1.
    int defect() const;
};

/// Polynomial numerators of the derivative matrix of single-exponent functions.
/// Column j is scaled by den_j^rows so every entry is a polynomial.
struct DerivativeTable {
    Backend backend = Backend::Exact;
    int rows = 0;
    std::vector<std::vector<Polynomial>> entries;  ///< entries[k][j] ~ (d/dx)^k f_j
    std::vector<Polynomial> column_scale;          ///< den_j^rows
    std::vector<Scalar> lambdas;
};

DerivativeTable derivative_table(const std::vector<QuasiPolynomial>& fs, int rows);

/// Determinant of the submatrix with the given rows and columns (in order).
Polynomial table_minor(const DerivativeTable& t, const std::vector<int>& rows, const std::vector<int>& cols);

/// Finite-dimensional span of quasi-polynomials. The basis is canonicalized on
/// construction: one block per exponent lambda (sorted by (re, im)), and inside
/// a block reduced echelon numerators of increasing degree over a common
/// denominator.
class FunctionSpace {
public:
    /// `variable` and `backend` only matter for the zero-dimensional space;
    /// otherwise they are taken from the generators. Throws DegenerateBasis if
    /// the generators are dependent.
    explicit FunctionSpace(const std::vector<QuasiPolynomial>& generators, char variable = 'x',
                           Backend backend = Backend::Exact);

    int dimension() const noexcept { return static_cast<int>(basis_.size()); }
    Backend backend() const noexcept { return backend_; }
    char variable() const noexcept { return variable_; }
    const std::vector<QuasiPolynomial>& basis() const noexcept { return basis_; }

    /// Distinct exponents lambda_i in canonical order.
    std::vector<Scalar> exponents() const;
    /// N_i: number of basis elements with exponent lambda_i.
    std::vector<int> multiplicities() const;
    /// Basis elements with the given exponent, increasing degree.
    std::vector<QuasiPolynomial> block(const Scalar& lambda) const;
    bool has_polynomial_coefficients() const;

    /// Wronskian of the canonical basis (single exponent, cached).
    const QuasiPolynomial& wronskian() const;
    /// Numerator of the Wronskian coefficient.
    Polynomial wronskian_numerator() const;

    FunctionSpace to_backend(Backend target) const;

private:
    struct Cache;

    std::vector<QuasiPolynomial> basis_;
    Backend backend_;
    char variable_;
    std::shared_ptr<Cache> cache_;
};

QuasiPolynomial wronskian(const FunctionSpace& space);
/// Wronskian of an arbitrary list of single-exponent functions; Wr() = 1.
QuasiPolynomial wronskian_of(const std::vector<QuasiPolynomial>& fs, Backend backend, char variable = 'x');

ExponentSequence exponents_at(const FunctionSpace& space, const Scalar& z0);

/// Singular points with their exponents, sorted by (re, im). Exact spaces
/// require all singular points in Q(i).
std::vector<ExponentSequence> singular_points(const FunctionSpace& space);

FunctionSpace conjugate(const FunctionSpace& space);
FunctionSpace regularized_conjugate(const FunctionSpace& space);
/// Same, with the singular data supplied by the caller.
FunctionSpace regularized_conjugate(const FunctionSpace& space, const std::vector<ExponentSequence>& singular);

/// Dimension of the span of arbitrary generators.
int span_rank(const std::vector<QuasiPolynomial>& generators);
bool span_equal(const FunctionSpace& a, const FunctionSpace& b);

/// Both sides of the Wronskian degree identity for a space with polynomial
/// coefficients: sum over singular points of (m_ab + 1 - b) and sum over
/// exponents of (n_ij + 1 - j).
struct WronskianIdentity {
    long lhs = 0;
    long rhs = 0;
    bool holds() const { return lhs == rhs; }
};
WronskianIdentity wronskian_identity(const FunctionSpace& space, const std::vector<ExponentSequence>& singular);

/// A space of (lambda, z, n, m)-type.
struct SpecialSpace {
    FunctionSpace space;
    std::vector<Scalar> z;
    std::vector<Scalar> lambda;
    std::vector<int> n;
    std::vector<int> m;
    /// ordered[i] = p_i e^{lambda_i x}.
    std::vector<QuasiPolynomial> ordered;

    int N() const { return static_cast<int>(lambda.size()); }
    int M() const { return static_cast<int>(z.size()); }
    Polynomial p(int i) const { return ordered.at(static_cast<size_t>(i)).coefficient().to_polynomial(); }
    /// Indices a with m_a = 0 (points of z where the space is not singular).
    std::vector<int> trivial_points() const;
    /// Exponent data at each z_a, {0..N-2, N-1+m_a}.
    std::vector<ExponentSequence> exponent_data() const;
};

/// Verifies the (lambda, z, n, m) pattern. `lambda_order`, when given, fixes
/// the order of the exponents; otherwise the canonical order is used.
SpecialSpace classify_special(const FunctionSpace& space, const std::vector<Scalar>& z,
                              const std::optional<std::vector<Scalar>>& lambda_order = std::nullopt);

}  // namespace bispectral
