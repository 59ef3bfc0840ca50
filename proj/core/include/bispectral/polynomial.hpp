#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "bispectral/field.hpp"

namespace bispectral {

/// Univariate polynomial, coefficients lowest degree first. Trailing zeros are
/// stripped on construction, so the zero polynomial has no coefficients.
class Polynomial {
public:
    explicit Polynomial(Backend backend = Backend::Exact) : backend_(backend) {}
    explicit Polynomial(std::vector<Scalar> coeffs);
    Polynomial(std::vector<Scalar> coeffs, Backend backend);

    static Polynomial constant(const Scalar& c);
    static Polynomial monomial(const Scalar& c, int degree);
    /// The monic linear factor x - root.
    static Polynomial linear(const Scalar& root);
    /// Product of (x - root)^multiplicity over the given roots.
    static Polynomial from_roots(const std::vector<Scalar>& roots, Backend backend);

    Backend backend() const noexcept { return backend_; }
    const std::vector<Scalar>& coeffs() const noexcept { return coeffs_; }
    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const noexcept { return coeffs_.empty(); }
    Scalar coeff(int k) const;
    Scalar leading() const;
    /// Lowest index with a nonzero coefficient (order of vanishing at 0); -1 for zero.
    int valuation() const;
    double max_abs() const;

    Scalar operator()(const Scalar& x) const;
    Complex eval(Complex x) const;

    Polynomial derivative(int k = 1) const;
    Polynomial monic() const;
    /// p(x + a).
    Polynomial shifted(const Scalar& a) const;
    /// Coefficients of p(x) written in powers of (x - a).
    std::vector<Scalar> taylor_at(const Scalar& a) const { return shifted(a).coeffs_; }
    Polynomial to_backend(Backend target) const;
    Polynomial pow(int exponent) const;

    Polynomial operator-() const;
    Polynomial& operator+=(const Polynomial& rhs);
    Polynomial& operator-=(const Polynomial& rhs);
    Polynomial& operator*=(const Polynomial& rhs);
    Polynomial& operator*=(const Scalar& rhs);

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, const Polynomial& b) { return a *= b; }
    friend Polynomial operator*(Polynomial a, const Scalar& b) { return a *= b; }
    friend Polynomial operator*(const Scalar& a, Polynomial b) { return b *= a; }

    /// Coefficientwise equality under Scalar equality.
    friend bool operator==(const Polynomial& a, const Polynomial& b);

    std::string to_string(char var = 'x') const;

private:
    void normalize();
    Backend merged_backend(const Polynomial& other) const;

    std::vector<Scalar> coeffs_;
    Backend backend_;
};

struct DivMod {
    Polynomial quotient;
    Polynomial remainder;
};

DivMod divmod(const Polynomial& p, const Polynomial& q);

/// Quotient p / q when q divides p. Throws InvalidArgument if the remainder is
/// nonzero (exact) or above tolerance relative to |p| (approximate).
Polynomial exact_quotient(const Polynomial& p, const Polynomial& q);

/// Monic greatest common divisor; exact backend only.
Polynomial poly_gcd(const Polynomial& p, const Polynomial& q);

/// Multiplicity of `point` as a root of p (exact backend: by repeated exact
/// division; approximate: by derivative vanishing within tolerance).
int root_multiplicity(const Polynomial& p, const Scalar& point);

struct Root {
    Scalar value;
    int multiplicity = 1;
    /// Set when an exact polynomial had a root outside Q(i); the value is then
    /// an approximate scalar.
    bool approximate = false;
};

inline constexpr int kAberthMaxIterations = 200;
inline constexpr double kRootClusterTolerance = 1e-7;
/// Second pass: clusters closer than this (relative) are merged when their
/// spread is within rounding of the coefficients at level kRootMergeBackward.
inline constexpr double kRootMergeRadius = 1e-5;
inline constexpr double kRootMergeBackward = 1e-12;

/// All complex roots with multiplicities (summing to deg p), sorted by (re, im).
std::vector<Root> poly_roots(const Polynomial& p);

/// Numeric roots of a complex-coefficient polynomial (Aberth–Ehrlich), no clustering.
std::vector<Complex> aberth_roots(const std::vector<Complex>& coeffs);

}  // namespace bispectral
