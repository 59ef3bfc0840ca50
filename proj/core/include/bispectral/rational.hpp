#pragma once

#include <string>

#include "bispectral/polynomial.hpp"

namespace bispectral {

/// Quotient of polynomials with a monic denominator. On the exact backend the
/// pair is kept coprime; on the approximate backend no cancellation is attempted.
class RationalFunction {
public:
    explicit RationalFunction(Backend backend = Backend::Exact);
    RationalFunction(Polynomial numerator);  // NOLINT(google-explicit-constructor)
    RationalFunction(Polynomial numerator, Polynomial denominator);

    static RationalFunction constant(const Scalar& c) { return RationalFunction(Polynomial::constant(c)); }

    Backend backend() const noexcept { return num_.is_zero() ? den_.backend() : num_.backend(); }
    const Polynomial& num() const noexcept { return num_; }
    const Polynomial& den() const noexcept { return den_; }
    bool is_zero() const noexcept { return num_.is_zero(); }
    bool is_polynomial() const noexcept { return den_.degree() == 0; }
    /// Numerator divided by denominator; throws NonPolynomialCoefficients if a
    /// remainder is left.
    Polynomial to_polynomial() const;

    Scalar operator()(const Scalar& x) const;
    Complex eval(Complex x) const;

    RationalFunction derivative() const;
    RationalFunction to_backend(Backend target) const;

    RationalFunction operator-() const;
    RationalFunction& operator+=(const RationalFunction& rhs);
    RationalFunction& operator-=(const RationalFunction& rhs);
    RationalFunction& operator*=(const RationalFunction& rhs);
    RationalFunction& operator/=(const RationalFunction& rhs);
    RationalFunction& operator*=(const Scalar& rhs);

    friend RationalFunction operator+(RationalFunction a, const RationalFunction& b) { return a += b; }
    friend RationalFunction operator-(RationalFunction a, const RationalFunction& b) { return a -= b; }
    friend RationalFunction operator*(RationalFunction a, const RationalFunction& b) { return a *= b; }
    friend RationalFunction operator/(RationalFunction a, const RationalFunction& b) { return a /= b; }
    friend RationalFunction operator*(RationalFunction a, const Scalar& b) { return a *= b; }
    friend RationalFunction operator*(const Scalar& a, RationalFunction b) { return b *= a; }

    /// Cross-multiplied comparison.
    friend bool operator==(const RationalFunction& a, const RationalFunction& b);

    std::string to_string(char var = 'x') const;

private:
    void normalize();

    Polynomial num_;
    Polynomial den_;
};

/// Logarithmic derivative p'/p.
RationalFunction log_derivative(const Polynomial& p);

}  // namespace bispectral
