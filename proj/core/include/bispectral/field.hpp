#pragma once

#include <gmpxx.h>

#include <complex>
#include <string>
#include <variant>

#include "bispectral/error.hpp"

namespace bispectral {

using Rational = mpq_class;
using Complex = std::complex<double>;

enum class Backend { Exact, Approx };

/// Complex number with arbitrary-precision rational parts.
struct ExactComplex {
    Rational re;
    Rational im;
};

inline constexpr double kDefaultTolerance = 1e-9;

/// Relative tolerance used by approximate comparisons on the current thread.
double tolerance() noexcept;

/// Overrides the approximate-comparison tolerance until destroyed.
class ToleranceScope {
public:
    explicit ToleranceScope(double tol) noexcept;
    ~ToleranceScope();
    ToleranceScope(const ToleranceScope&) = delete;
    ToleranceScope& operator=(const ToleranceScope&) = delete;

private:
    double saved_;
};

/// An element of the coefficient field. Either an exact complex rational or a
/// double-precision complex number; arithmetic between the two throws
/// MixedBackend instead of converting.
class Scalar {
public:
    Scalar() : value_(ExactComplex{}) {}

    static Scalar exact(Rational re, Rational im = 0);
    static Scalar exact(long num, long den = 1);
    static Scalar approx(Complex value) { return Scalar(value); }
    static Scalar approx(double re, double im = 0.0) { return Scalar(Complex(re, im)); }
    static Scalar from_int(long value, Backend backend);
    /// Parses "p/q" (or "p") strings for the two components.
    static Scalar parse_exact(const std::string& re, const std::string& im);

    Backend backend() const noexcept {
        return std::holds_alternative<ExactComplex>(value_) ? Backend::Exact : Backend::Approx;
    }
    bool is_exact() const noexcept { return backend() == Backend::Exact; }

    const ExactComplex& exact_value() const;
    Complex to_complex() const;
    /// Exact to approx is allowed; approx to exact throws ApproxBackendUnsupported.
    Scalar to_backend(Backend target) const;

    Scalar zero() const { return from_int(0, backend()); }
    Scalar one() const { return from_int(1, backend()); }

    bool is_zero() const;
    bool is_real() const;
    double abs() const;
    Scalar conj() const;
    Scalar pow(long exponent) const;

    Scalar operator-() const;
    Scalar& operator+=(const Scalar& rhs);
    Scalar& operator-=(const Scalar& rhs);
    Scalar& operator*=(const Scalar& rhs);
    Scalar& operator/=(const Scalar& rhs);

    friend Scalar operator+(Scalar lhs, const Scalar& rhs) { return lhs += rhs; }
    friend Scalar operator-(Scalar lhs, const Scalar& rhs) { return lhs -= rhs; }
    friend Scalar operator*(Scalar lhs, const Scalar& rhs) { return lhs *= rhs; }
    friend Scalar operator/(Scalar lhs, const Scalar& rhs) { return lhs /= rhs; }

    /// Exact equality for exact scalars, tolerance equality for approximate ones.
    friend bool operator==(const Scalar& a, const Scalar& b);

    std::string to_string() const;

private:
    explicit Scalar(ExactComplex v) : value_(std::move(v)) {}
    explicit Scalar(Complex v) : value_(v) {}

    void require_same_backend(const Scalar& other) const;

    std::variant<ExactComplex, Complex> value_;
};

enum class ArithOp { Add, Sub, Mul, Div };

Scalar scalar_arith(const Scalar& a, const Scalar& b, ArithOp op);

/// |a-b| <= tol * max(1, |a|, |b|) on the approximate backend, exact equality otherwise.
bool approx_equal(const Scalar& a, const Scalar& b);

/// Lexicographic order on (re, im); used for canonical sorting of points.
bool lex_less(const Scalar& a, const Scalar& b);

/// n! as an exact or approximate scalar.
Scalar factorial(long n, Backend backend);
Scalar binomial(long n, long k, Backend backend);

}  // namespace bispectral
