#include "bispectral/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace bispectral {

namespace {

thread_local double g_tolerance = kDefaultTolerance;

Rational parse_rational(const std::string& text) {
    try {
        Rational value(text, 10);
        if (value.get_den() == 0) fail(ErrorCode::ParseError, "zero denominator in '" + text + "'");
        value.canonicalize();
        return value;
    } catch (const std::invalid_argument&) {
        fail(ErrorCode::ParseError, "not a rational number: '" + text + "'");
    }
}

double to_double(const Rational& q) { return q.get_d(); }

}  // namespace

double tolerance() noexcept { return g_tolerance; }

ToleranceScope::ToleranceScope(double tol) noexcept : saved_(g_tolerance) { g_tolerance = tol; }
ToleranceScope::~ToleranceScope() { g_tolerance = saved_; }

Scalar Scalar::exact(Rational re, Rational im) {
    re.canonicalize();
    im.canonicalize();
    return Scalar(ExactComplex{std::move(re), std::move(im)});
}

Scalar Scalar::exact(long num, long den) {
    if (den == 0) fail(ErrorCode::DivisionByZero, "zero denominator in exact literal");
    return exact(Rational(num, den));
}

Scalar Scalar::from_int(long value, Backend backend) {
    if (backend == Backend::Exact) return exact(Rational(value));
    return approx(static_cast<double>(value));
}

Scalar Scalar::parse_exact(const std::string& re, const std::string& im) {
    return exact(parse_rational(re), parse_rational(im));
}

const ExactComplex& Scalar::exact_value() const {
    if (const auto* v = std::get_if<ExactComplex>(&value_)) return *v;
    fail(ErrorCode::ApproxBackendUnsupported, "exact value requested from an approximate scalar");
}

Complex Scalar::to_complex() const {
    if (const auto* v = std::get_if<ExactComplex>(&value_)) return {to_double(v->re), to_double(v->im)};
    return std::get<Complex>(value_);
}

Scalar Scalar::to_backend(Backend target) const {
    if (target == backend()) return *this;
    if (target == Backend::Approx) return approx(to_complex());
    fail(ErrorCode::ApproxBackendUnsupported, "cannot convert an approximate scalar to the exact backend");
}

void Scalar::require_same_backend(const Scalar& other) const {
    if (backend() != other.backend()) fail(ErrorCode::MixedBackend, "exact and approximate scalars combined");
}

bool Scalar::is_zero() const {
    if (const auto* v = std::get_if<ExactComplex>(&value_)) return sgn(v->re) == 0 && sgn(v->im) == 0;
    return std::abs(std::get<Complex>(value_)) <= g_tolerance;
}

bool Scalar::is_real() const {
    if (const auto* v = std::get_if<ExactComplex>(&value_)) return sgn(v->im) == 0;
    const Complex c = std::get<Complex>(value_);
    return std::abs(c.imag()) <= g_tolerance * std::max(1.0, std::abs(c));
}

double Scalar::abs() const { return std::abs(to_complex()); }

Scalar Scalar::conj() const {
    if (const auto* v = std::get_if<ExactComplex>(&value_)) return exact(v->re, -v->im);
    return approx(std::conj(std::get<Complex>(value_)));
}

Scalar Scalar::pow(long exponent) const {
    if (exponent < 0) return one() / pow(-exponent);
    Scalar result = one();
    Scalar base = *this;
    while (exponent > 0) {
        if (exponent & 1) result *= base;
        base *= base;
        exponent >>= 1;
    }
    return result;
}

Scalar Scalar::operator-() const {
    if (const auto* v = std::get_if<ExactComplex>(&value_)) return exact(-v->re, -v->im);
    return approx(-std::get<Complex>(value_));
}

Scalar& Scalar::operator+=(const Scalar& rhs) {
    require_same_backend(rhs);
    if (auto* v = std::get_if<ExactComplex>(&value_)) {
        const auto& r = std::get<ExactComplex>(rhs.value_);
        v->re += r.re;
        v->im += r.im;
    } else {
        std::get<Complex>(value_) += std::get<Complex>(rhs.value_);
    }
    return *this;
}

Scalar& Scalar::operator-=(const Scalar& rhs) {
    require_same_backend(rhs);
    if (auto* v = std::get_if<ExactComplex>(&value_)) {
        const auto& r = std::get<ExactComplex>(rhs.value_);
        v->re -= r.re;
        v->im -= r.im;
    } else {
        std::get<Complex>(value_) -= std::get<Complex>(rhs.value_);
    }
    return *this;
}

Scalar& Scalar::operator*=(const Scalar& rhs) {
    require_same_backend(rhs);
    if (auto* v = std::get_if<ExactComplex>(&value_)) {
        const auto& r = std::get<ExactComplex>(rhs.value_);
        if (sgn(v->im) == 0 && sgn(r.im) == 0) {
            v->re *= r.re;
            return *this;
        }
        Rational re = v->re * r.re - v->im * r.im;
        Rational im = v->re * r.im + v->im * r.re;
        v->re = std::move(re);
        v->im = std::move(im);
    } else {
        std::get<Complex>(value_) *= std::get<Complex>(rhs.value_);
    }
    return *this;
}

Scalar& Scalar::operator/=(const Scalar& rhs) {
    require_same_backend(rhs);
    if (auto* v = std::get_if<ExactComplex>(&value_)) {
        const auto& r = std::get<ExactComplex>(rhs.value_);
        if (sgn(r.re) == 0 && sgn(r.im) == 0) fail(ErrorCode::DivisionByZero, "exact division by zero");
        if (sgn(v->im) == 0 && sgn(r.im) == 0) {
            v->re /= r.re;
            return *this;
        }
        const Rational norm = r.re * r.re + r.im * r.im;
        Rational re = (v->re * r.re + v->im * r.im) / norm;
        Rational im = (v->im * r.re - v->re * r.im) / norm;
        v->re = std::move(re);
        v->im = std::move(im);
    } else {
        const Complex d = std::get<Complex>(rhs.value_);
        if (std::abs(d) <= g_tolerance) fail(ErrorCode::DivisionByZero, "approximate division by a value below tolerance");
        std::get<Complex>(value_) /= d;
    }
    return *this;
}

bool operator==(const Scalar& a, const Scalar& b) { return approx_equal(a, b); }

std::string Scalar::to_string() const {
    if (const auto* v = std::get_if<ExactComplex>(&value_)) {
        if (sgn(v->im) == 0) return v->re.get_str();
        return "(" + v->re.get_str() + ")+(" + v->im.get_str() + ")i";
    }
    const Complex c = std::get<Complex>(value_);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g%+.17gi", c.real(), c.imag());
    return buf;
}

Scalar scalar_arith(const Scalar& a, const Scalar& b, ArithOp op) {
    switch (op) {
        case ArithOp::Add: return a + b;
        case ArithOp::Sub: return a - b;
        case ArithOp::Mul: return a * b;
        case ArithOp::Div: return a / b;
    }
    fail(ErrorCode::InvalidArgument, "unknown arithmetic operation");
}

bool approx_equal(const Scalar& a, const Scalar& b) {
    if (a.backend() != b.backend()) fail(ErrorCode::MixedBackend, "comparison across backends");
    if (a.is_exact()) {
        const auto& x = a.exact_value();
        const auto& y = b.exact_value();
        return x.re == y.re && x.im == y.im;
    }
    const Complex x = a.to_complex();
    const Complex y = b.to_complex();
    return std::abs(x - y) <= g_tolerance * std::max({1.0, std::abs(x), std::abs(y)});
}

bool lex_less(const Scalar& a, const Scalar& b) {
    if (a.is_exact() && b.is_exact()) {
        const auto& x = a.exact_value();
        const auto& y = b.exact_value();
        if (x.re != y.re) return x.re < y.re;
        return x.im < y.im;
    }
    const Complex x = a.to_complex();
    const Complex y = b.to_complex();
    const double scale = g_tolerance * std::max({1.0, std::abs(x), std::abs(y)});
    if (std::abs(x.real() - y.real()) > scale) return x.real() < y.real();
    if (std::abs(x.imag() - y.imag()) > scale) return x.imag() < y.imag();
    return false;
}

Scalar factorial(long n, Backend backend) {
    Scalar result = Scalar::from_int(1, backend);
    for (long k = 2; k <= n; ++k) result *= Scalar::from_int(k, backend);
    return result;
}

Scalar binomial(long n, long k, Backend backend) {
    if (k < 0 || k > n) return Scalar::from_int(0, backend);
    Scalar result = Scalar::from_int(1, backend);
    for (long i = 1; i <= k; ++i) {
        result *= Scalar::from_int(n - k + i, backend);
        result /= Scalar::from_int(i, backend);
    }
    return result;
}

}  // namespace bispectral
