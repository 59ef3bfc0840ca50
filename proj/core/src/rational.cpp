#include "bispectral/rational.hpp"

namespace bispectral {

RationalFunction::RationalFunction(Backend backend)
    : num_(backend), den_(Polynomial::constant(Scalar::from_int(1, backend))) {}

RationalFunction::RationalFunction(Polynomial numerator)
    : num_(std::move(numerator)), den_(Polynomial::constant(Scalar::from_int(1, num_.backend()))) {}

RationalFunction::RationalFunction(Polynomial numerator, Polynomial denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
    if (den_.is_zero()) fail(ErrorCode::DivisionByZero, "rational function with zero denominator");
    if (!num_.is_zero() && num_.backend() != den_.backend())
        fail(ErrorCode::MixedBackend, "numerator and denominator from different backends");
    normalize();
}

void RationalFunction::normalize() {
    if (num_.is_zero()) {
        den_ = Polynomial::constant(Scalar::from_int(1, den_.backend()));
        num_ = Polynomial(den_.backend());
        return;
    }
    if (den_.backend() == Backend::Exact && den_.degree() > 0) {
        const Polynomial g = poly_gcd(num_, den_);
        if (g.degree() > 0) {
            num_ = exact_quotient(num_, g);
            den_ = exact_quotient(den_, g);
        }
    }
    const Scalar lead = den_.leading();
    if (!(lead == lead.one())) {
        const Scalar inv = lead.one() / lead;
        num_ *= inv;
        den_ = den_.monic();
    }
}

Polynomial RationalFunction::to_polynomial() const {
    if (den_.degree() == 0) return num_;
    try {
        return exact_quotient(num_, den_);
    } catch (const Error&) {
        fail(ErrorCode::NonPolynomialCoefficients, "rational function " + to_string() + " is not a polynomial");
    }
}

Scalar RationalFunction::operator()(const Scalar& x) const {
    const Scalar d = den_(x);
    if (d.is_zero()) fail(ErrorCode::PoleHit, "rational function evaluated at a pole");
    return num_(x) / d;
}

Complex RationalFunction::eval(Complex x) const {
    const Complex d = den_.eval(x);
    if (d == 0.0) fail(ErrorCode::PoleHit, "rational function evaluated at a pole");
    return num_.eval(x) / d;
}

RationalFunction RationalFunction::derivative() const {
    if (den_.degree() == 0) return RationalFunction(num_.derivative(), den_);
    return RationalFunction(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
}

RationalFunction RationalFunction::to_backend(Backend target) const {
    return RationalFunction(num_.to_backend(target), den_.to_backend(target));
}

RationalFunction RationalFunction::operator-() const {
    RationalFunction r = *this;
    r.num_ = -r.num_;
    return r;
}

RationalFunction& RationalFunction::operator+=(const RationalFunction& rhs) {
    if (rhs.is_zero()) return *this;
    if (is_zero()) return *this = rhs;
    if (den_ == rhs.den_) {
        *this = RationalFunction(num_ + rhs.num_, den_);
    } else {
        *this = RationalFunction(num_ * rhs.den_ + rhs.num_ * den_, den_ * rhs.den_);
    }
    return *this;
}

RationalFunction& RationalFunction::operator-=(const RationalFunction& rhs) { return *this += -rhs; }

RationalFunction& RationalFunction::operator*=(const RationalFunction& rhs) {
    if (is_zero() || rhs.is_zero()) {
        const Backend b = is_zero() ? rhs.backend() : backend();
        return *this = RationalFunction(b);
    }
    if (den_.degree() == 0 && rhs.den_.degree() == 0) {
        num_ *= rhs.num_;
        return *this;
    }
    *this = RationalFunction(num_ * rhs.num_, den_ * rhs.den_);
    return *this;
}

RationalFunction& RationalFunction::operator/=(const RationalFunction& rhs) {
    if (rhs.is_zero()) fail(ErrorCode::DivisionByZero, "division by the zero rational function");
    *this = RationalFunction(num_ * rhs.den_, den_ * rhs.num_);
    return *this;
}

RationalFunction& RationalFunction::operator*=(const Scalar& rhs) {
    num_ *= rhs;
    if (num_.is_zero()) normalize();
    return *this;
}

bool operator==(const RationalFunction& a, const RationalFunction& b) {
    return a.num_ * b.den_ == b.num_ * a.den_;
}

std::string RationalFunction::to_string(char var) const {
    if (den_.degree() == 0) return num_.to_string(var);
    return "(" + num_.to_string(var) + ")/(" + den_.to_string(var) + ")";
}

RationalFunction log_derivative(const Polynomial& p) { return RationalFunction(p.derivative(), p); }

}  // namespace bispectral
