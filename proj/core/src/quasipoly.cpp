#include "bispectral/quasipoly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bispectral {

QuasiPolynomial QuasiPolynomial::term(RationalFunction coeff, const Scalar& lambda, char variable) {
    QuasiPolynomial f(lambda.backend(), variable);
    f.add_term(lambda, coeff);
    return f;
}

QuasiPolynomial QuasiPolynomial::exponential(const Scalar& lambda, char variable) {
    return term(RationalFunction::constant(lambda.one()), lambda, variable);
}

const Scalar& QuasiPolynomial::exponent() const {
    if (terms_.size() != 1) fail(ErrorCode::InvalidArgument, "quasi-polynomial does not have a single exponent");
    return terms_.front().lambda;
}

const RationalFunction& QuasiPolynomial::coefficient() const {
    if (terms_.size() != 1) fail(ErrorCode::InvalidArgument, "quasi-polynomial does not have a single exponent");
    return terms_.front().coeff;
}

RationalFunction QuasiPolynomial::coefficient_of(const Scalar& lambda) const {
    for (const auto& t : terms_)
        if (t.lambda == lambda) return t.coeff;
    return RationalFunction(backend_);
}

void QuasiPolynomial::add_term(const Scalar& lambda, const RationalFunction& coeff) {
    if (coeff.is_zero()) return;
    if (lambda.backend() != backend_ || coeff.backend() != backend_) {
        if (!terms_.empty()) fail(ErrorCode::MixedBackend, "quasi-polynomial terms from different backends");
        backend_ = lambda.backend();
    }
    for (auto it = terms_.begin(); it != terms_.end(); ++it) {
        if (it->lambda == lambda) {
            it->coeff += coeff;
            if (it->coeff.is_zero()) terms_.erase(it);
            return;
        }
    }
    auto pos = std::find_if(terms_.begin(), terms_.end(), [&](const QpTerm& t) { return lex_less(lambda, t.lambda); });
    terms_.insert(pos, QpTerm{lambda, coeff});
}

QuasiPolynomial QuasiPolynomial::with_variable(char variable) const {
    QuasiPolynomial f = *this;
    f.variable_ = variable;
    return f;
}

QuasiPolynomial QuasiPolynomial::to_backend(Backend target) const {
    QuasiPolynomial f(target, variable_);
    for (const auto& t : terms_) f.add_term(t.lambda.to_backend(target), t.coeff.to_backend(target));
    return f;
}

Complex QuasiPolynomial::eval(Complex x) const {
    Complex acc = 0.0;
    for (const auto& t : terms_) acc += t.coeff.eval(x) * std::exp(t.lambda.to_complex() * x);
    return acc;
}

QuasiPolynomial QuasiPolynomial::operator-() const {
    QuasiPolynomial f = *this;
    for (auto& t : f.terms_) t.coeff = -t.coeff;
    return f;
}

QuasiPolynomial& QuasiPolynomial::operator+=(const QuasiPolynomial& rhs) {
    for (const auto& t : rhs.terms_) add_term(t.lambda, t.coeff);
    return *this;
}

QuasiPolynomial& QuasiPolynomial::operator-=(const QuasiPolynomial& rhs) { return *this += -rhs; }

QuasiPolynomial& QuasiPolynomial::operator*=(const QuasiPolynomial& rhs) {
    QuasiPolynomial out(is_zero() ? rhs.backend_ : backend_, variable_);
    for (const auto& a : terms_)
        for (const auto& b : rhs.terms_) out.add_term(a.lambda + b.lambda, a.coeff * b.coeff);
    return *this = out;
}

QuasiPolynomial& QuasiPolynomial::operator*=(const RationalFunction& rhs) {
    QuasiPolynomial out(backend_, variable_);
    for (const auto& t : terms_) out.add_term(t.lambda, t.coeff * rhs);
    return *this = out;
}

QuasiPolynomial& QuasiPolynomial::operator*=(const Scalar& rhs) {
    QuasiPolynomial out(backend_, variable_);
    for (const auto& t : terms_) out.add_term(t.lambda, t.coeff * rhs);
    return *this = out;
}

bool operator==(const QuasiPolynomial& a, const QuasiPolynomial& b) {
    for (const auto& t : a.terms_)
        if (!(t.coeff == b.coefficient_of(t.lambda))) return false;
    for (const auto& t : b.terms_)
        if (!(t.coeff == a.coefficient_of(t.lambda))) return false;
    return true;
}

std::string QuasiPolynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    for (size_t k = 0; k < terms_.size(); ++k) {
        if (k) os << " + ";
        os << "[" << terms_[k].coeff.to_string(variable_) << "]*e^(" << terms_[k].lambda.to_string() << "*" << variable_
           << ")";
    }
    return os.str();
}

RationalFunction shifted_derivative(const RationalFunction& r, const Scalar& lambda) {
    return r.derivative() + r * lambda;
}

QuasiPolynomial qp_derivative(const QuasiPolynomial& f, int k) {
    QuasiPolynomial out = f;
    for (int step = 0; step < k; ++step) {
        QuasiPolynomial next(out.backend(), out.variable());
        for (const auto& t : out.terms()) next += QuasiPolynomial::term(shifted_derivative(t.coeff, t.lambda), t.lambda, out.variable());
        out = next;
    }
    return out;
}

bool LaurentSeries::is_zero() const {
    return std::all_of(coeffs.begin(), coeffs.end(), [](const Scalar& c) { return c.is_zero(); });
}

Scalar LaurentSeries::coeff_at(int k) const {
    const int idx = k - order;
    if (idx < 0 || idx >= static_cast<int>(coeffs.size())) return point.zero();
    return coeffs[static_cast<size_t>(idx)];
}

Complex LaurentSeries::unit_value() const { return std::exp(unit_exponent.to_complex() * point.to_complex()); }

LaurentSeries LaurentSeries::derivative() const {
    LaurentSeries out{point, order - 1, {}, unit_exponent};
    for (size_t k = 0; k < coeffs.size(); ++k) out.coeffs.push_back(coeffs[k] * Scalar::from_int(order + static_cast<long>(k), point.backend()));
    return out;
}

LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b) {
    const size_t len = std::min(a.coeffs.size(), b.coeffs.size());
    LaurentSeries out{a.point, a.order + b.order, std::vector<Scalar>(len, a.point.zero()), a.unit_exponent + b.unit_exponent};
    for (size_t i = 0; i < len; ++i)
        for (size_t j = 0; i + j < len; ++j) out.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
    return out;
}

std::vector<Scalar> series_quotient(const std::vector<Scalar>& num, const std::vector<Scalar>& den, int count) {
    if (den.empty() || den.front().is_zero()) fail(ErrorCode::DivisionByZero, "series quotient with vanishing constant term");
    const Scalar zero = den.front().zero();
    std::vector<Scalar> q;
    q.reserve(static_cast<size_t>(std::max(count, 0)));
    for (int k = 0; k < count; ++k) {
        Scalar acc = k < static_cast<int>(num.size()) ? num[static_cast<size_t>(k)] : zero;
        for (int j = 1; j <= k && j < static_cast<int>(den.size()); ++j) acc -= den[static_cast<size_t>(j)] * q[static_cast<size_t>(k - j)];
        q.push_back(acc / den.front());
    }
    return q;
}

namespace {

// Taylor coefficients at z0 together with the number of leading zeros.
std::pair<std::vector<Scalar>, int> taylor_with_order(const Polynomial& p, const Scalar& z0) {
    std::vector<Scalar> t = p.taylor_at(z0);
    if (p.backend() == Backend::Exact) {
        int k = 0;
        while (k < static_cast<int>(t.size()) && t[static_cast<size_t>(k)].is_zero()) ++k;
        return {std::move(t), k};
    }
    double scale = 0.0;
    for (const auto& c : t) scale = std::max(scale, c.abs());
    // Relative zero test, so that roots known to ~1e-12 are still resolved.
    const double cut = tolerance() * std::max(scale, 1e-300);
    int k = 0;
    while (k < static_cast<int>(t.size()) && t[static_cast<size_t>(k)].abs() <= cut) ++k;
    return {std::move(t), k};
}

}  // namespace

int order_at(const Polynomial& p, const Scalar& z0) {
    if (p.is_zero()) fail(ErrorCode::InvalidArgument, "order of the zero polynomial");
    return taylor_with_order(p, z0).second;
}

int rational_order_at(const RationalFunction& r, const Scalar& z0) {
    return order_at(r.num(), z0) - order_at(r.den(), z0);
}

std::vector<Scalar> laurent_window(const QuasiPolynomial& f, const Scalar& z0, int lo, int count) {
    const Backend b = z0.backend();
    std::vector<Scalar> out(static_cast<size_t>(std::max(count, 0)), Scalar::from_int(0, b));
    if (f.is_zero() || count <= 0) return out;
    if (b == Backend::Exact && f.terms().size() > 1 && !z0.is_zero())
        fail(ErrorCode::InvalidArgument, "exact expansion of a multi-exponent quasi-polynomial away from 0");
    for (const auto& term : f.terms()) {
        auto [den_t, d] = taylor_with_order(term.coeff.den(), z0);
        std::vector<Scalar> den_tail(den_t.begin() + d, den_t.end());
        const std::vector<Scalar> num_t = term.coeff.num().taylor_at(z0);
        // Order k of the result is the coefficient of s^(k+d) in (num/den_tail) * e^{lambda s}.
        const int need = lo + count + d;
        if (need <= 0) continue;
        std::vector<Scalar> q = series_quotient(num_t, den_tail, need);
        std::vector<Scalar> e(static_cast<size_t>(need), Scalar::from_int(0, b));
        Scalar power = Scalar::from_int(1, b);
        for (int k = 0; k < need; ++k) {
            e[static_cast<size_t>(k)] = power;
            power = power * term.lambda / Scalar::from_int(k + 1, b);
        }
        Scalar unit = Scalar::from_int(1, b);
        if (b == Backend::Approx) unit = Scalar::approx(std::exp(term.lambda.to_complex() * z0.to_complex()));
        for (int k = 0; k < count; ++k) {
            const int idx = lo + k + d;
            if (idx < 0) continue;
            Scalar acc = Scalar::from_int(0, b);
            for (int j = 0; j <= idx; ++j) acc += q[static_cast<size_t>(j)] * e[static_cast<size_t>(idx - j)];
            out[static_cast<size_t>(k)] += acc * unit;
        }
    }
    return out;
}

namespace {

int lowest_possible_order(const QuasiPolynomial& f, const Scalar& z0) {
    int lo = 0;
    for (const auto& t : f.terms()) lo = std::min(lo, -order_at(t.coeff.den(), z0));
    return lo;
}

int first_nonzero(const std::vector<Scalar>& v) {
    for (size_t k = 0; k < v.size(); ++k)
        if (!v[k].is_zero()) return static_cast<int>(k);
    return -1;
}

}  // namespace

int qp_order_at(const QuasiPolynomial& f, const Scalar& z0) {
    if (f.is_zero()) fail(ErrorCode::InvalidArgument, "order of the zero function");
    const int lo = lowest_possible_order(f, z0);
    int degree_bound = 0;
    for (const auto& t : f.terms()) degree_bound = std::max(degree_bound, t.coeff.num().degree() + 1);
    for (int count = degree_bound + 2 - lo; count <= 4096; count *= 2) {
        const int k = first_nonzero(laurent_window(f, z0, lo, count));
        if (k >= 0) return lo + k;
    }
    fail(ErrorCode::InsufficientPrecision, "could not resolve the leading order of the expansion");
}

LaurentSeries qp_expand_at(const QuasiPolynomial& f, const Scalar& z0, int K) {
    const Backend b = z0.backend();
    Scalar unit = Scalar::from_int(0, b);
    if (b == Backend::Exact && f.terms().size() == 1) unit = f.terms().front().lambda;
    if (f.is_zero()) return {z0, 0, std::vector<Scalar>(static_cast<size_t>(K + 1), Scalar::from_int(0, b)), unit};
    const int order = qp_order_at(f, z0);
    return {z0, order, laurent_window(f, z0, order, K + 1), unit};
}

}  // namespace bispectral
