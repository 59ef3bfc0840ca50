#pragma once

#include <string>
#include <vector>

#include "bispectral/rational.hpp"

namespace bispectral {

struct QpTerm {
    Scalar lambda;
    RationalFunction coeff;
};

/// Finite sum of r_k(x) e^{lambda_k x}. Terms are kept with distinct exponents,
/// nonzero coefficients, sorted by (re, im) of the exponent.
class QuasiPolynomial {
public:
    explicit QuasiPolynomial(Backend backend = Backend::Exact, char variable = 'x')
        : backend_(backend), variable_(variable) {}

    static QuasiPolynomial term(RationalFunction coeff, const Scalar& lambda, char variable = 'x');
    static QuasiPolynomial exponential(const Scalar& lambda, char variable = 'x');

    Backend backend() const noexcept { return backend_; }
    char variable() const noexcept { return variable_; }
    const std::vector<QpTerm>& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    bool is_single_exponent() const noexcept { return terms_.size() == 1; }
    /// Exponent of a single-term function; throws InvalidArgument otherwise.
    const Scalar& exponent() const;
    /// Coefficient of a single-term function.
    const RationalFunction& coefficient() const;
    /// Coefficient of e^{lambda x}, zero if absent.
    RationalFunction coefficient_of(const Scalar& lambda) const;

    QuasiPolynomial with_variable(char variable) const;
    QuasiPolynomial to_backend(Backend target) const;

    Complex eval(Complex x) const;

    QuasiPolynomial operator-() const;
    QuasiPolynomial& operator+=(const QuasiPolynomial& rhs);
    QuasiPolynomial& operator-=(const QuasiPolynomial& rhs);
    QuasiPolynomial& operator*=(const QuasiPolynomial& rhs);
    QuasiPolynomial& operator*=(const RationalFunction& rhs);
    QuasiPolynomial& operator*=(const Scalar& rhs);

    friend QuasiPolynomial operator+(QuasiPolynomial a, const QuasiPolynomial& b) { return a += b; }
    friend QuasiPolynomial operator-(QuasiPolynomial a, const QuasiPolynomial& b) { return a -= b; }
    friend QuasiPolynomial operator*(QuasiPolynomial a, const QuasiPolynomial& b) { return a *= b; }
    friend QuasiPolynomial operator*(QuasiPolynomial a, const RationalFunction& b) { return a *= b; }
    friend QuasiPolynomial operator*(QuasiPolynomial a, const Scalar& b) { return a *= b; }

    friend bool operator==(const QuasiPolynomial& a, const QuasiPolynomial& b);

    std::string to_string() const;

private:
    void add_term(const Scalar& lambda, const RationalFunction& coeff);

    std::vector<QpTerm> terms_;
    Backend backend_;
    char variable_;
};

/// k-fold derivative: d/dx (r e^{lambda x}) = (r' + lambda r) e^{lambda x}.
QuasiPolynomial qp_derivative(const QuasiPolynomial& f, int k = 1);

/// Derivative of r(x) e^{lambda x} divided by e^{lambda x}: r' + lambda r.
RationalFunction shifted_derivative(const RationalFunction& r, const Scalar& lambda);

/// Truncated Laurent expansion sum_k coeffs[k] (x - point)^(order + k).
/// On the exact backend the series is implicitly multiplied by the unit
/// e^{unit_exponent * point}, which is never expanded numerically.
struct LaurentSeries {
    Scalar point;
    int order = 0;
    std::vector<Scalar> coeffs;
    Scalar unit_exponent;

    bool is_zero() const;
    Scalar coeff_at(int k) const;
    /// Highest order covered by the window.
    int last_order() const { return order + static_cast<int>(coeffs.size()) - 1; }
    /// Numeric value of the unit factor (1 on the approximate backend).
    Complex unit_value() const;
    LaurentSeries derivative() const;
};

/// Product through the common window; the units multiply.
LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b);

/// Power-series coefficients of p(x)/q(x) at z0 for orders 0..count-1; q(z0) != 0.
std::vector<Scalar> series_quotient(const std::vector<Scalar>& num, const std::vector<Scalar>& den, int count);

/// Order of vanishing of p at z0 (exact: exact multiplicity; approx: Taylor
/// coefficients below tolerance relative to the largest count as zero).
int order_at(const Polynomial& p, const Scalar& z0);

/// Coefficients of f at z0 for orders lo..lo+count-1, without locating the
/// leading order. Exact units are dropped, so f must be single-exponent (or z0 = 0).
std::vector<Scalar> laurent_window(const QuasiPolynomial& f, const Scalar& z0, int lo, int count);

/// Order of f at z0 (pole order negative) for a single rational function.
int rational_order_at(const RationalFunction& r, const Scalar& z0);

/// Laurent expansion of f at z0 with K+1 coefficients starting at its order.
LaurentSeries qp_expand_at(const QuasiPolynomial& f, const Scalar& z0, int K);

/// Order of f at z0: the smallest order with a nonzero coefficient.
int qp_order_at(const QuasiPolynomial& f, const Scalar& z0);

}  // namespace bispectral
