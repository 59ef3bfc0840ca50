#pragma once

#include <array>
#include <vector>

#include "bispectral/spaces.hpp"

namespace bispectral {

/// Linear differential operator sum_j c_j(x) d^j with polynomial coefficients,
/// stored in x-left normal order: the table entry A_ij is the coefficient of
/// x^i d^j.
class DiffOperator {
public:
    struct Entry {
        int i;
        int j;
        Scalar coeff;
    };

    explicit DiffOperator(Backend backend = Backend::Exact, char variable = 'x')
        : backend_(backend), variable_(variable) {}
    /// coeffs[j] multiplies d^j.
    DiffOperator(std::vector<Polynomial> coeffs, char variable = 'x', Backend backend = Backend::Exact);

    static DiffOperator from_table(const std::vector<Entry>& entries, Backend backend, char variable = 'x');
    static DiffOperator multiplication(const Polynomial& p, char variable = 'x');
    /// The derivation d/dvariable.
    static DiffOperator derivation(Backend backend, char variable = 'x');

    Backend backend() const noexcept { return backend_; }
    char variable() const noexcept { return variable_; }
    bool is_zero() const noexcept { return coeffs_.empty(); }
    /// Highest power of d with a nonzero coefficient; -1 for the zero operator.
    int order() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    /// Highest power of x in the table.
    int x_degree() const;

    const std::vector<Polynomial>& coeffs() const noexcept { return coeffs_; }
    /// Coefficient of d^j (zero outside the range).
    Polynomial coeff(int j) const;
    /// A_k(x), the coefficient of d^(order - k).
    Polynomial leading_view(int k) const { return coeff(order() - k); }
    Scalar entry(int i, int j) const;
    /// Nonzero entries sorted by (i, j).
    std::vector<Entry> table() const;
    /// B_k as a polynomial in d: D = sum_k x^(x_degree - k) B_k(d).
    Polynomial normal_form(int k) const;

    DiffOperator with_variable(char variable) const;
    DiffOperator to_backend(Backend target) const;

    DiffOperator operator-() const;
    DiffOperator& operator+=(const DiffOperator& rhs);
    DiffOperator& operator-=(const DiffOperator& rhs);
    DiffOperator& operator*=(const Scalar& s);

    friend DiffOperator operator+(DiffOperator a, const DiffOperator& b) { return a += b; }
    friend DiffOperator operator-(DiffOperator a, const DiffOperator& b) { return a -= b; }
    friend DiffOperator operator*(DiffOperator a, const Scalar& s) { return a *= s; }
    /// Composition a o b.
    friend DiffOperator operator*(const DiffOperator& a, const DiffOperator& b);

    /// Exact table equality (tolerance equality on the approximate backend).
    friend bool operator==(const DiffOperator& a, const DiffOperator& b);

    std::string to_string() const;

private:
    void trim();

    std::vector<Polynomial> coeffs_;
    Backend backend_;
    char variable_;
};

DiffOperator compose(const DiffOperator& a, const DiffOperator& b);
QuasiPolynomial apply(const DiffOperator& op, const QuasiPolynomial& f);

/// sum_j (-d)^j o c_j(x).
DiffOperator formal_conjugate(const DiffOperator& op);
/// A'_ji = A_ij; x becomes u and u becomes x.
DiffOperator bispectral_swap(const DiffOperator& op);
/// Scales the operator so that its highest entry in (i + j, then i) order is 1.
DiffOperator normalized(const DiffOperator& op);
bool equal_up_to_scalar(const DiffOperator& a, const DiffOperator& b);

/// d^N + sum_{i>=1} bar_i(x) d^(N-i) with rational coefficients.
class MonicOperator {
public:
    MonicOperator(std::vector<RationalFunction> bar, char variable = 'x');

    int order() const noexcept { return static_cast<int>(bar_.size()) - 1; }
    char variable() const noexcept { return variable_; }
    Backend backend() const noexcept { return bar_.front().backend(); }
    /// bar(0) = 1; bar(i) multiplies d^(N-i).
    const RationalFunction& bar(int i) const { return bar_.at(static_cast<size_t>(i)); }
    const std::vector<RationalFunction>& bars() const noexcept { return bar_; }

    QuasiPolynomial apply(const QuasiPolynomial& f) const;
    /// The polynomial operator p * this; throws NotRegularizable if a
    /// coefficient keeps a pole.
    DiffOperator times(const Polynomial& p) const;

    std::string to_string() const;

private:
    std::vector<RationalFunction> bar_;
    char variable_;
};

/// Divides by the leading coefficient.
MonicOperator to_monic(const DiffOperator& op);

/// Relative residual of op applied to f, sampled at a few points away from poles.
double annihilation_residual(const MonicOperator& op, const QuasiPolynomial& f);

/// The unique monic operator of order N annihilating the space; annihilation
/// is verified before returning.
MonicOperator monic_fundamental(const FunctionSpace& space);

/// Multiplies by prod (x - z_a)^{M_a} with M_a read from the singular data.
DiffOperator regularize(const MonicOperator& op, const std::vector<ExponentSequence>& singular);
/// Exact: multiplies by the least common multiple of the denominators.
/// Approximate: uses the computed singular points of the space.
DiffOperator regularize(const MonicOperator& op, const FunctionSpace& space);

/// prod_a (x - z_a) times the monic fundamental operator.
DiffOperator special_fundamental(const SpecialSpace& special);

/// Throws NonAdmissibleTuple if some y_i has a multiple root, adjacent
/// entries share a root, or y_1 vanishes at some z_a.
void check_tuple_admissible(const std::vector<Polynomial>& y, const std::vector<Scalar>& z);

/// Ordered product of the first-order factors d - ln'(y_{i-1} e^{lambda_i x} / y_i),
/// with y_0 = prod (x - z_a)^{m_a} and y_N = 1. On the approximate backend the
/// tuple must be critical, because the coefficients are recovered as
/// polynomials over prod (x - z_a).
MonicOperator factorized_from_tuple(const std::vector<Polynomial>& y, const std::vector<Scalar>& lambda,
                                    const std::vector<Scalar>& z, const std::vector<int>& m);

/// Polynomials p of degree <= max_degree with op(p e^{lambda x}) = 0.
std::vector<Polynomial> kernel_polynomials(const DiffOperator& op, const Scalar& lambda, int max_degree);

/// Degree of the kernel element with exponent lambda predicted by the normal
/// form: -B_1(lambda) / B_0'(lambda) (meaningful when lambda is a simple root of B_0).
Scalar predicted_degree(const DiffOperator& op, const Scalar& lambda);

struct PhiMatrix {
    std::array<std::array<Scalar, 2>, 2> phi;
    double residual = 0.0;
};

/// phi_ij for an N = M = 2 special fundamental operator written as
/// (x-z1)(x-z2)(d-l1)(d-l2) + sum phi_ij (x - z_i)(d - l_j).
PhiMatrix extract_phi(const DiffOperator& op, const std::array<Scalar, 2>& lambda, const std::array<Scalar, 2>& z);

}  // namespace bispectral
