#include "bispectral/diffop.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bispectral/linalg.hpp"

namespace bispectral {

namespace {

Polynomial one_poly(Backend b) { return Polynomial::constant(Scalar::from_int(1, b)); }

char swapped_variable(char v) {
    if (v == 'x') return 'u';
    if (v == 'u') return 'x';
    return v;
}

// Singular values below this fraction of the largest span the numeric kernel.
constexpr double kKernelThreshold = 1e-7;
// Relative misfit allowed when recovering polynomial coefficients from samples.
constexpr double kFitThreshold = 1e-8;

}  // namespace

DiffOperator::DiffOperator(std::vector<Polynomial> coeffs, char variable, Backend backend)
    : coeffs_(std::move(coeffs)), backend_(backend), variable_(variable) {
    for (const auto& c : coeffs_)
        if (!c.is_zero()) {
            backend_ = c.backend();
            break;
        }
    for (const auto& c : coeffs_)
        if (!c.is_zero() && c.backend() != backend_) fail(ErrorCode::MixedBackend, "operator coefficients from different backends");
    trim();
}

void DiffOperator::trim() {
    while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
}

DiffOperator DiffOperator::from_table(const std::vector<Entry>& entries, Backend backend, char variable) {
    std::vector<Polynomial> coeffs;
    for (const auto& e : entries) {
        if (e.i < 0 || e.j < 0) fail(ErrorCode::InvalidArgument, "negative index in operator table");
        if (e.coeff.backend() != backend) fail(ErrorCode::MixedBackend, "operator table entry from another backend");
        if (static_cast<int>(coeffs.size()) <= e.j) coeffs.resize(static_cast<size_t>(e.j) + 1, Polynomial(backend));
        coeffs[static_cast<size_t>(e.j)] += Polynomial::monomial(e.coeff, e.i);
    }
    return DiffOperator(std::move(coeffs), variable, backend);
}

DiffOperator DiffOperator::multiplication(const Polynomial& p, char variable) {
    return DiffOperator(std::vector<Polynomial>{p}, variable, p.backend());
}

DiffOperator DiffOperator::derivation(Backend backend, char variable) {
    return DiffOperator({Polynomial(backend), one_poly(backend)}, variable, backend);
}

int DiffOperator::x_degree() const {
    int d = -1;
    for (const auto& c : coeffs_) d = std::max(d, c.degree());
    return d;
}

Polynomial DiffOperator::coeff(int j) const {
    if (j < 0 || j > order()) return Polynomial(backend_);
    return coeffs_[static_cast<size_t>(j)];
}

Scalar DiffOperator::entry(int i, int j) const { return coeff(j).coeff(i); }

std::vector<DiffOperator::Entry> DiffOperator::table() const {
    std::vector<Entry> out;
    for (int i = 0; i <= x_degree(); ++i)
        for (int j = 0; j <= order(); ++j) {
            Scalar c = entry(i, j);
            if (!c.is_zero()) out.push_back({i, j, std::move(c)});
        }
    return out;
}

Polynomial DiffOperator::normal_form(int k) const {
    const int row = x_degree() - k;
    std::vector<Scalar> c;
    for (int j = 0; j <= order(); ++j) c.push_back(entry(row, j));
    return Polynomial(std::move(c), backend_);
}

DiffOperator DiffOperator::with_variable(char variable) const {
    DiffOperator d = *this;
    d.variable_ = variable;
    return d;
}

DiffOperator DiffOperator::to_backend(Backend target) const {
    std::vector<Polynomial> c;
    for (const auto& p : coeffs_) c.push_back(p.to_backend(target));
    return DiffOperator(std::move(c), variable_, target);
}

DiffOperator DiffOperator::operator-() const {
    DiffOperator d = *this;
    for (auto& c : d.coeffs_) c = -c;
    return d;
}

DiffOperator& DiffOperator::operator+=(const DiffOperator& rhs) {
    if (rhs.is_zero()) return *this;
    if (is_zero()) backend_ = rhs.backend_;
    if (backend_ != rhs.backend_) fail(ErrorCode::MixedBackend, "adding operators from different backends");
    if (coeffs_.size() < rhs.coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), Polynomial(backend_));
    for (size_t j = 0; j < rhs.coeffs_.size(); ++j) coeffs_[j] += rhs.coeffs_[j];
    trim();
    return *this;
}

DiffOperator& DiffOperator::operator-=(const DiffOperator& rhs) { return *this += -rhs; }

DiffOperator& DiffOperator::operator*=(const Scalar& s) {
    for (auto& c : coeffs_) c *= s;
    trim();
    return *this;
}

DiffOperator operator*(const DiffOperator& a, const DiffOperator& b) {
    const Backend be = a.is_zero() ? b.backend() : a.backend();
    if (a.is_zero() || b.is_zero()) return DiffOperator(be, a.variable());
    if (a.backend() != b.backend()) fail(ErrorCode::MixedBackend, "composing operators from different backends");
    // c_p d^p o d_q d^q = sum_k C(p,k) c_p d_q^(k) d^(p-k+q).
    std::vector<Polynomial> out(static_cast<size_t>(a.order() + b.order() + 1), Polynomial(be));
    for (int p = 0; p <= a.order(); ++p) {
        const Polynomial& cp = a.coeffs()[static_cast<size_t>(p)];
        if (cp.is_zero()) continue;
        for (int q = 0; q <= b.order(); ++q) {
            Polynomial dq = b.coeffs()[static_cast<size_t>(q)];
            for (int k = 0; k <= p && !dq.is_zero(); ++k) {
                out[static_cast<size_t>(p - k + q)] += cp * dq * binomial(p, k, be);
                dq = dq.derivative();
            }
        }
    }
    return DiffOperator(std::move(out), a.variable(), be);
}

bool operator==(const DiffOperator& a, const DiffOperator& b) {
    const int n = std::max(a.order(), b.order());
    for (int j = 0; j <= n; ++j)
        if (!(a.coeff(j) == b.coeff(j))) return false;
    return true;
}

std::string DiffOperator::to_string() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int j = order(); j >= 0; --j) {
        const Polynomial& c = coeffs_[static_cast<size_t>(j)];
        if (c.is_zero()) continue;
        if (!first) os << " + ";
        first = false;
        os << "[" << c.to_string(variable_) << "]";
        if (j >= 1) os << "*d" << variable_;
        if (j >= 2) os << "^" << j;
    }
    return os.str();
}

DiffOperator compose(const DiffOperator& a, const DiffOperator& b) { return a * b; }

QuasiPolynomial apply(const DiffOperator& op, const QuasiPolynomial& f) {
    QuasiPolynomial out(f.backend(), f.variable());
    QuasiPolynomial d = f;
    for (int j = 0; j <= op.order(); ++j) {
        if (!op.coeffs()[static_cast<size_t>(j)].is_zero()) out += d * RationalFunction(op.coeffs()[static_cast<size_t>(j)]);
        if (j < op.order()) d = qp_derivative(d);
    }
    return out;
}

DiffOperator formal_conjugate(const DiffOperator& op) {
    const Backend b = op.backend();
    std::vector<Polynomial> out(static_cast<size_t>(std::max(op.order() + 1, 0)), Polynomial(b));
    // (-d)^j o c = (-1)^j sum_k C(j,k) c^(k) d^(j-k).
    for (int j = 0; j <= op.order(); ++j) {
        Polynomial c = op.coeffs()[static_cast<size_t>(j)];
        const Scalar sign = Scalar::from_int(j % 2 ? -1 : 1, b);
        for (int k = 0; k <= j && !c.is_zero(); ++k) {
            out[static_cast<size_t>(j - k)] += c * (binomial(j, k, b) * sign);
            c = c.derivative();
        }
    }
    return DiffOperator(std::move(out), op.variable(), b);
}

DiffOperator bispectral_swap(const DiffOperator& op) {
    std::vector<DiffOperator::Entry> t = op.table();
    for (auto& e : t) std::swap(e.i, e.j);
    return DiffOperator::from_table(t, op.backend(), swapped_variable(op.variable()));
}

DiffOperator normalized(const DiffOperator& op) {
    const auto t = op.table();
    if (t.empty()) return op;
    const auto* best = &t.front();
    for (const auto& e : t)
        if (e.i + e.j > best->i + best->j || (e.i + e.j == best->i + best->j && e.i > best->i)) best = &e;
    return op * (best->coeff.one() / best->coeff);
}

bool equal_up_to_scalar(const DiffOperator& a, const DiffOperator& b) {
    if (a.is_zero() || b.is_zero()) return a.is_zero() && b.is_zero();
    return normalized(a) == normalized(b);
}

MonicOperator::MonicOperator(std::vector<RationalFunction> bar, char variable)
    : bar_(std::move(bar)), variable_(variable) {
    if (bar_.empty()) fail(ErrorCode::InvalidArgument, "monic operator needs a leading coefficient");
    const RationalFunction& lead = bar_.front();
    if (!(lead.is_polynomial() && lead.num().degree() == 0 && lead.num().coeff(0) == lead.num().coeff(0).one()))
        fail(ErrorCode::InvalidArgument, "leading coefficient of a monic operator must be 1");
}

QuasiPolynomial MonicOperator::apply(const QuasiPolynomial& f) const {
    const int n = order();
    QuasiPolynomial out(f.backend(), f.variable());
    QuasiPolynomial d = f;
    for (int j = 0; j <= n; ++j) {
        const RationalFunction& c = bar_[static_cast<size_t>(n - j)];
        if (!c.is_zero()) out += d * c;
        if (j < n) d = qp_derivative(d);
    }
    return out;
}

DiffOperator MonicOperator::times(const Polynomial& p) const {
    const int n = order();
    std::vector<Polynomial> c(static_cast<size_t>(n + 1), Polynomial(p.backend()));
    for (int i = 0; i <= n; ++i) {
        try {
            c[static_cast<size_t>(n - i)] = (bar_[static_cast<size_t>(i)] * RationalFunction(p)).to_polynomial();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NonPolynomialCoefficients) throw;
            fail(ErrorCode::NotRegularizable, "coefficient " + bar_[static_cast<size_t>(i)].to_string(variable_) +
                                                  " keeps a pole after multiplying by " + p.to_string(variable_));
        }
    }
    return DiffOperator(std::move(c), variable_, p.backend());
}

std::string MonicOperator::to_string() const {
    std::ostringstream os;
    const int n = order();
    os << "d" << variable_ << "^" << n;
    for (int i = 1; i <= n; ++i) {
        if (bar_[static_cast<size_t>(i)].is_zero()) continue;
        os << " + [" << bar_[static_cast<size_t>(i)].to_string(variable_) << "]";
        if (n - i >= 1) os << "*d" << variable_;
        if (n - i >= 2) os << "^" << (n - i);
    }
    return os.str();
}

MonicOperator to_monic(const DiffOperator& op) {
    if (op.is_zero()) fail(ErrorCode::InvalidArgument, "zero operator has no monic form");
    const int n = op.order();
    const RationalFunction lead(op.coeff(n));
    std::vector<RationalFunction> bar;
    for (int i = 0; i <= n; ++i) bar.push_back(RationalFunction(op.coeff(n - i)) / lead);
    return MonicOperator(std::move(bar), op.variable());
}

double annihilation_residual(const MonicOperator& op, const QuasiPolynomial& f) {
    static const Complex samples[] = {{0.37, 0.61}, {-1.13, 0.29}, {0.83, -1.41}, {2.17, 1.73}, {-2.41, -0.67}};
    const int n = op.order();
    std::vector<QuasiPolynomial> ders{f};
    for (int k = 1; k <= n; ++k) ders.push_back(qp_derivative(ders.back()));
    double worst = 0.0;
    for (const Complex x : samples) {
        try {
            Complex sum = 0.0;
            double scale = 0.0;
            for (int i = 0; i <= n; ++i) {
                const Complex term = op.bar(i).eval(x) * ders[static_cast<size_t>(n - i)].eval(x);
                sum += term;
                scale += std::abs(term);
            }
            if (scale > 0.0) worst = std::max(worst, std::abs(sum) / scale);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::PoleHit) throw;
        }
    }
    return worst;
}

MonicOperator monic_fundamental(const FunctionSpace& space) {
    const int n = space.dimension();
    if (n == 0) fail(ErrorCode::DegenerateBasis, "fundamental operator of the zero space");
    const DerivativeTable t = derivative_table(space.basis(), n + 1);
    std::vector<int> cols(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) cols[static_cast<size_t>(j)] = j;
    auto minor_without = [&](int k) {
        std::vector<int> rows;
        for (int r = 0; r <= n; ++r)
            if (r != k) rows.push_back(r);
        return table_minor(t, rows, cols);
    };
    const Polynomial wr = minor_without(n);
    if (wr.is_zero()) fail(ErrorCode::DegenerateBasis, "Wronskian vanishes identically");
    std::vector<RationalFunction> bar;
    for (int i = 0; i <= n; ++i) {
        if (i == 0) {
            bar.push_back(RationalFunction::constant(Scalar::from_int(1, space.backend())));
            continue;
        }
        Polynomial num = minor_without(n - i);
        if (i % 2) num = -num;
        bar.push_back(num.is_zero() ? RationalFunction(space.backend()) : RationalFunction(num, wr));
    }
    MonicOperator op(std::move(bar), space.variable());
    for (const auto& f : space.basis()) {
        if (space.backend() == Backend::Exact) {
            if (!op.apply(f).is_zero()) fail(ErrorCode::DegenerateBasis, "fundamental operator does not annihilate " + f.to_string());
        } else if (annihilation_residual(op, f) > tolerance()) {
            fail(ErrorCode::InsufficientPrecision, "fundamental operator residual above tolerance");
        }
    }
    return op;
}

DiffOperator regularize(const MonicOperator& op, const std::vector<ExponentSequence>& singular) {
    Polynomial a0 = one_poly(op.backend());
    for (const auto& s : singular) a0 *= Polynomial::linear(s.point).pow(s.defect());
    return op.times(a0);
}

DiffOperator regularize(const MonicOperator& op, const FunctionSpace& space) {
    if (op.backend() == Backend::Approx) return regularize(op, singular_points(space));
    Polynomial l = one_poly(Backend::Exact);
    for (const auto& c : op.bars()) {
        if (c.is_zero()) continue;
        l = exact_quotient(l * c.den(), poly_gcd(l, c.den()));
    }
    return op.times(l.monic());
}

DiffOperator special_fundamental(const SpecialSpace& special) {
    Polynomial p = one_poly(special.space.backend());
    for (const auto& z : special.z) p *= Polynomial::linear(z);
    return monic_fundamental(special.space).times(p);
}

namespace {

MonicOperator factorized_exact(const std::vector<Polynomial>& y, const std::vector<Scalar>& lambda,
                               const std::vector<Scalar>& z, const std::vector<int>& m) {
    const int n = static_cast<int>(lambda.size());
    const Backend b = Backend::Exact;
    RationalFunction y0_log(b);
    for (size_t a = 0; a < z.size(); ++a)
        if (m[a]) y0_log += RationalFunction(Polynomial::constant(Scalar::from_int(m[a], b)), Polynomial::linear(z[a]));
    auto log_y = [&](int i) -> RationalFunction {
        if (i == 0) return y0_log;
        if (i == n) return RationalFunction(b);
        return log_derivative(y[static_cast<size_t>(i - 1)]);
    };
    // Left to right: (sum a_k d^k) o (d - g) = sum a_k d^(k+1) - sum_k sum_l C(k,l) a_k g^(l) d^(k-l).
    std::vector<RationalFunction> acc{RationalFunction::constant(Scalar::from_int(1, b))};
    for (int i = 1; i <= n; ++i) {
        const RationalFunction g = RationalFunction::constant(lambda[static_cast<size_t>(i - 1)]) + log_y(i - 1) - log_y(i);
        std::vector<RationalFunction> gd{g};
        for (size_t l = 1; l < acc.size(); ++l) gd.push_back(gd.back().derivative());
        std::vector<RationalFunction> next(acc.size() + 1, RationalFunction(b));
        for (size_t k = 0; k < acc.size(); ++k) {
            next[k + 1] += acc[k];
            for (size_t l = 0; l <= k; ++l)
                next[k - l] -= acc[k] * gd[l] * binomial(static_cast<long>(k), static_cast<long>(l), b);
        }
        acc = std::move(next);
    }
    std::vector<RationalFunction> bar;
    for (int i = 0; i <= n; ++i) bar.push_back(acc[static_cast<size_t>(n - i)]);
    return MonicOperator(std::move(bar));
}

// Approximate construction: compose the factors numerically at sample points on
// a circle enclosing every pole, then recover L * bar_i as polynomials of
// degree <= M with L = prod (x - z_a).
MonicOperator factorized_approx(const std::vector<Polynomial>& y, const std::vector<Scalar>& lambda,
                                const std::vector<Scalar>& z, const std::vector<int>& m) {
    const int n = static_cast<int>(lambda.size());
    const int big_m = static_cast<int>(z.size());
    std::vector<std::vector<Complex>> level_roots(static_cast<size_t>(n + 1));
    for (int i = 1; i < n; ++i) {
        const Polynomial& p = y[static_cast<size_t>(i - 1)];
        if (p.degree() > 0)
            for (const auto& r : poly_roots(p)) level_roots[static_cast<size_t>(i)].push_back(r.value.to_complex());
    }
    Complex centre = 0.0;
    for (const auto& za : z) centre += za.to_complex();
    if (big_m) centre /= static_cast<double>(big_m);
    double radius = 1.0;
    for (const auto& za : z) radius = std::max(radius, std::abs(za.to_complex() - centre));
    for (const auto& lv : level_roots)
        for (const auto& r : lv) radius = std::max(radius, std::abs(r - centre));
    radius = 1.0 + 2.0 * radius;

    const int degree = big_m;
    const int samples = 2 * (degree + 1) + 6;
    auto g_derivative = [&](int i, int l, Complex x) {
        // l-th derivative of lambda_i + ln' y_{i-1} - ln' y_i.
        Complex v = l == 0 ? lambda[static_cast<size_t>(i - 1)].to_complex() : Complex(0.0);
        const double sign = l % 2 ? -1.0 : 1.0;
        double fact = 1.0;
        for (int k = 2; k <= l; ++k) fact *= k;
        auto pole = [&](Complex t) { return sign * fact / std::pow(x - t, l + 1); };
        if (i == 1) {
            for (int a = 0; a < big_m; ++a) v += static_cast<double>(m[static_cast<size_t>(a)]) * pole(z[static_cast<size_t>(a)].to_complex());
        } else {
            for (const auto& t : level_roots[static_cast<size_t>(i - 1)]) v += pole(t);
        }
        for (const auto& t : level_roots[static_cast<size_t>(i)]) v -= pole(t);
        return v;
    };

    Eigen::MatrixXcd design(samples, degree + 1);
    Eigen::MatrixXcd values(samples, n + 1);
    for (int s = 0; s < samples; ++s) {
        const double theta = 2.0 * std::numbers::pi * (s + 0.3) / samples;
        const Complex w = std::polar(1.0, theta);
        const Complex x = centre + radius * w;
        std::vector<Complex> acc{1.0};
        for (int i = 1; i <= n; ++i) {
            std::vector<Complex> gd;
            for (size_t l = 0; l < acc.size(); ++l) gd.push_back(g_derivative(i, static_cast<int>(l), x));
            std::vector<Complex> next(acc.size() + 1, 0.0);
            for (size_t k = 0; k < acc.size(); ++k) {
                next[k + 1] += acc[k];
                double c = 1.0;
                for (size_t l = 0; l <= k; ++l) {
                    next[k - l] -= acc[k] * gd[l] * c;
                    c = c * static_cast<double>(k - l) / static_cast<double>(l + 1);
                }
            }
            acc = std::move(next);
        }
        Complex lval = 1.0;
        for (const auto& za : z) lval *= x - za.to_complex();
        Complex wk = 1.0;
        for (int k = 0; k <= degree; ++k, wk *= w) design(s, k) = wk;
        for (int i = 0; i <= n; ++i) values(s, i) = lval * acc[static_cast<size_t>(n - i)];
    }
    const Eigen::MatrixXcd fit = design.colPivHouseholderQr().solve(values);
    const double misfit = (design * fit - values).cwiseAbs().maxCoeff();
    if (misfit > kFitThreshold * std::max(1.0, values.cwiseAbs().maxCoeff()))
        fail(ErrorCode::NotRegularizable, "factorized operator keeps poles off z (tuple is not critical)");

    Polynomial l = one_poly(Backend::Approx);
    for (const auto& za : z) l *= Polynomial::linear(za);
    const Polynomial shift_unit = Polynomial({Scalar::approx(-centre / radius), Scalar::approx(1.0 / radius)}, Backend::Approx);
    std::vector<RationalFunction> bar{RationalFunction::constant(Scalar::approx(1.0))};
    for (int i = 1; i <= n; ++i) {
        Polynomial p(Backend::Approx);
        Polynomial power = one_poly(Backend::Approx);
        for (int k = 0; k <= degree; ++k) {
            p += power * Scalar::approx(fit(k, i));
            power *= shift_unit;
        }
        bar.push_back(p.is_zero() ? RationalFunction(Backend::Approx) : RationalFunction(p, l));
    }
    return MonicOperator(std::move(bar));
}

}  // namespace

void check_tuple_admissible(const std::vector<Polynomial>& y, const std::vector<Scalar>& z) {
    const Backend b = y.empty() ? Backend::Exact : y.front().backend();
    auto close = [](const Scalar& a, const Scalar& c) { return (a.to_complex() - c.to_complex()) == 0.0 || std::abs(a.to_complex() - c.to_complex()) < kRootClusterTolerance; };
    if (b == Backend::Exact) {
        for (size_t i = 0; i < y.size(); ++i) {
            if (y[i].degree() > 0 && poly_gcd(y[i], y[i].derivative()).degree() > 0)
                fail(ErrorCode::NonAdmissibleTuple, "y_" + std::to_string(i + 1) + " has a multiple root");
            if (i + 1 < y.size() && poly_gcd(y[i], y[i + 1]).degree() > 0)
                fail(ErrorCode::NonAdmissibleTuple, "y_" + std::to_string(i + 1) + " and y_" + std::to_string(i + 2) + " share a root");
        }
        if (!y.empty())
            for (const auto& za : z)
                if (y[0](za).is_zero()) fail(ErrorCode::NonAdmissibleTuple, "y_1 vanishes at " + za.to_string());
        return;
    }
    std::vector<std::vector<Root>> roots;
    for (size_t i = 0; i < y.size(); ++i) {
        roots.push_back(y[i].degree() > 0 ? poly_roots(y[i]) : std::vector<Root>{});
        for (const auto& r : roots.back())
            if (r.multiplicity > 1) fail(ErrorCode::NonAdmissibleTuple, "y_" + std::to_string(i + 1) + " has a multiple root");
    }
    for (size_t i = 0; i + 1 < roots.size(); ++i)
        for (const auto& r : roots[i])
            for (const auto& s : roots[i + 1])
                if (close(r.value, s.value)) fail(ErrorCode::NonAdmissibleTuple, "adjacent levels share a root");
    if (!roots.empty())
        for (const auto& r : roots[0])
            for (const auto& za : z)
                if (close(r.value, za)) fail(ErrorCode::NonAdmissibleTuple, "y_1 vanishes at " + za.to_string());
}

MonicOperator factorized_from_tuple(const std::vector<Polynomial>& y, const std::vector<Scalar>& lambda,
                                    const std::vector<Scalar>& z, const std::vector<int>& m) {
    const int n = static_cast<int>(lambda.size());
    if (n < 1) fail(ErrorCode::InvalidArgument, "need at least one exponent");
    if (static_cast<int>(y.size()) != n - 1) fail(ErrorCode::InvalidArgument, "tuple must have N-1 polynomials");
    if (z.size() != m.size()) fail(ErrorCode::InvalidArgument, "z and m differ in length");
    const Backend b = lambda.front().backend();
    std::vector<Polynomial> ym;
    for (const auto& p : y) {
        if (p.is_zero()) fail(ErrorCode::NonAdmissibleTuple, "zero polynomial in the tuple");
        ym.push_back(p.to_backend(b).monic());
    }
    check_tuple_admissible(ym, z);
    return b == Backend::Exact ? factorized_exact(ym, lambda, z, m) : factorized_approx(ym, lambda, z, m);
}

std::vector<Polynomial> kernel_polynomials(const DiffOperator& op, const Scalar& lambda, int max_degree) {
    const Backend b = op.backend();
    if (max_degree < 0) return {};
    // Column k holds the coefficients of sum_j c_j (d + lambda)^j x^k.
    std::vector<Polynomial> images;
    for (int k = 0; k <= max_degree; ++k) {
        Polynomial q = Polynomial::monomial(Scalar::from_int(1, b), k);
        Polynomial img(b);
        for (int j = 0; j <= op.order(); ++j) {
            img += op.coeff(j) * q;
            q = q.derivative() + q * lambda;
        }
        images.push_back(std::move(img));
    }
    int rows = 0;
    for (const auto& p : images) rows = std::max(rows, p.degree() + 1);
    std::vector<Vector> null;
    if (b == Backend::Exact) {
        Matrix m = zero_matrix(rows, max_degree + 1, b);
        for (int k = 0; k <= max_degree; ++k)
            for (int r = 0; r <= images[static_cast<size_t>(k)].degree(); ++r) m[static_cast<size_t>(r)][static_cast<size_t>(k)] = images[static_cast<size_t>(k)].coeff(r);
        null = nullspace(m, max_degree + 1, b);
    } else {
        const int cols = max_degree + 1;
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(std::max(rows, cols), cols);
        for (int k = 0; k < cols; ++k)
            for (int r = 0; r <= images[static_cast<size_t>(k)].degree(); ++r) m(r, k) = images[static_cast<size_t>(k)].coeff(r).to_complex();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double top = sv.size() ? sv(0) : 0.0;
        for (int c = 0; c < cols; ++c) {
            const double s = c < sv.size() ? sv(c) : 0.0;
            if (s > kKernelThreshold * std::max(top, 1e-300) && top > 0.0) continue;
            Vector v;
            for (int k = 0; k < cols; ++k) v.push_back(Scalar::approx(svd.matrixV()(k, c)));
            null.push_back(std::move(v));
        }
    }
    std::vector<Polynomial> out;
    for (auto& v : null) {
        Polynomial p(std::move(v), b);
        if (!p.is_zero()) out.push_back(p.monic());
    }
    std::sort(out.begin(), out.end(), [](const Polynomial& a, const Polynomial& c) { return a.degree() < c.degree(); });
    return out;
}

Scalar predicted_degree(const DiffOperator& op, const Scalar& lambda) {
    const Polynomial b0 = op.normal_form(0);
    const Polynomial b1 = op.normal_form(1);
    const Scalar slope = b0.derivative()(lambda);
    if (slope.is_zero()) fail(ErrorCode::InvalidArgument, "exponent is not a simple root of B_0");
    return -b1(lambda) / slope;
}

PhiMatrix extract_phi(const DiffOperator& op, const std::array<Scalar, 2>& lambda, const std::array<Scalar, 2>& z) {
    const Backend b = op.backend();
    if (op.order() != 2 || op.x_degree() != 2 || op.entry(2, 2).is_zero())
        fail(ErrorCode::NotInPhiForm, "operator is not of order 2 with quadratic leading coefficient");
    const DiffOperator d = op * (op.entry(2, 2).one() / op.entry(2, 2));
    const char v = op.variable();
    auto first_order = [&](const Scalar& zi, const Scalar& lj) {
        return DiffOperator({Polynomial::linear(zi) * (-lj), Polynomial::linear(zi)}, v, b);
    };
    const DiffOperator dl1 = DiffOperator({Polynomial::constant(-lambda[0]), one_poly(b)}, v, b);
    const DiffOperator dl2 = DiffOperator({Polynomial::constant(-lambda[1]), one_poly(b)}, v, b);
    const DiffOperator base =
        DiffOperator::multiplication(Polynomial::linear(z[0]) * Polynomial::linear(z[1]), v) * dl1 * dl2;
    const DiffOperator rest = d - base;
    const DiffOperator basis[4] = {first_order(z[0], lambda[0]), first_order(z[0], lambda[1]),
                                   first_order(z[1], lambda[0]), first_order(z[1], lambda[1])};
    // Rows: table entries (1,1), (1,0), (0,1), (0,0); augmented by the target.
    const int idx[4][2] = {{1, 1}, {1, 0}, {0, 1}, {0, 0}};
    Matrix m = zero_matrix(4, 5, b);
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) m[static_cast<size_t>(r)][static_cast<size_t>(c)] = basis[c].entry(idx[r][0], idx[r][1]);
        m[static_cast<size_t>(r)][4] = rest.entry(idx[r][0], idx[r][1]);
    }
    const Echelon e = row_echelon(m, b);
    if (e.pivots.size() != 4 || e.pivots.back() != 3)
        fail(ErrorCode::NotInPhiForm, "phi system is singular (coinciding lambda or z)");
    PhiMatrix out;
    for (int c = 0; c < 4; ++c) out.phi[static_cast<size_t>(c / 2)][static_cast<size_t>(c % 2)] = e.rows[static_cast<size_t>(c)][4];
    DiffOperator check = rest;
    for (int c = 0; c < 4; ++c) check -= basis[c] * out.phi[static_cast<size_t>(c / 2)][static_cast<size_t>(c % 2)];
    double scale = 1.0;
    for (const auto& t : d.table()) scale = std::max(scale, t.coeff.abs());
    double res = 0.0;
    for (int i = 0; i <= std::max(check.x_degree(), 0); ++i)
        for (int j = 0; j <= std::max(check.order(), 0); ++j) res = std::max(res, check.entry(i, j).abs());
    out.residual = res / scale;
    if (b == Backend::Exact ? !check.is_zero() : out.residual > 1e-8)
        fail(ErrorCode::NotInPhiForm, "operator is not of the phi form (residual " + std::to_string(out.residual) + ")");
    return out;
}

}  // namespace bispectral
