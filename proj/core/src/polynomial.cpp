#include "bispectral/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bispectral {

namespace {

// Relative size below which a trailing approximate coefficient is treated as
// cancellation noise.
double trim_threshold() { return tolerance() * 1e-3; }

}  // namespace

Polynomial::Polynomial(std::vector<Scalar> coeffs)
    : coeffs_(std::move(coeffs)), backend_(coeffs_.empty() ? Backend::Exact : coeffs_.front().backend()) {
    for (const auto& c : coeffs_)
        if (c.backend() != backend_) fail(ErrorCode::MixedBackend, "polynomial coefficients from different backends");
    normalize();
}

Polynomial::Polynomial(std::vector<Scalar> coeffs, Backend backend) : coeffs_(std::move(coeffs)), backend_(backend) {
    for (const auto& c : coeffs_)
        if (c.backend() != backend_) fail(ErrorCode::MixedBackend, "polynomial coefficients from different backends");
    normalize();
}

void Polynomial::normalize() {
    if (backend_ == Backend::Exact) {
        while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
        return;
    }
    const double cut = trim_threshold() * max_abs();
    while (!coeffs_.empty() && coeffs_.back().abs() <= cut) coeffs_.pop_back();
}

Backend Polynomial::merged_backend(const Polynomial& other) const {
    if (is_zero()) return other.backend_;
    if (other.is_zero()) return backend_;
    if (backend_ != other.backend_) fail(ErrorCode::MixedBackend, "polynomials from different backends");
    return backend_;
}

Polynomial Polynomial::constant(const Scalar& c) { return Polynomial({c}, c.backend()); }

Polynomial Polynomial::monomial(const Scalar& c, int degree) {
    std::vector<Scalar> coeffs(static_cast<size_t>(degree) + 1, c.zero());
    coeffs.back() = c;
    return Polynomial(std::move(coeffs), c.backend());
}

Polynomial Polynomial::linear(const Scalar& root) { return Polynomial({-root, root.one()}, root.backend()); }

Polynomial Polynomial::from_roots(const std::vector<Scalar>& roots, Backend backend) {
    Polynomial result = constant(Scalar::from_int(1, backend));
    for (const auto& r : roots) result *= linear(r);
    return result;
}

Scalar Polynomial::coeff(int k) const {
    if (k < 0 || k > degree()) return Scalar::from_int(0, backend_);
    return coeffs_[static_cast<size_t>(k)];
}

Scalar Polynomial::leading() const {
    if (is_zero()) return Scalar::from_int(0, backend_);
    return coeffs_.back();
}

int Polynomial::valuation() const {
    for (size_t k = 0; k < coeffs_.size(); ++k)
        if (!coeffs_[k].is_zero()) return static_cast<int>(k);
    return -1;
}

double Polynomial::max_abs() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, c.abs());
    return m;
}

Scalar Polynomial::operator()(const Scalar& x) const {
    Scalar acc = x.zero();
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Complex Polynomial::eval(Complex x) const {
    Complex acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + it->to_complex();
    return acc;
}

Polynomial Polynomial::derivative(int k) const {
    Polynomial result = *this;
    for (int step = 0; step < k; ++step) {
        if (result.coeffs_.size() <= 1) return Polynomial(backend_);
        std::vector<Scalar> next;
        next.reserve(result.coeffs_.size() - 1);
        for (size_t i = 1; i < result.coeffs_.size(); ++i)
            next.push_back(result.coeffs_[i] * Scalar::from_int(static_cast<long>(i), backend_));
        result = Polynomial(std::move(next), backend_);
    }
    return result;
}

Polynomial Polynomial::monic() const {
    if (is_zero()) return *this;
    const Scalar lead = leading();
    std::vector<Scalar> coeffs = coeffs_;
    for (auto& c : coeffs) c /= lead;
    coeffs.back() = lead.one();
    return Polynomial(std::move(coeffs), backend_);
}

Polynomial Polynomial::shifted(const Scalar& a) const {
    // Horner in the shifted variable: p(x + a) = (...(c_n (x+a) + c_{n-1})(x+a) ...).
    if (is_zero()) return *this;
    const Polynomial step({a, a.one()}, a.backend());
    Polynomial acc(merged_backend(step));
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * step + constant(*it);
    return acc;
}

Polynomial Polynomial::to_backend(Backend target) const {
    std::vector<Scalar> coeffs;
    coeffs.reserve(coeffs_.size());
    for (const auto& c : coeffs_) coeffs.push_back(c.to_backend(target));
    return Polynomial(std::move(coeffs), target);
}

Polynomial Polynomial::pow(int exponent) const {
    Polynomial result = constant(Scalar::from_int(1, backend_));
    for (int i = 0; i < exponent; ++i) result *= *this;
    return result;
}

Polynomial Polynomial::operator-() const {
    std::vector<Scalar> coeffs = coeffs_;
    for (auto& c : coeffs) c = -c;
    return Polynomial(std::move(coeffs), backend_);
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
    backend_ = merged_backend(rhs);
    if (coeffs_.size() < rhs.coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), Scalar::from_int(0, backend_));
    for (size_t i = 0; i < rhs.coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
    normalize();
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) { return *this += -rhs; }

Polynomial& Polynomial::operator*=(const Polynomial& rhs) {
    const Backend b = merged_backend(rhs);
    if (is_zero() || rhs.is_zero()) {
        coeffs_.clear();
        backend_ = b;
        return *this;
    }
    std::vector<Scalar> out(coeffs_.size() + rhs.coeffs_.size() - 1, Scalar::from_int(0, b));
    for (size_t i = 0; i < coeffs_.size(); ++i) {
        if (coeffs_[i].is_exact() && coeffs_[i].is_zero()) continue;
        for (size_t j = 0; j < rhs.coeffs_.size(); ++j) out[i + j] += coeffs_[i] * rhs.coeffs_[j];
    }
    coeffs_ = std::move(out);
    backend_ = b;
    normalize();
    return *this;
}

Polynomial& Polynomial::operator*=(const Scalar& rhs) {
    if (!is_zero() && rhs.backend() != backend_) fail(ErrorCode::MixedBackend, "scalar and polynomial backends differ");
    backend_ = rhs.backend();
    for (auto& c : coeffs_) c *= rhs;
    normalize();
    return *this;
}

bool operator==(const Polynomial& a, const Polynomial& b) {
    const int n = std::max(a.degree(), b.degree());
    if (!a.is_zero() && !b.is_zero() && a.backend() != b.backend())
        fail(ErrorCode::MixedBackend, "comparing polynomials from different backends");
    for (int k = 0; k <= n; ++k) {
        const Scalar x = a.is_zero() ? Scalar::from_int(0, b.backend()) : a.coeff(k);
        const Scalar y = b.is_zero() ? Scalar::from_int(0, a.backend()) : b.coeff(k);
        if (!approx_equal(x, y)) return false;
    }
    return true;
}

std::string Polynomial::to_string(char var) const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int k = degree(); k >= 0; --k) {
        const Scalar& c = coeffs_[static_cast<size_t>(k)];
        if (c.is_exact() && c.is_zero()) continue;
        if (!first) os << " + ";
        first = false;
        os << "(" << c.to_string() << ")";
        if (k >= 1) os << var;
        if (k >= 2) os << "^" << k;
    }
    return os.str();
}

DivMod divmod(const Polynomial& p, const Polynomial& q) {
    if (q.is_zero()) fail(ErrorCode::DivisionByZero, "polynomial division by zero");
    const Backend b = p.is_zero() ? q.backend() : p.backend();
    if (!p.is_zero() && p.backend() != q.backend()) fail(ErrorCode::MixedBackend, "divmod across backends");
    if (p.degree() < q.degree()) return {Polynomial(b), p};
    std::vector<Scalar> rem = p.coeffs();
    std::vector<Scalar> quot(static_cast<size_t>(p.degree() - q.degree() + 1), Scalar::from_int(0, b));
    const Scalar lead = q.leading();
    const auto& qc = q.coeffs();
    for (int k = p.degree() - q.degree(); k >= 0; --k) {
        const Scalar factor = rem[static_cast<size_t>(k + q.degree())] / lead;
        quot[static_cast<size_t>(k)] = factor;
        for (int j = 0; j <= q.degree(); ++j) rem[static_cast<size_t>(k + j)] -= factor * qc[static_cast<size_t>(j)];
        rem[static_cast<size_t>(k + q.degree())] = Scalar::from_int(0, b);
    }
    rem.resize(static_cast<size_t>(q.degree()), Scalar::from_int(0, b));
    if (b == Backend::Approx) {
        // Remainder entries are only meaningful relative to the dividend.
        const double cut = tolerance() * 1e-3 * std::max(1.0, p.max_abs());
        for (auto& c : rem)
            if (c.abs() <= cut) c = Scalar::from_int(0, b);
    }
    return {Polynomial(std::move(quot), b), Polynomial(std::move(rem), b)};
}

Polynomial exact_quotient(const Polynomial& p, const Polynomial& q) {
    auto [quot, rem] = divmod(p, q);
    if (rem.is_zero()) return quot;
    if (p.backend() == Backend::Approx) {
        const double scale = std::max(p.max_abs(), quot.max_abs() * q.max_abs());
        if (rem.max_abs() <= tolerance() * std::max(1.0, scale)) return quot;
    }
    fail(ErrorCode::InvalidArgument, "polynomial division leaves a nonzero remainder");
}

Polynomial poly_gcd(const Polynomial& p, const Polynomial& q) {
    if ((!p.is_zero() && p.backend() == Backend::Approx) || (!q.is_zero() && q.backend() == Backend::Approx))
        fail(ErrorCode::ApproxBackendUnsupported, "poly_gcd requires the exact backend");
    Polynomial a = p;
    Polynomial b = q;
    while (!b.is_zero()) {
        Polynomial r = divmod(a, b).remainder;
        a = std::move(b);
        b = r.monic();
    }
    return a.monic();
}

int root_multiplicity(const Polynomial& p, const Scalar& point) {
    if (p.is_zero()) fail(ErrorCode::InvalidArgument, "multiplicity of a root of the zero polynomial");
    int mult = 0;
    if (p.backend() == Backend::Exact) {
        Polynomial rest = p;
        const Polynomial factor = Polynomial::linear(point);
        while (rest.degree() >= 1) {
            auto [quot, rem] = divmod(rest, factor);
            if (!rem.is_zero()) break;
            rest = std::move(quot);
            ++mult;
        }
        return mult;
    }
    Polynomial d = p;
    const double radius = std::max(1.0, point.abs());
    while (d.degree() >= 1) {
        double scale = 0.0;
        for (int k = 0; k <= d.degree(); ++k) scale += d.coeff(k).abs() * std::pow(radius, k);
        if (std::abs(d.eval(point.to_complex())) > tolerance() * scale) break;
        d = d.derivative();
        ++mult;
    }
    return mult;
}

namespace {

std::vector<Complex> aberth_core(const std::vector<Complex>& coeffs) {
    const int n = static_cast<int>(coeffs.size()) - 1;
    if (n < 1) return {};
    const Complex lead = coeffs.back();
    auto eval = [&](Complex x, Complex& deriv) {
        Complex p = 0.0;
        deriv = 0.0;
        for (int k = n; k >= 0; --k) {
            deriv = deriv * x + p;
            p = p * x + coeffs[static_cast<size_t>(k)];
        }
        return p;
    };
    double radius = 0.0;
    for (int k = 0; k < n; ++k)
        radius = std::max(radius, std::pow(std::abs(coeffs[static_cast<size_t>(k)] / lead), 1.0 / (n - k)));
    radius = std::max(radius, 1e-3);
    const Complex center = -coeffs[static_cast<size_t>(n - 1)] / (lead * static_cast<double>(n));
    std::vector<Complex> z(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k)
        z[static_cast<size_t>(k)] = center + radius * std::polar(1.0, 2.0 * std::numbers::pi * k / n + 0.4);

    bool converged = false;
    for (int iter = 0; iter < kAberthMaxIterations && !converged; ++iter) {
        converged = true;
        for (int k = 0; k < n; ++k) {
            Complex deriv;
            const Complex value = eval(z[static_cast<size_t>(k)], deriv);
            if (value == 0.0) continue;
            const Complex ratio = value / deriv;
            Complex repulsion = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != k) repulsion += 1.0 / (z[static_cast<size_t>(k)] - z[static_cast<size_t>(j)]);
            const Complex step = ratio / (1.0 - ratio * repulsion);
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) continue;
            z[static_cast<size_t>(k)] -= step;
            if (std::abs(step) > 1e-15 * std::max(1.0, std::abs(z[static_cast<size_t>(k)]))) converged = false;
        }
    }
    // Backward-error acceptance: clustered roots stall before the step test is met.
    for (const Complex& root : z) {
        Complex deriv;
        const double value = std::abs(eval(root, deriv));
        double scale = 0.0;
        for (int k = 0; k <= n; ++k) scale += std::abs(coeffs[static_cast<size_t>(k)]) * std::pow(std::abs(root), k);
        if (!(value <= 1e-9 * scale)) fail(ErrorCode::NoConvergence, "Aberth iteration did not converge");
    }
    return z;
}

}  // namespace

std::vector<Complex> aberth_roots(const std::vector<Complex>& input) {
    std::vector<Complex> coeffs = input;
    // Exact zero roots are split off; iterates converging to 0 never meet a relative test.
    std::vector<Complex> zeros;
    while (coeffs.size() > 1 && coeffs.front() == 0.0) {
        coeffs.erase(coeffs.begin());
        zeros.push_back(0.0);
    }
    std::vector<Complex> rest = aberth_core(coeffs);
    rest.insert(rest.end(), zeros.begin(), zeros.end());
    return rest;
}

namespace {

std::vector<Root> approx_roots(const Polynomial& p) {
    std::vector<Complex> coeffs;
    for (const auto& c : p.coeffs()) coeffs.push_back(c.to_complex());
    std::vector<Complex> raw = aberth_roots(coeffs);
    std::sort(raw.begin(), raw.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    std::vector<bool> used(raw.size(), false);
    const Polynomial approx = p.to_backend(Backend::Approx);
    std::vector<std::vector<Complex>> clusters;
    for (size_t i = 0; i < raw.size(); ++i) {
        if (used[i]) continue;
        std::vector<Complex> cluster{raw[i]};
        used[i] = true;
        for (size_t j = i + 1; j < raw.size(); ++j) {
            if (used[j]) continue;
            if (std::abs(raw[j] - raw[i]) <= kRootClusterTolerance) {
                cluster.push_back(raw[j]);
                used[j] = true;
            }
        }
        clusters.push_back(std::move(cluster));
    }
    auto mean_of = [](const std::vector<Complex>& c) {
        Complex m = 0.0;
        for (Complex v : c) m += v;
        return m / static_cast<double>(c.size());
    };
    // A multiple root computed from rounded coefficients splits by about
    // (eps)^(1/m); merge nearby clusters whose spread is explained by rounding.
    auto rounding_split = [&](const std::vector<Complex>& c) {
        const Complex x = mean_of(c);
        double spread = 0.0;
        for (Complex v : c) spread = std::max(spread, std::abs(v - x));
        const int m = static_cast<int>(c.size());
        double scale = 0.0;
        for (int j = 0; j <= approx.degree(); ++j) scale += std::abs(approx.coeffs()[static_cast<size_t>(j)].to_complex()) * std::pow(std::max(1.0, std::abs(x)), j);
        const double taylor = std::abs(approx.derivative(m).eval(x)) / factorial(m, Backend::Approx).to_complex().real();
        return taylor * std::pow(spread, m) <= kRootMergeBackward * scale;
    };
    for (bool merged = true; merged;) {
        merged = false;
        for (size_t i = 0; i < clusters.size() && !merged; ++i)
            for (size_t j = i + 1; j < clusters.size() && !merged; ++j) {
                const Complex a = mean_of(clusters[i]), b = mean_of(clusters[j]);
                if (std::abs(a - b) > kRootMergeRadius * std::max(1.0, std::abs(a))) continue;
                std::vector<Complex> joined = clusters[i];
                joined.insert(joined.end(), clusters[j].begin(), clusters[j].end());
                if (!rounding_split(joined)) continue;
                clusters[i] = std::move(joined);
                clusters.erase(clusters.begin() + static_cast<long>(j));
                merged = true;
            }
    }
    std::vector<Root> out;
    for (const auto& cluster : clusters) {
        const Complex mean = mean_of(cluster);
        const int mult = static_cast<int>(cluster.size());
        // A root of multiplicity m is a simple root of the (m-1)-th derivative.
        const Polynomial d = approx.derivative(mult - 1);
        const Polynomial dd = d.derivative();
        Complex x = mean;
        for (int it = 0; it < 8; ++it) {
            const Complex slope = dd.eval(x);
            if (std::abs(slope) == 0.0) break;
            const Complex step = d.eval(x) / slope;
            if (!std::isfinite(step.real()) || std::abs(step) > kRootMergeRadius) break;
            x -= step;
        }
        out.push_back({Scalar::approx(x), mult, false});
    }
    return out;
}

// Gaussian-integer rounding of a complex double.
Scalar round_gaussian(Complex y) {
    mpz_class re(static_cast<long>(std::llround(y.real())));
    mpz_class im(static_cast<long>(std::llround(y.imag())));
    return Scalar::exact(Rational(re), Rational(im));
}

std::vector<Root> exact_roots(const Polynomial& p) {
    std::vector<Root> out;
    Polynomial rest = p;
    const Polynomial squarefree = exact_quotient(p, poly_gcd(p, p.derivative()));

    // Scale to Gaussian-integer coefficients; a root r in Q(i) then has a*r in Z[i].
    mpz_class denom_lcm = 1;
    for (const auto& c : squarefree.coeffs()) {
        const auto& v = c.exact_value();
        mpz_lcm(denom_lcm.get_mpz_t(), denom_lcm.get_mpz_t(), v.re.get_den_mpz_t());
        mpz_lcm(denom_lcm.get_mpz_t(), denom_lcm.get_mpz_t(), v.im.get_den_mpz_t());
    }
    const Scalar lead = squarefree.leading() * Scalar::exact(Rational(denom_lcm));

    std::vector<Complex> coeffs;
    for (const auto& c : squarefree.coeffs()) coeffs.push_back(c.to_complex());
    std::vector<Complex> numeric;
    if (squarefree.degree() >= 1) numeric = aberth_roots(coeffs);

    const Complex lead_c = lead.to_complex();
    for (Complex guess : numeric) {
        if (rest.degree() < 1) break;
        const Scalar candidate = round_gaussian(lead_c * guess) / lead;
        if (!rest(candidate).is_zero()) continue;
        const int mult = root_multiplicity(rest, candidate);
        rest = exact_quotient(rest, Polynomial::linear(candidate).pow(mult));
        out.push_back({candidate, mult, false});
    }
    if (rest.degree() >= 1) {
        for (auto& r : approx_roots(rest.to_backend(Backend::Approx))) {
            r.approximate = true;
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace

std::vector<Root> poly_roots(const Polynomial& p) {
    if (p.is_zero()) fail(ErrorCode::InvalidArgument, "roots of the zero polynomial");
    std::vector<Root> roots = p.backend() == Backend::Exact ? exact_roots(p) : approx_roots(p);
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
        const Complex x = a.value.to_complex();
        const Complex y = b.value.to_complex();
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    return roots;
}

}  // namespace bispectral
