#include "bispectral/bethe.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace bispectral {

namespace {

constexpr double kConvergedResidual = 1e-12;
constexpr double kAcceptedResidual = 1e-10;
constexpr double kOrbitMergeDistance = 1e-7;
constexpr double kDegenerateJacobian = 1e-8;
constexpr double kEscapeFactor = 1e6;

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// Real parts closer than this count as equal, so conjugate pairs sort stably.
constexpr double kSortTieTolerance = 1e-8;

bool scalar_less(const Scalar& a, const Scalar& b) {
    const Complex x = a.to_complex(), y = b.to_complex();
    const double scale = std::max({1.0, std::abs(x), std::abs(y)});
    if (std::abs(x.real() - y.real()) > kSortTieTolerance * scale) return x.real() < y.real();
    return x.imag() < y.imag();
}

std::vector<Complex> complexes(const std::vector<Scalar>& v) {
    std::vector<Complex> out;
    for (const auto& s : v) out.push_back(s.to_complex());
    return out;
}

// Flat complex coordinates with level boundaries.
struct Layout {
    std::vector<int> offset;  // offset[i] = first index of level i (0-based), offset[L] = total
    int total() const { return offset.back(); }
    int levels() const { return static_cast<int>(offset.size()) - 1; }
};

Layout layout_of(const MasterSpec& spec) {
    Layout l;
    l.offset.push_back(0);
    for (int k : spec.nbar()) l.offset.push_back(l.offset.back() + k);
    return l;
}

CVec flatten(const Levels& t, const Layout& l) {
    CVec v(l.total());
    for (int i = 0; i < l.levels(); ++i)
        for (int j = 0; j < l.offset[i + 1] - l.offset[i]; ++j) v(l.offset[i] + j) = t[static_cast<size_t>(i)][static_cast<size_t>(j)].to_complex();
    return v;
}

Levels unflatten(const CVec& v, const Layout& l) {
    Levels t(static_cast<size_t>(l.levels()));
    for (int i = 0; i < l.levels(); ++i)
        for (int k = l.offset[i]; k < l.offset[i + 1]; ++k) t[static_cast<size_t>(i)].push_back(Scalar::approx(v(k)));
    return t;
}

void check_shape(const MasterSpec& spec, const Levels& t) {
    if (static_cast<int>(t.size()) != spec.N() - 1)
        fail(ErrorCode::InvalidArgument, "expected " + std::to_string(spec.N() - 1) + " levels of coordinates");
    for (int i = 0; i + 1 < spec.N(); ++i)
        if (static_cast<int>(t[static_cast<size_t>(i)].size()) != spec.nbar()[static_cast<size_t>(i)])
            fail(ErrorCode::InvalidArgument, "level " + std::to_string(i + 1) + " needs " +
                                                 std::to_string(spec.nbar()[static_cast<size_t>(i)]) + " coordinates");
}

struct Numeric {
    std::vector<Complex> lambda, z;
    std::vector<int> m;
    Layout layout;
};

Numeric numeric_of(const MasterSpec& spec) { return {complexes(spec.lambda()), complexes(spec.z()), spec.m(), layout_of(spec)}; }

int level_of(const Layout& l, int k) {
    int i = 0;
    while (k >= l.offset[i + 1]) ++i;
    return i;
}

CVec residual_vector(const Numeric& p, const CVec& t) {
    const Layout& l = p.layout;
    CVec r(l.total());
    for (int i = 0; i < l.levels(); ++i) {
        for (int k = l.offset[i]; k < l.offset[i + 1]; ++k) {
            Complex acc = 0.0;
            for (int k2 = l.offset[i]; k2 < l.offset[i + 1]; ++k2)
                if (k2 != k) acc += 2.0 / (t(k) - t(k2));
            if (i > 0)
                for (int k2 = l.offset[i - 1]; k2 < l.offset[i]; ++k2) acc -= 1.0 / (t(k) - t(k2));
            if (i + 1 < l.levels())
                for (int k2 = l.offset[i + 1]; k2 < l.offset[i + 2]; ++k2) acc -= 1.0 / (t(k) - t(k2));
            if (i == 0)
                for (size_t a = 0; a < p.z.size(); ++a) acc -= static_cast<double>(p.m[a]) / (t(k) - p.z[a]);
            r(k) = acc - (p.lambda[static_cast<size_t>(i)] - p.lambda[static_cast<size_t>(i + 1)]);
        }
    }
    return r;
}

CMat jacobian(const Numeric& p, const CVec& t) {
    const Layout& l = p.layout;
    const int n = l.total();
    CMat j = CMat::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const int i = level_of(l, k);
        Complex self = 0.0;
        for (int k2 = l.offset[i]; k2 < l.offset[i + 1]; ++k2) {
            if (k2 == k) continue;
            const Complex d = t(k) - t(k2);
            self -= 2.0 / (d * d);
            j(k, k2) = 2.0 / (d * d);
        }
        auto adjacent = [&](int lo, int hi) {
            for (int k2 = lo; k2 < hi; ++k2) {
                const Complex d = t(k) - t(k2);
                self += 1.0 / (d * d);
                j(k, k2) = -1.0 / (d * d);
            }
        };
        if (i > 0) adjacent(l.offset[i - 1], l.offset[i]);
        if (i + 1 < l.levels()) adjacent(l.offset[i + 1], l.offset[i + 2]);
        if (i == 0)
            for (size_t a = 0; a < p.z.size(); ++a) {
                const Complex d = t(k) - p.z[a];
                self += static_cast<double>(p.m[a]) / (d * d);
            }
        j(k, k) = self;
    }
    return j;
}

double inf_norm(const CVec& v) {
    double out = 0.0;
    for (int k = 0; k < v.size(); ++k) {
        const double a = std::abs(v(k));
        if (!std::isfinite(a)) return std::numeric_limits<double>::infinity();
        out = std::max(out, a);
    }
    return out;
}

struct NewtonResult {
    CVec t;
    double residual;
};

std::optional<NewtonResult> newton(const Numeric& p, CVec t, int max_iterations, double escape) {
    CVec r = residual_vector(p, t);
    double norm = inf_norm(r);
    for (int it = 0; it < max_iterations && norm >= kConvergedResidual; ++it) {
        if (!std::isfinite(norm)) return std::nullopt;
        const CMat j = jacobian(p, t);
        const CVec step = j.colPivHouseholderQr().solve(-r);
        if (!step.allFinite()) return std::nullopt;
        double alpha = 1.0;
        CVec best_t = t + step;
        CVec best_r = residual_vector(p, best_t);
        double best = inf_norm(best_r);
        while (!(best < norm) && alpha > 1.0 / 1024) {
            alpha /= 2;
            const CVec trial = t + alpha * step;
            const CVec tr = residual_vector(p, trial);
            const double tn = inf_norm(tr);
            if (tn < best) {
                best = tn;
                best_t = trial;
                best_r = tr;
            }
        }
        if (!std::isfinite(best)) return std::nullopt;
        const double moved = (best_t - t).cwiseAbs().maxCoeff();
        t = best_t;
        r = best_r;
        norm = best;
        if (t.cwiseAbs().maxCoeff() > escape) return std::nullopt;
        if (moved <= 1e-16 * std::max(1.0, t.cwiseAbs().maxCoeff())) break;
    }
    if (!(norm <= kAcceptedResidual)) return std::nullopt;
    return NewtonResult{t, norm};
}

bool jacobian_degenerate(const Numeric& p, const CVec& t) {
    if (t.size() == 0) return false;
    const Eigen::JacobiSVD<CMat> svd(jacobian(p, t));
    const auto& s = svd.singularValues();
    return s(s.size() - 1) <= kDegenerateJacobian * s(0);
}

}  // namespace

MasterSpec::MasterSpec(std::vector<Scalar> lambda, std::vector<Scalar> z, std::vector<int> n, std::vector<int> m)
    : lambda_(std::move(lambda)), z_(std::move(z)), n_(std::move(n)), m_(std::move(m)) {
    if (lambda_.empty()) fail(ErrorCode::InvalidArgument, "master function needs at least one exponent");
    if (n_.size() != lambda_.size()) fail(ErrorCode::InvalidArgument, "n and lambda differ in length");
    if (m_.size() != z_.size()) fail(ErrorCode::InvalidArgument, "m and z differ in length");
    for (size_t i = 0; i < lambda_.size(); ++i)
        for (size_t k = i + 1; k < lambda_.size(); ++k)
            if (lambda_[i] == lambda_[k]) fail(ErrorCode::CoincidingParameters, "repeated lambda " + lambda_[i].to_string());
    for (size_t a = 0; a < z_.size(); ++a)
        for (size_t b = a + 1; b < z_.size(); ++b)
            if (z_[a] == z_[b]) fail(ErrorCode::CoincidingParameters, "repeated z " + z_[a].to_string());
    long sn = 0, sm = 0;
    for (int v : n_) {
        if (v < 0) fail(ErrorCode::InvalidArgument, "negative entry in n");
        sn += v;
    }
    for (int v : m_) {
        if (v < 0) fail(ErrorCode::InvalidArgument, "negative entry in m");
        sm += v;
    }
    if (sn != sm) fail(ErrorCode::InvalidArgument, "sum n = " + std::to_string(sn) + " differs from sum m = " + std::to_string(sm));
    for (size_t i = 1; i < n_.size(); ++i) {
        int s = 0;
        for (size_t k = i; k < n_.size(); ++k) s += n_[k];
        nbar_.push_back(s);
    }
}

int MasterSpec::variable_count() const noexcept {
    int s = 0;
    for (int k : nbar_) s += k;
    return s;
}

void check_admissible(const MasterSpec& spec, const Levels& t) {
    check_shape(spec, t);
    auto same = [](const Scalar& a, const Scalar& b) {
        if (a.backend() == b.backend()) return (a - b).is_zero();
        return Scalar::approx(a.to_complex() - b.to_complex()).is_zero();
    };
    for (size_t i = 0; i < t.size(); ++i) {
        const auto& lv = t[i];
        for (size_t j = 0; j < lv.size(); ++j) {
            for (size_t k = j + 1; k < lv.size(); ++k)
                if (same(lv[j], lv[k])) fail(ErrorCode::NonAdmissiblePoint, "repeated coordinate on level " + std::to_string(i + 1));
            if (i + 1 < t.size())
                for (const auto& w : t[i + 1])
                    if (same(lv[j], w))
                        fail(ErrorCode::NonAdmissiblePoint, "levels " + std::to_string(i + 1) + " and " + std::to_string(i + 2) + " share a coordinate");
            if (i == 0)
                for (const auto& za : spec.z())
                    if (same(lv[j], za)) fail(ErrorCode::NonAdmissiblePoint, "level 1 coordinate equals z = " + za.to_string());
        }
    }
}

Complex log_master_value(const MasterSpec& spec, const Levels& t) {
    check_admissible(spec, t);
    const auto lam = complexes(spec.lambda());
    const auto z = complexes(spec.z());
    const auto& m = spec.m();
    Complex expo = 0.0;
    for (size_t a = 0; a < z.size(); ++a) expo += lam[0] * static_cast<double>(m[a]) * z[a];
    for (size_t i = 0; i < t.size(); ++i)
        for (const auto& s : t[i]) expo += (lam[i + 1] - lam[i]) * s.to_complex();
    Complex lg = expo;
    for (size_t a = 0; a < z.size(); ++a)
        for (size_t b = a + 1; b < z.size(); ++b) lg += static_cast<double>(m[a] * m[b]) * std::log(z[a] - z[b]);
    if (!t.empty())
        for (const auto& s : t[0])
            for (size_t a = 0; a < z.size(); ++a) lg -= static_cast<double>(m[a]) * std::log(s.to_complex() - z[a]);
    for (size_t i = 0; i < t.size(); ++i) {
        const auto& lv = t[i];
        for (size_t j = 0; j < lv.size(); ++j) {
            for (size_t k = j + 1; k < lv.size(); ++k) lg += 2.0 * std::log(lv[j].to_complex() - lv[k].to_complex());
            if (i + 1 < t.size())
                for (const auto& w : t[i + 1]) lg -= std::log(lv[j].to_complex() - w.to_complex());
        }
    }
    return lg;
}

Scalar master_value(const MasterSpec& spec, const Levels& t) {
    check_admissible(spec, t);
    const auto lam = complexes(spec.lambda());
    const auto z = complexes(spec.z());
    const auto& m = spec.m();
    Complex expo = 0.0;
    for (size_t a = 0; a < z.size(); ++a) expo += lam[0] * static_cast<double>(m[a]) * z[a];
    for (size_t i = 0; i < t.size(); ++i)
        for (const auto& s : t[i]) expo += (lam[i + 1] - lam[i]) * s.to_complex();
    Complex value = std::exp(expo);
    for (size_t a = 0; a < z.size(); ++a)
        for (size_t b = a + 1; b < z.size(); ++b) value *= std::pow(z[a] - z[b], m[a] * m[b]);
    if (!t.empty())
        for (const auto& s : t[0])
            for (size_t a = 0; a < z.size(); ++a) value *= std::pow(s.to_complex() - z[a], -m[a]);
    for (size_t i = 0; i < t.size(); ++i) {
        const auto& lv = t[i];
        for (size_t j = 0; j < lv.size(); ++j) {
            for (size_t k = j + 1; k < lv.size(); ++k) {
                const Complex d = lv[j].to_complex() - lv[k].to_complex();
                value *= d * d;
            }
            if (i + 1 < t.size())
                for (const auto& w : t[i + 1]) value /= lv[j].to_complex() - w.to_complex();
        }
    }
    if (value == 0.0 || !std::isfinite(std::abs(value))) fail(ErrorCode::NonAdmissiblePoint, "master function value is zero or undefined");
    return Scalar::approx(value);
}

std::vector<Scalar> critical_equations(const MasterSpec& spec, const Levels& t) {
    check_admissible(spec, t);
    const Numeric p = numeric_of(spec);
    const CVec r = residual_vector(p, flatten(t, p.layout));
    std::vector<Scalar> out;
    for (int k = 0; k < r.size(); ++k) out.push_back(Scalar::approx(r(k)));
    return out;
}

double critical_residual(const MasterSpec& spec, const Levels& t) {
    double out = 0.0;
    for (const auto& r : critical_equations(spec, t)) out = std::max(out, std::abs(r.to_complex()));
    return out;
}

std::uint64_t weight_space_dimension(const std::vector<int>& m, const std::vector<int>& n) {
    long sm = 0, sn = 0;
    for (int v : m) sm += v;
    for (int v : n) sn += v;
    if (sm != sn) return 0;
    // Fill the matrix row by row; the state is the vector of remaining column sums.
    std::map<std::vector<int>, std::uint64_t> states{{n, 1}};
    for (int row : m) {
        std::map<std::vector<int>, std::uint64_t> next;
        for (const auto& [cols, count] : states) {
            std::vector<int> cur = cols;
            // Distribute `row` units over the columns, bounded by what remains.
            auto place = [&](auto&& self, size_t c, int left) -> void {
                if (c == cur.size()) {
                    if (left == 0) next[cur] += count;
                    return;
                }
                const int original = cur[c];
                for (int take = 0; take <= std::min(left, original); ++take) {
                    cur[c] = original - take;
                    self(self, c + 1, left - take);
                }
                cur[c] = original;
            };
            place(place, 0, row);
        }
        states = std::move(next);
    }
    auto it = states.find(std::vector<int>(n.size(), 0));
    return it == states.end() ? 0 : it->second;
}

bool lambda_is_generic(const MasterSpec& spec) {
    const auto& nbar = spec.nbar();
    const int levels = static_cast<int>(nbar.size());
    if (levels == 0) return true;
    std::vector<Scalar> diff;
    for (int i = 0; i < levels; ++i) diff.push_back(spec.lambda()[static_cast<size_t>(i)] - spec.lambda()[static_cast<size_t>(i + 1)]);
    std::vector<int> c(static_cast<size_t>(levels), 0);
    for (;;) {
        int k = 0;
        while (k < levels && c[static_cast<size_t>(k)] == nbar[static_cast<size_t>(k)]) c[static_cast<size_t>(k++)] = 0;
        if (k == levels) return true;
        ++c[static_cast<size_t>(k)];
        Scalar s = diff.front().zero();
        for (int i = 0; i < levels; ++i) s += diff[static_cast<size_t>(i)] * Scalar::from_int(c[static_cast<size_t>(i)], s.backend());
        if (s.is_zero()) return false;
    }
}

Levels canonical_levels(Levels t) {
    for (auto& lv : t) std::sort(lv.begin(), lv.end(), scalar_less);
    return t;
}

double orbit_distance(const Levels& a, const Levels& b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double out = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) return std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < a[i].size(); ++j) out = std::max(out, std::abs(a[i][j].to_complex() - b[i][j].to_complex()));
    }
    return out;
}

BetheSolution solve_bethe(const MasterSpec& spec, const BetheOptions& options) {
    BetheSolution sol;
    sol.bound = weight_space_dimension(spec.m(), spec.n());
    sol.generic_lambda = lambda_is_generic(spec);
    const Numeric p = numeric_of(spec);
    const int nvar = p.layout.total();

    if (nvar == 0) {
        Levels empty(static_cast<size_t>(spec.N() - 1));
        sol.points.push_back({empty, 0.0, spec});
        sol.bound_attained = sol.points.size() >= sol.bound;
        return sol;
    }

    Complex centre = 0.0;
    for (Complex z : p.z) centre += z;
    if (!p.z.empty()) centre /= static_cast<double>(p.z.size());
    double radius = 1.0;
    for (Complex z : p.z) radius = std::max(radius, std::abs(z));
    for (Complex l : p.lambda) radius = std::max(radius, std::abs(l));
    radius = options.radius > 0 ? options.radius : 2.0 * radius;

    const int starts = options.starts > 0 ? options.starts : 200 * nvar;
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<CVec> found;
    for (int s = 0; s < starts; ++s) {
        ++sol.starts_used;
        // Cycle through nested sub-discs; small basins near the centre are easy to miss otherwise.
        const double r = std::ldexp(radius, -(s % 4));
        CVec t(nvar);
        for (int k = 0; k < nvar; ++k)
            t(k) = centre + r * unit(rng) * std::polar(1.0, 2.0 * std::numbers::pi * unit(rng));
        const auto res = newton(p, t, options.max_iterations, kEscapeFactor * radius);
        if (!res) continue;
        Levels lv;
        try {
            lv = canonical_levels(unflatten(res->t, p.layout));
            check_admissible(spec, lv);
        } catch (const Error&) {
            continue;
        }
        bool duplicate = false;
        for (const auto& cp : sol.points)
            if (orbit_distance(cp.levels, lv) < kOrbitMergeDistance) duplicate = true;
        if (duplicate) continue;
        sol.points.push_back({lv, critical_residual(spec, lv), spec});
        found.push_back(flatten(lv, p.layout));
        if (sol.bound > 0 && sol.points.size() >= sol.bound) break;
    }

    std::sort(sol.points.begin(), sol.points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        for (size_t i = 0; i < a.levels.size(); ++i)
            for (size_t j = 0; j < a.levels[i].size(); ++j) {
                const Complex x = a.levels[i][j].to_complex(), y = b.levels[i][j].to_complex();
                if (std::abs(x - y) >= kOrbitMergeDistance) return scalar_less(a.levels[i][j], b.levels[i][j]);
            }
        return false;
    });

    // A continuum shows up as distinct degenerate points with the same critical value.
    if (sol.points.size() > sol.bound) sol.possibly_nongeneric = true;
    for (size_t a = 0; a < sol.points.size() && !sol.possibly_nongeneric; ++a) {
        const Complex va = master_value(spec, sol.points[a].levels).to_complex();
        for (size_t b = a + 1; b < sol.points.size(); ++b) {
            const Complex vb = master_value(spec, sol.points[b].levels).to_complex();
            if (std::abs(va - vb) > kOrbitMergeDistance * std::max(std::abs(va), std::abs(vb))) continue;
            if (jacobian_degenerate(p, flatten(sol.points[a].levels, p.layout)) ||
                jacobian_degenerate(p, flatten(sol.points[b].levels, p.layout)))
                sol.possibly_nongeneric = true;
        }
    }
    if (sol.possibly_nongeneric && options.strict)
        fail(ErrorCode::PossiblyNonGeneric, "critical points do not look isolated (" + std::to_string(sol.points.size()) +
                                                " orbits, bound " + std::to_string(sol.bound) + ")");
    sol.bound_attained = sol.points.size() >= sol.bound;
    if (options.require_bound && !sol.bound_attained)
        fail(ErrorCode::MaxStartsExceeded, "found " + std::to_string(sol.points.size()) + " of " + std::to_string(sol.bound) +
                                               " orbits after " + std::to_string(sol.starts_used) + " starts");
    return sol;
}

std::vector<Polynomial> tuple_from_space(const SpecialSpace& special) {
    const int n = special.N();
    const Backend b = special.space.backend();
    std::vector<Polynomial> y;
    for (int i = 1; i < n; ++i) {
        std::vector<QuasiPolynomial> tail(special.ordered.begin() + i, special.ordered.end());
        const QuasiPolynomial w = wronskian_of(tail, b, special.space.variable());
        if (!w.coefficient().is_polynomial()) fail(ErrorCode::NonAdmissibleSpace, "Wronskian of the tail is not a polynomial");
        y.push_back(w.coefficient().to_polynomial().monic());
    }
    try {
        check_tuple_admissible(y, special.z);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NonAdmissibleTuple) throw;
        fail(ErrorCode::NonAdmissibleSpace, std::string("space is not admissible: ") + e.what());
    }
    return y;
}

std::vector<Polynomial> tuple_from_levels(const Levels& t, Backend backend) {
    std::vector<Polynomial> y;
    for (const auto& lv : t) {
        std::vector<Scalar> roots;
        for (const auto& s : lv) roots.push_back(s.to_backend(backend));
        y.push_back(Polynomial::from_roots(roots, backend));
    }
    return y;
}

CriticalPoint critical_point_from_space(const SpecialSpace& special) {
    const auto y = tuple_from_space(special);
    Levels t;
    for (const auto& p : y) {
        std::vector<Scalar> lv;
        if (p.degree() > 0)
            for (const auto& r : poly_roots(p.to_backend(Backend::Approx))) lv.push_back(r.value);
        t.push_back(canonical_levels({lv}).front());
    }
    const MasterSpec spec(special.lambda, special.z, special.n, special.m);
    return {t, critical_residual(spec, t), spec};
}

SpecialSpace space_from_critical_point(const CriticalPoint& cp) {
    if (!cp.spec) fail(ErrorCode::InvalidArgument, "critical point carries no master function data");
    return space_from_critical_point(*cp.spec, cp);
}

SpecialSpace space_from_critical_point(const MasterSpec& spec, const CriticalPoint& cp) {
    check_admissible(spec, cp.levels);
    Backend b = Backend::Exact;
    for (const auto& s : spec.lambda())
        if (s.backend() == Backend::Approx) b = Backend::Approx;
    for (const auto& s : spec.z())
        if (s.backend() == Backend::Approx) b = Backend::Approx;
    for (const auto& lv : cp.levels)
        for (const auto& s : lv)
            if (s.backend() == Backend::Approx) b = Backend::Approx;
    std::vector<Scalar> lambda, z;
    for (const auto& s : spec.lambda()) lambda.push_back(s.to_backend(b));
    for (const auto& s : spec.z()) z.push_back(s.to_backend(b));

    std::optional<MonicOperator> mono;
    try {
        mono = factorized_from_tuple(tuple_from_levels(cp.levels, b), lambda, z, spec.m());
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NotRegularizable) throw;
        fail(ErrorCode::KernelSolveFailed, std::string("orbit is not critical: ") + e.what());
    }
    Polynomial l = Polynomial::constant(Scalar::from_int(1, b));
    for (const auto& za : z) l *= Polynomial::linear(za);
    const DiffOperator d = mono->times(l);

    std::vector<QuasiPolynomial> gens;
    for (size_t i = 0; i < lambda.size(); ++i) {
        const Complex pd = predicted_degree(d, lambda[i]).to_complex();
        const long deg = std::lround(pd.real());
        if (std::abs(pd - Complex(static_cast<double>(deg), 0.0)) > 1e-6 || deg != spec.n()[i])
            fail(ErrorCode::KernelSolveFailed, "exponent data predicts degree " + std::to_string(pd.real()) + " at lambda_" +
                                                   std::to_string(i + 1) + ", expected " + std::to_string(spec.n()[i]));
        const auto ker = kernel_polynomials(d, lambda[i], static_cast<int>(deg));
        if (ker.size() != 1 || ker.front().degree() != deg)
            fail(ErrorCode::KernelSolveFailed, "no kernel element of degree " + std::to_string(deg) + " at lambda_" + std::to_string(i + 1));
        gens.push_back(QuasiPolynomial::term(RationalFunction(ker.front()), lambda[i]));
    }
    return classify_special(FunctionSpace(gens), z, lambda);
}

std::vector<Scalar> parameter_gradient(const MasterSpec& spec, const Levels& t) {
    check_admissible(spec, t);
    const auto lam = complexes(spec.lambda());
    const auto z = complexes(spec.z());
    const auto& m = spec.m();
    const int n = spec.N();
    std::vector<Complex> level_sum(static_cast<size_t>(n + 1), 0.0);  // level_sum[i] = sum_j t^{(i)}_j, 1-based
    for (size_t i = 0; i < t.size(); ++i)
        for (const auto& s : t[i]) level_sum[i + 1] += s.to_complex();
    std::vector<Scalar> out;
    for (int k = 1; k <= n; ++k) {
        Complex g = level_sum[static_cast<size_t>(k - 1)] - (k < n ? level_sum[static_cast<size_t>(k)] : 0.0);
        if (k == 1)
            for (size_t a = 0; a < z.size(); ++a) g += static_cast<double>(m[a]) * z[a];
        out.push_back(Scalar::approx(g));
    }
    for (size_t a = 0; a < z.size(); ++a) {
        Complex g = lam[0] * static_cast<double>(m[a]);
        for (size_t b = 0; b < z.size(); ++b)
            if (b != a) g += static_cast<double>(m[a] * m[b]) / (z[a] - z[b]);
        if (!t.empty())
            for (const auto& s : t[0]) g += static_cast<double>(m[a]) / (s.to_complex() - z[a]);
        out.push_back(Scalar::approx(g));
    }
    return out;
}

std::vector<Scalar> eigenvalue_gradient(const MasterSpec& spec, const Levels& t) {
    auto g = parameter_gradient(spec, t);
    const auto lam = complexes(spec.lambda());
    const auto& n = spec.n();
    for (size_t k = 0; k < lam.size(); ++k) {
        Complex shift = 0.0;
        for (size_t j = k + 1; j < lam.size(); ++j) shift -= static_cast<double>(n[j]) / (lam[k] - lam[j]);
        for (size_t i = 0; i < k; ++i) shift += static_cast<double>(n[k]) / (lam[i] - lam[k]);
        g[k] = Scalar::approx(g[k].to_complex() + shift);
    }
    return g;
}

LagrangeChain build_lagrange_chain(const MasterSpec& spec, const CriticalPoint& cp) {
    if (spec.N() != 2 || spec.M() != 2) fail(ErrorCode::InvalidArgument, "the Lagrange chain is defined for N = M = 2");
    SpecialSpace v = space_from_critical_point(spec, cp);
    const TransformResult r = special_bispectral_dual(v);
    SpecialSpace u = *r.special;
    auto roots_of = [](const Polynomial& p) {
        std::vector<Scalar> lv;
        if (p.degree() > 0)
            for (const auto& root : poly_roots(p.to_backend(Backend::Approx))) lv.push_back(root.value);
        return canonical_levels({lv});
    };
    const auto& lam = spec.lambda();
    const auto& n = spec.n();
    MasterSpec s2({lam[1], lam[0]}, spec.z(), {n[1], n[0]}, spec.m());
    MasterSpec s3 = spec.dual();
    CriticalPoint c1{canonical_levels(cp.levels), critical_residual(spec, cp.levels), spec};
    const Levels l2 = roots_of(v.p(0)), l3 = roots_of(u.p(1));
    CriticalPoint c2{l2, critical_residual(s2, l2), s2};
    CriticalPoint c3{l3, critical_residual(s3, l3), s3};
    return {{spec, s2, s3}, {c1, c2, c3}, std::move(v), std::move(u)};
}

LagrangeReport lagrange_match(const std::array<MasterSpec, 3>& specs, const std::array<CriticalPoint, 3>& cps, double tol) {
    const MasterSpec& s1 = specs[0];
    if (s1.N() != 2 || s1.M() != 2) fail(ErrorCode::InvalidArgument, "the Lagrange comparison is defined for N = M = 2");
    const auto& l = s1.lambda();
    const auto& z = s1.z();
    const bool shape2 = specs[1].lambda() == std::vector<Scalar>{l[1], l[0]} && specs[1].z() == z;
    const bool shape3 = specs[2].lambda() == z && specs[2].z() == l;
    if (!shape2 || !shape3)
        fail(ErrorCode::InvalidArgument, "specs must be Phi(.; l; z; m), Phi(.; l2, l1; z; m) and Phi(.; z; l; n)");

    LagrangeReport rep;
    // Named after the first function: the second has lambda reversed, the third swaps lambda and z.
    auto named = [&](const std::vector<Scalar>& g1, const std::vector<Scalar>& g2, const std::vector<Scalar>& g3) {
        std::array<std::array<Complex, 4>, 3> p{};
        p[0] = {g1[0].to_complex(), g1[1].to_complex(), g1[2].to_complex(), g1[3].to_complex()};
        p[1] = {g2[1].to_complex(), g2[0].to_complex(), g2[2].to_complex(), g2[3].to_complex()};
        p[2] = {g3[2].to_complex(), g3[3].to_complex(), g3[0].to_complex(), g3[1].to_complex()};
        return p;
    };
    auto spread = [](const std::array<std::array<Complex, 4>, 3>& p) {
        double out = 0.0;
        for (size_t k = 1; k < 3; ++k)
            for (size_t c = 0; c < 4; ++c) out = std::max(out, std::abs(p[k][c] - p[0][c]));
        return out;
    };
    rep.partials = named(eigenvalue_gradient(specs[0], cps[0].levels), eigenvalue_gradient(specs[1], cps[1].levels),
                         eigenvalue_gradient(specs[2], cps[2].levels));
    rep.raw_partials = named(parameter_gradient(specs[0], cps[0].levels), parameter_gradient(specs[1], cps[1].levels),
                             parameter_gradient(specs[2], cps[2].levels));
    rep.max_discrepancy = spread(rep.partials);
    rep.raw_discrepancy = spread(rep.raw_partials);
    rep.matched = rep.max_discrepancy <= tol;
    if (!rep.matched)
        fail(ErrorCode::CorrespondenceBroken, "parameter partials differ by " + std::to_string(rep.max_discrepancy));
    return rep;
}

}  // namespace bispectral
