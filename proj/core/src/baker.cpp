#include "bispectral/baker.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bispectral {

namespace {

constexpr double kPoleGuard = 1e-12;

// Dbar_V with its exponent data, computed once per space.
struct BakerData {
    std::vector<RationalFunction> bars;  ///< bar_0 = 1, ..., bar_N
    std::vector<Complex> exponents;
    std::vector<int> multiplicities;
    std::vector<Complex> poles;  ///< roots of the coefficient denominators
};

BakerData baker_data(const FunctionSpace& space) {
    BakerData d;
    for (const auto& e : space.exponents()) d.exponents.push_back(e.to_complex());
    d.multiplicities = space.multiplicities();
    if (space.dimension() == 0) {
        d.bars.push_back(RationalFunction::constant(Scalar::from_int(1, space.backend())));
        return d;
    }
    d.bars = monic_fundamental(space).bars();
    for (const auto& b : d.bars) {
        if (b.den().degree() <= 0) continue;
        for (const auto& r : poly_roots(b.den().to_backend(Backend::Approx))) d.poles.push_back(r.value.to_complex());
    }
    return d;
}

BakerValue evaluate(const BakerData& d, Complex x, Complex xi) {
    const int N = static_cast<int>(d.bars.size()) - 1;
    Complex sum = 0.0;
    for (int i = 0; i <= N; ++i) {
        const auto& b = d.bars[static_cast<size_t>(i)];
        const Complex den = b.den().eval(x);
        if (std::abs(den) <= kPoleGuard * std::max(1.0, b.den().max_abs()))
            fail(ErrorCode::PoleHit, "x is a pole of the monic operator");
        sum += b.num().eval(x) / den * std::pow(xi, N - i);
    }
    Complex denom = 1.0;
    for (size_t k = 0; k < d.exponents.size(); ++k) {
        const Complex f = xi - d.exponents[k];
        if (std::abs(f) <= kPoleGuard * std::max(1.0, std::abs(xi))) fail(ErrorCode::PoleHit, "xi is an exponent of the space");
        denom *= std::pow(f, d.multiplicities[k]);
    }
    const Complex psi = sum / denom;
    return {psi * std::exp(x * xi), psi};
}

double distance_to(const std::vector<Complex>& pts, Complex w) {
    double best = INFINITY;
    for (const auto& p : pts) best = std::min(best, std::abs(p - w));
    return best;
}

}  // namespace

int AdmissibleSubspace::condition_count() const {
    int total = 0;
    for (const auto& c : conditions) total += static_cast<int>(c.size());
    return total;
}

bool AdmissibleSubspace::contains(const Polynomial& r) const {
    for (size_t i = 0; i < points.size(); ++i) {
        for (const auto& cond : conditions[i]) {
            Scalar sum = Scalar::from_int(0, r.backend());
            double scale = 0.0;
            for (size_t a = 0; a < cond.size(); ++a) {
                const Scalar term = cond[a] * r.derivative(static_cast<int>(a))(points[i]);
                sum += term;
                scale += term.abs();
            }
            if (sum.backend() == Backend::Exact ? !sum.is_zero() : sum.abs() > 1e-9 * std::max(1.0, scale)) return false;
        }
    }
    return true;
}

AdmissibleSubspace space_to_subspace(const FunctionSpace& space) {
    AdmissibleSubspace w;
    for (const auto& lambda : space.exponents()) {
        w.points.push_back(lambda);
        std::vector<std::vector<Scalar>> conds;
        for (const auto& f : space.block(lambda)) {
            const RationalFunction& c = f.coefficient();
            if (!c.is_polynomial()) fail(ErrorCode::NonPolynomialCoefficients, "basis coefficient " + c.to_string() + " is not a polynomial");
            conds.push_back(c.to_polynomial().coeffs());
        }
        w.conditions.push_back(std::move(conds));
    }
    return w;
}

FunctionSpace subspace_to_space(const AdmissibleSubspace& w, char variable) {
    if (w.points.size() != w.conditions.size()) fail(ErrorCode::InvalidArgument, "one condition list per point expected");
    std::vector<QuasiPolynomial> gens;
    Backend be = Backend::Exact;
    for (size_t i = 0; i < w.points.size(); ++i) {
        be = w.points[i].backend();
        for (const auto& cond : w.conditions[i]) {
            if (cond.empty() || cond.back().is_zero()) fail(ErrorCode::InvalidArgument, "condition with zero top coefficient");
            gens.push_back(QuasiPolynomial::term(RationalFunction(Polynomial(cond)), w.points[i], variable));
        }
    }
    return FunctionSpace(gens, variable, be);
}

BakerValue baker_function(const FunctionSpace& space, const Scalar& x0, const Scalar& xi0) {
    return evaluate(baker_data(space), x0.to_complex(), xi0.to_complex());
}

InvolutionReport verify_involution(const FunctionSpace& v, const FunctionSpace& u, const BakerGrid& grid, double tol) {
    InvolutionReport rep;
    if (grid.size < 1 || !(grid.hi >= grid.lo)) fail(ErrorCode::InvalidArgument, "grid needs at least one node and lo <= hi");
    if (u.dimension() == 0) {
        rep.vacuous = true;
        rep.passed = true;
        return rep;
    }
    const BakerData dv = baker_data(v), du = baker_data(u);
    std::mt19937_64 rng(grid.seed);
    std::uniform_real_distribution<double> jit(-grid.jitter, grid.jitter);
    const double step = grid.size > 1 ? (grid.hi - grid.lo) / (grid.size - 1) : 0.0;
    for (int k = 0; k < grid.size; ++k) {
        for (int l = 0; l < grid.size; ++l) {
            const double x = grid.lo + step * k + jit(rng);
            const double xi = grid.lo + step * l + jit(rng);
            // psi_V(xi, x) has position xi and spectral x; psi_U(x, xi) the other way round.
            const bool near = distance_to(dv.poles, xi) < grid.pole_distance || distance_to(dv.exponents, x) < grid.pole_distance ||
                              distance_to(du.poles, x) < grid.pole_distance || distance_to(du.exponents, xi) < grid.pole_distance;
            if (near) {
                ++rep.skipped;
                continue;
            }
            InvolutionSample s{x, xi, {}, {}, 0.0};
            try {
                s.psi_u = evaluate(du, x, xi).psi;
                s.psi_v = evaluate(dv, xi, x).psi;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::PoleHit) throw;
                ++rep.skipped;
                continue;
            }
            s.deviation = std::abs(s.psi_u - s.psi_v) / std::max(1.0, std::abs(s.psi_v));
            rep.max_deviation = std::max(rep.max_deviation, s.deviation);
            rep.samples.push_back(s);
        }
    }
    rep.passed = !rep.samples.empty() && rep.max_deviation <= tol;
    return rep;
}

InvolutionReport verify_involution(const FunctionSpace& v, const BakerGrid& grid, double tol) {
    if (singular_points(v).empty()) {
        InvolutionReport rep;
        rep.vacuous = true;
        rep.passed = true;
        return rep;
    }
    return verify_involution(v, bispectral_dual(v).dual_space, grid, tol);
}

}  // namespace bispectral
