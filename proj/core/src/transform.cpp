#include "bispectral/transform.hpp"

#include <algorithm>
#include <sstream>

namespace bispectral {

namespace {

char dual_variable(char v) { return v == 'u' ? 'x' : 'u'; }

bool scalar_less(const Scalar& a, const Scalar& b) {
    const Complex ca = a.to_complex(), cb = b.to_complex();
    if (ca.real() != cb.real()) return ca.real() < cb.real();
    return ca.imag() < cb.imag();
}

std::string describe(const FunctionSpace& space) {
    std::ostringstream os;
    os << "span{";
    for (size_t k = 0; k < space.basis().size(); ++k) os << (k ? ", " : "") << space.basis()[k].to_string();
    os << "}";
    return os.str();
}

TransformResult collect(std::vector<TransformComponent> comps, char variable, Backend backend, std::string provenance) {
    std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return scalar_less(a.point, b.point); });
    std::vector<QuasiPolynomial> gens;
    for (auto& c : comps) {
        std::erase_if(c.functions, [](const QuasiPolynomial& f) { return f.is_zero(); });
        std::sort(c.functions.begin(), c.functions.end(), [](const auto& a, const auto& b) {
            return a.coefficient().num().degree() < b.coefficient().num().degree();
        });
        gens.insert(gens.end(), c.functions.begin(), c.functions.end());
    }
    std::erase_if(comps, [](const TransformComponent& c) { return c.functions.empty(); });
    // The transforms at one point may be dependent; keep a spanning subset.
    std::vector<QuasiPolynomial> independent;
    for (const auto& g : gens) {
        independent.push_back(g);
        if (span_rank(independent) < static_cast<int>(independent.size())) independent.pop_back();
    }
    return {FunctionSpace(independent, variable, backend), std::move(comps), std::move(provenance), std::nullopt};
}

std::vector<int> degrees_in(const FunctionSpace& space, const Scalar& lambda) {
    std::vector<int> out;
    for (const auto& f : space.block(lambda)) out.push_back(f.coefficient().num().degree());
    return out;
}

std::string join(const std::vector<int>& v) {
    std::ostringstream os;
    os << "{";
    for (size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
    os << "}";
    return os.str();
}

}  // namespace

QuasiPolynomial contour_transform(const QuasiPolynomial& f, const Scalar& z0) {
    const Backend b = z0.backend();
    const char var = dual_variable(f.variable());
    QuasiPolynomial out(b, var);
    int poles = 0;
    for (const auto& term : f.terms()) {
        const int d = order_at(term.coeff.den(), z0) - order_at(term.coeff.num(), z0);
        if (d <= 0) continue;
        if (b == Backend::Exact && ++poles > 1 && !z0.is_zero())
            fail(ErrorCode::InvalidArgument, "exact residue of several exponent components away from 0");
        const QuasiPolynomial single = QuasiPolynomial::term(term.coeff, term.lambda, f.variable());
        // Orders -d..-1; the coefficient of (x-z0)^{-k-1} multiplies u^k / k!.
        const std::vector<Scalar> c = laurent_window(single, z0, -d, d);
        std::vector<Scalar> q(static_cast<size_t>(d), Scalar::from_int(0, b));
        for (int k = 0; k < d; ++k) q[static_cast<size_t>(k)] = c[static_cast<size_t>(d - 1 - k)] / factorial(k, b);
        const Polynomial p(std::move(q), b);
        if (p.is_zero()) continue;
        out += QuasiPolynomial::term(RationalFunction(p), z0, var);
    }
    return out;
}

TransformResult bispectral_dual(const FunctionSpace& space) { return bispectral_dual(space, singular_points(space)); }

TransformResult bispectral_dual(const FunctionSpace& space, const std::vector<ExponentSequence>& singular) {
    const FunctionSpace dag = regularized_conjugate(space, singular);
    int m_total = 0;
    std::vector<TransformComponent> comps;
    for (const auto& s : singular) {
        m_total += s.defect();
        TransformComponent c{s.point, {}};
        for (const auto& f : dag.basis()) c.functions.push_back(contour_transform(f, s.point));
        comps.push_back(std::move(c));
    }
    TransformResult r = collect(std::move(comps), dual_variable(space.variable()), space.backend(), "dual of " + describe(space));
    if (r.dual_space.dimension() != m_total)
        fail(ErrorCode::DualityViolation, "dual space has dimension " + std::to_string(r.dual_space.dimension()) +
                                              ", expected M = " + std::to_string(m_total));
    return r;
}

TransformResult special_bispectral_dual(const SpecialSpace& special) {
    const FunctionSpace star = conjugate(special.space);
    const Backend b = special.space.backend();
    Polynomial l = Polynomial::constant(Scalar::from_int(1, b));
    for (const auto& z : special.z) l *= Polynomial::linear(z);
    const RationalFunction inv(Polynomial::constant(Scalar::from_int(1, b)), l);
    std::vector<TransformComponent> comps;
    for (const auto& z : special.z) {
        TransformComponent c{z, {}};
        for (const auto& f : star.basis()) c.functions.push_back(contour_transform(f * inv, z));
        comps.push_back(std::move(c));
    }
    TransformResult r = collect(std::move(comps), dual_variable(special.space.variable()), b,
                                "special dual of " + describe(special.space));
    if (r.dual_space.dimension() != special.M())
        fail(ErrorCode::DualityViolation, "special dual has dimension " + std::to_string(r.dual_space.dimension()) +
                                              ", expected M = " + std::to_string(special.M()));
    SpecialSpace u = classify_special(r.dual_space, special.lambda, special.z);
    if (u.n != special.m || u.m != special.n)
        fail(ErrorCode::DualityViolation, "special dual does not swap the degree data");
    r.special = std::move(u);
    return r;
}

std::vector<DualityCheck> verify_bispectral_dual(const FunctionSpace& space, const TransformResult& result) {
    std::vector<DualityCheck> out;
    const FunctionSpace& u = result.dual_space;
    const auto sing = singular_points(space);
    const int n = space.dimension();

    int m_total = 0;
    for (const auto& s : sing) m_total += s.defect();
    out.push_back({"dimension", u.dimension() == m_total,
                   "dim U = " + std::to_string(u.dimension()) + ", M = " + std::to_string(m_total)});

    bool degrees_ok = true;
    std::string degrees_detail;
    for (const auto& s : sing) {
        std::vector<int> expected;
        for (int b = 0; b < s.defect(); ++b) expected.push_back(s.exponents[static_cast<size_t>(n - s.defect() + b)] - (n - s.defect()));
        const std::vector<int> got = degrees_in(u, s.point);
        if (got != expected) {
            degrees_ok = false;
            degrees_detail += "at " + s.point.to_string() + ": " + join(got) + " vs " + join(expected) + "; ";
        }
    }
    out.push_back({"component degrees", degrees_ok, degrees_ok ? "deg q_ab = m_ab" : degrees_detail});

    const DiffOperator dv = regularize(monic_fundamental(space), sing);
    const auto sing_u = singular_points(u);
    const DiffOperator du = regularize(monic_fundamental(u), sing_u);
    out.push_back({"operator swap", equal_up_to_scalar(du, bispectral_swap(dv)), "D_U vs swap(D_V)"});

    const auto lambdas = space.exponents();
    bool subset = true;
    for (const auto& s : sing_u)
        if (std::none_of(lambdas.begin(), lambdas.end(), [&](const Scalar& l) { return l == s.point; })) subset = false;
    out.push_back({"singular points", subset, std::to_string(sing_u.size()) + " singular points of U"});

    bool exps_ok = true;
    std::string exps_detail;
    const int m = u.dimension();
    const auto mults = space.multiplicities();
    for (size_t i = 0; i < lambdas.size(); ++i) {
        const int ni = mults[i];
        std::vector<int> expected;
        for (int k = 0; k < m - ni; ++k) expected.push_back(k);
        for (int d : degrees_in(space, lambdas[i])) expected.push_back(m - ni + d);
        std::sort(expected.begin(), expected.end());
        const std::vector<int> got = exponents_at(u, lambdas[i]).exponents;
        if (got != expected) {
            exps_ok = false;
            exps_detail += "at " + lambdas[i].to_string() + ": " + join(got) + " vs " + join(expected) + "; ";
        }
    }
    out.push_back({"exponents of U", exps_ok, exps_ok ? "predicted exponents at every lambda" : exps_detail});
    return out;
}

std::vector<DualityCheck> verify_special_dual(const SpecialSpace& special, const TransformResult& result) {
    std::vector<DualityCheck> out;
    const FunctionSpace& u = result.dual_space;
    out.push_back({"dimension", u.dimension() == special.M(),
                   "dim U = " + std::to_string(u.dimension()) + ", M = " + std::to_string(special.M())});
    std::optional<SpecialSpace> us;
    try {
        us = classify_special(u, special.lambda, special.z);
    } catch (const Error& e) {
        out.push_back({"type", false, e.what()});
        return out;
    }
    out.push_back({"type", true, "(U, lambda) is of the (z, lambda, m, n)-type"});
    out.push_back({"swapped degrees", us->n == special.m && us->m == special.n,
                   "n' = " + join(us->n) + ", m' = " + join(us->m)});
    const DiffOperator dv = special_fundamental(special);
    const DiffOperator du = special_fundamental(*us);
    out.push_back({"operator swap", equal_up_to_scalar(du, bispectral_swap(dv)), "special D_U vs swap(special D_V)"});
    return out;
}

}  // namespace bispectral
