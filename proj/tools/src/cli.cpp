#include "cli.hpp"

#include <openssl/evp.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "bispectral/baker.hpp"
#include "bispectral/gaudin.hpp"

namespace bispectral::cli {

using io::Json;

std::string digest(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

Report::Report(std::string command) : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

void Report::add_input(const std::string& name, const std::string& bytes) {
    inputs_[name] = Json{{"sha256", digest(bytes)}, {"bytes", bytes.size()}};
}

void Report::check(const std::string& name, const std::string& clause, double residual, double tolerance, std::string detail) {
    checks_.push_back({name, clause, residual <= tolerance, residual, tolerance, std::move(detail)});
}

void Report::check(const std::string& name, const std::string& clause, bool passed, std::string detail) {
    checks_.push_back({name, clause, passed, passed ? 0.0 : 1.0, 0.0, std::move(detail)});
}

bool Report::passed() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const CheckRecord& c) { return c.passed; });
}

Json Report::to_json() const {
    Json checks = Json::array();
    for (const auto& c : checks_) {
        Json j{{"name", c.name}, {"clause", c.clause}, {"status", c.passed ? "pass" : "fail"}};
        // Non-finite residuals have no JSON number form.
        j["residual"] = std::isfinite(c.residual) ? Json(c.residual) : Json(nullptr);
        j["tolerance"] = c.tolerance;
        if (!c.detail.empty()) j["detail"] = c.detail;
        checks.push_back(std::move(j));
    }
    const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    return Json{{"command", command_},   {"inputs", inputs_},
                {"options", options_},   {"checks", checks},
                {"status", passed() ? "pass" : "fail"},
                {"result", result_},     {"timing", Json{{"elapsed_ms", elapsed}}}};
}

namespace {

struct Global {
    double tol = NAN;
    bool exact = false;
    std::uint64_t seed = 0;
    std::string out;
};

double tol_or(const Global& g, double fallback) { return std::isnan(g.tol) ? fallback : g.tol; }

std::shared_ptr<spdlog::logger> logger() {
    auto log = spdlog::get("bispectral");
    if (!log) {
        log = spdlog::stderr_logger_mt("bispectral");
        log->set_pattern("[%l] %v");
        const char* env = std::getenv("BISPECTRAL_LOG");
        const std::string level = env ? env : "error";
        if (level == "debug")
            log->set_level(spdlog::level::debug);
        else if (level == "info")
            log->set_level(spdlog::level::info);
        else
            log->set_level(spdlog::level::err);
        if (level != "debug" && level != "info" && level != "error") log->error("unknown BISPECTRAL_LOG level \"{}\", using error", level);
    }
    return log;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::ParseError, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Json load(Report& rep, const std::string& role, const std::string& path) {
    const std::string bytes = slurp(path);
    rep.add_input(role, bytes);
    try {
        return Json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, path + ": " + e.what());
    }
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::setprecision(3) << v;
    return os.str();
}

Json complex_json(Complex c) { return io::to_json(Scalar::approx(c)); }

Json matrix_json(const Matrix& m) {
    Json a = Json::array();
    for (const auto& row : m) a.push_back(io::to_json(row));
    return a;
}

bool is_check_failure(ErrorCode c) {
    return c == ErrorCode::DualityViolation || c == ErrorCode::CorrespondenceBroken || c == ErrorCode::MaxStartsExceeded ||
           c == ErrorCode::PossiblyNonGeneric;
}

// ---- shared check groups ---------------------------------------------------

std::string transform_clause(const std::string& name) {
    static const std::map<std::string, std::string> clauses = {
        {"dimension", "the dual space has the predicted dimension"},
        {"component degrees", "each residue component has the predicted degree"},
        {"operator swap", "the dual operator is the anti-isomorphic image of the original up to a scalar"},
        {"singular points", "singular points of the dual lie among the exponents of the original"},
        {"exponents of U", "exponents of the dual at every point match the predicted sets"},
        {"type", "the dual of a special space is special of the exchanged type"},
        {"swapped degrees", "the degree data n and m are exchanged by the transform"},
    };
    const auto it = clauses.find(name);
    return it == clauses.end() ? "property of the bispectral transform" : it->second;
}

void duality_checks(Report& rep, const std::string& prefix, const DualityReport2x2& d, double tol) {
    rep.check(prefix + "c_i = d_{m2-i}", "expansion of p_2 matches that of p_1 after the Weyl reflection, up to scale", d.cd_deviation, tol);
    rep.check(prefix + "c_i = e_i", "expansion of p_2 matches that of the dual q_2, up to scale", d.ce_deviation, tol);
    rep.check(prefix + "recurrence for c", "three-term recurrence satisfied by the p_2 expansion", d.recurrence_c, tol);
    rep.check(prefix + "second symmetry on c", "p_1 recurrence read through the Weyl index map", d.recurrence_second, tol);
    rep.check(prefix + "recurrence for d", "three-term recurrence satisfied by the p_1 expansion", d.recurrence_d, tol);
    rep.check(prefix + "recurrence for e", "three-term recurrence satisfied by the dual expansion", d.recurrence_e, tol);
    rep.check(prefix + "Weyl identification", "Bethe vectors of p_2 and p_1 agree under the Weyl isomorphism", d.weyl_deviation, tol);
    rep.check(prefix + "duality identification", "Bethe vectors of both sides agree under the duality isomorphism", d.duality_deviation,
              tol);
}

// Eigenvector and Lagrange checks for an N = M = 2 orbit.
Json orbit_checks_2x2(Report& rep, const std::string& prefix, const MasterSpec& spec, const CriticalPoint& cp, double tol) {
    const HamiltonianSet hs = hamiltonians(build_weight_basis(2, 2, spec.m(), spec.n()), spec.lambda(), spec.z());
    const BetheVector2x2 bv = bethe_vector_2x2(cp, spec.m(), spec.z());
    const std::vector<Scalar> values = eigenvalue_gradient(spec, cp.levels);
    const EigenvectorCheck ev = eigenvector_check(hs, bv.vector, values);
    rep.check(prefix + "KZ eigenvector", "the Bethe vector is an eigenvector of every H_a with eigenvalue d log Phi / d z_a",
              ev.h_residual, tol);
    rep.check(prefix + "dynamical eigenvector", "the Bethe vector is an eigenvector of every G_i with the normalized lambda-derivative",
              ev.g_residual, tol);
    const LagrangeChain chain = build_lagrange_chain(spec, cp);
    const LagrangeReport lr = lagrange_match(chain.specs, chain.points, INFINITY);
    rep.check(prefix + "Lagrange match", "parameter partials of the three master functions agree at corresponding critical points",
              lr.max_discrepancy, tol);
    Json values_json = Json::array();
    for (const auto& v : values) values_json.push_back(io::to_json(v));
    return Json{{"eigenvalues", values_json},
                {"bethe_vector", io::to_json(bv.vector)},
                {"lagrange_discrepancy", lr.max_discrepancy},
                {"lagrange_raw_discrepancy", lr.raw_discrepancy}};
}

Json point_json(const CriticalPoint& cp) { return Json{{"levels", io::to_json(cp.levels)}, {"residual", cp.residual}}; }

// ---- commands ---------------------------------------------------------------

struct TransformArgs {
    std::string input;
    bool special = false;
    std::string output;
    std::string report;
};

Report cmd_transform(const Global& g, const TransformArgs& a) {
    Report rep("transform");
    rep.set_option("special", a.special);
    const io::SpaceFile f = io::space_from_json(load(rep, "input", a.input));
    if (g.exact && f.space.backend() != Backend::Exact) fail(ErrorCode::InvalidArgument, "--exact given but the input has approximate entries");
    logger()->info("transform: dimension {}, special {}", f.space.dimension(), a.special);

    std::optional<io::SpaceFile> dual;
    if (a.special) {
        const SpecialSpace v = io::special_from_file(f);
        const TransformResult r = special_bispectral_dual(v);
        for (const auto& c : verify_special_dual(v, r)) rep.check("special dual: " + c.name, transform_clause(c.name), c.passed, c.detail);
        const TransformResult back = special_bispectral_dual(*r.special);
        rep.check("involution", "applying the special transform twice returns the original space", span_equal(back.dual_space, v.space));
        dual = io::file_of(*r.special);
        rep.result()["provenance"] = r.provenance;
    } else {
        std::string low;
        for (const auto& lambda : f.space.exponents())
            for (const auto& g : f.space.block(lambda))
                if (g.coefficient().is_polynomial() && g.coefficient().to_polynomial().degree() <= 0) low = "degree-0 generator at " + lambda.to_string();
        rep.check("positive degrees", "every generator p e^{lambda x} has deg p > 0, as the general duality statements require", low.empty(), low);
        const TransformResult r = bispectral_dual(f.space);
        for (const auto& c : verify_bispectral_dual(f.space, r)) rep.check("dual: " + c.name, transform_clause(c.name), c.passed, c.detail);
        const TransformResult back = bispectral_dual(r.dual_space);
        rep.check("involution", "applying the transform twice returns the original space", span_equal(back.dual_space, f.space));
        dual = io::SpaceFile{r.dual_space, std::nullopt, std::nullopt};
        rep.result()["provenance"] = r.provenance;
    }
    rep.result()["dual"] = io::to_json(*dual);
    if (!a.output.empty()) io::write_json_file(a.output, io::to_json(*dual));
    return rep;
}

struct SolveArgs {
    std::string spec;
    int starts = 0;
    bool require_bound = false;
};

MasterSpec spec_of(const Json& j) { return io::spec_from_json(j.contains("spec") ? j.at("spec") : j); }

Report cmd_bethe_solve(const Global& g, const SolveArgs& a) {
    Report rep("bethe solve");
    const MasterSpec spec = spec_of(load(rep, "spec", a.spec));
    BetheOptions o;
    o.starts = a.starts;
    o.seed = g.seed;
    o.require_bound = a.require_bound;
    rep.set_option("seed", g.seed);
    rep.set_option("starts", a.starts);
    rep.set_option("require_bound", a.require_bound);
    const BetheSolution sol = solve_bethe(spec, o);
    logger()->info("bethe solve: {} orbits, bound {}, {} starts", sol.points.size(), sol.bound, sol.starts_used);

    const double tol = tol_or(g, 1e-9);
    Json points = Json::array();
    for (size_t k = 0; k < sol.points.size(); ++k) {
        const auto& cp = sol.points[k];
        rep.check("critical residual [" + std::to_string(k) + "]", "the orbit solves the critical point equations", cp.residual, tol);
        points.push_back(point_json(cp));
    }
    rep.check("orbit count within bound", "the number of orbits is at most the weight-space dimension", sol.points.size() <= sol.bound,
              std::to_string(sol.points.size()) + " of " + std::to_string(sol.bound));
    rep.result() = Json{{"spec", io::to_json(spec)},          {"points", points},
                        {"bound", sol.bound},                  {"bound_attained", sol.bound_attained},
                        {"generic_lambda", sol.generic_lambda}, {"starts_used", sol.starts_used}};
    return rep;
}

Report cmd_bethe_verify(const Global& g, const std::string& path) {
    Report rep("bethe verify");
    const Json doc = load(rep, "points", path);
    const Json& body = doc.contains("result") ? doc.at("result") : doc;
    if (!body.contains("spec") || !body.contains("points")) fail(ErrorCode::ParseError, "points file needs \"spec\" and \"points\"");
    const MasterSpec spec = io::spec_from_json(body.at("spec"));
    const double tol = tol_or(g, 1e-8);
    const bool two_by_two = spec.N() == 2 && spec.M() == 2;
    std::optional<HamiltonianSet> hs;
    if (!two_by_two) hs = hamiltonians(build_weight_basis(spec.N(), spec.M(), spec.m(), spec.n()), spec.lambda(), spec.z());

    Json out = Json::array();
    size_t k = 0;
    for (const auto& pj : body.at("points")) {
        const std::string tag = "[" + std::to_string(k++) + "] ";
        CriticalPoint cp{io::levels_from_json(pj.is_object() ? pj.at("levels") : pj), 0.0, spec};
        try {
            check_admissible(spec, cp.levels);
        } catch (const Error& e) {
            rep.check(tag + "admissible", "the orbit is admissible", false, e.what());
            out.push_back(Json{{"admissible", false}});
            continue;
        }
        rep.check(tag + "admissible", "the orbit is admissible", true);
        cp.residual = critical_residual(spec, cp.levels);
        rep.check(tag + "critical residual", "the orbit solves the critical point equations", cp.residual, tol);
        Json entry{{"admissible", true}, {"residual", cp.residual}};
        // Eigenvector data is only defined at critical points.
        if (!(cp.residual <= tol)) {
            out.push_back(std::move(entry));
            continue;
        }
        if (two_by_two) {
            entry.update(orbit_checks_2x2(rep, tag, spec, cp, tol));
        } else {
            const JointEigenvector w = joint_eigenvector(*hs, eigenvalue_gradient(spec, cp.levels));
            rep.check(tag + "joint eigenvalues", "the gradient of log Phi is a joint eigenvalue of the KZ and dynamical Hamiltonians",
                      w.residual, tol);
            entry["eigen_residual"] = w.residual;
        }
        out.push_back(std::move(entry));
    }
    rep.result() = Json{{"spec", io::to_json(spec)}, {"points", out}};
    return rep;
}

struct SpectrumArgs {
    int N = 0;
    int M = 0;
    std::vector<int> m;
    std::vector<int> n;
    std::string lambda;
    std::string z;
};

Report cmd_gaudin_spectrum(const Global& g, const SpectrumArgs& a) {
    Report rep("gaudin spectrum");
    const auto lambda = io::parse_scalar_list(a.lambda, g.exact);
    const auto z = io::parse_scalar_list(a.z, g.exact);
    if (static_cast<int>(lambda.size()) != a.N || static_cast<int>(z.size()) != a.M)
        fail(ErrorCode::InvalidArgument, "--lambda needs N entries and --z needs M entries");
    rep.set_option("N", a.N);
    rep.set_option("M", a.M);
    rep.set_option("m", a.m);
    rep.set_option("n", a.n);
    rep.set_option("lambda", io::to_json(lambda));
    rep.set_option("z", io::to_json(z));
    rep.set_option("exact", g.exact);
    rep.set_option("seed", g.seed);
    const WeightBasis basis = build_weight_basis(a.N, a.M, a.m, a.n);
    const HamiltonianSet hs = hamiltonians(basis, lambda, z);
    const double tol = g.exact ? 0.0 : tol_or(g, 1e-9);
    const std::uint64_t dim = weight_dimension(a.N, a.M, a.m, a.n);
    rep.check("basis dimension", "the monomial basis spans the whole weight space", basis.size() == dim, std::to_string(dim));
    rep.check("commutators", "the KZ and dynamical Hamiltonians pairwise commute", max_commutator(hs), tol);
    const DualityMap dm = duality_isomorphism(a.N, a.M, a.m, a.n);
    rep.check("interchange", "the duality isomorphism exchanges KZ and dynamical Hamiltonians", check_interchange(dm, lambda, z).max_deviation,
              tol);

    Json basis_json = Json::array();
    for (const auto& e : basis.basis) basis_json.push_back(e);
    Json H = Json::array(), G = Json::array();
    for (const auto& h : hs.H) H.push_back(matrix_json(h));
    for (const auto& x : hs.G) G.push_back(matrix_json(x));
    rep.result() = Json{{"dimension", dim}, {"basis", basis_json}, {"H", H}, {"G", G}};
    if (basis.size() > 0) {
        const JointSpectrum js = joint_spectrum(hs, g.seed);
        rep.check("joint spectrum", "a common eigenbasis of all Hamiltonians exists at generic parameters", js.residual,
                  tol_or(g, 1e-8));
        Json values = Json::array();
        for (const auto& row : js.values) {
            Json r = Json::array();
            for (const auto& c : row) r.push_back(complex_json(c));
            values.push_back(std::move(r));
        }
        rep.result()["spectrum"] = values;
    }
    return rep;
}

Report cmd_verify_duality(const Global& g, const std::string& path) {
    Report rep("gaudin verify-duality");
    const Json inst = load(rep, "instance", path);
    const double tol = tol_or(g, 1e-8);
    std::vector<std::pair<SpecialSpace, std::optional<CriticalPoint>>> cases;
    if (inst.contains("space") || inst.contains("basis")) {
        cases.emplace_back(io::special_from_file(io::space_from_json(inst.contains("space") ? inst.at("space") : inst)), std::nullopt);
    } else if (inst.contains("spec")) {
        const MasterSpec spec = io::spec_from_json(inst.at("spec"));
        std::vector<CriticalPoint> cps;
        if (inst.contains("point")) {
            cps.push_back({io::levels_from_json(inst.at("point")), 0.0, spec});
        } else if (inst.contains("points")) {
            for (const auto& p : inst.at("points")) cps.push_back({io::levels_from_json(p.is_object() ? p.at("levels") : p), 0.0, spec});
        } else {
            BetheOptions o;
            o.seed = g.seed;
            cps = solve_bethe(spec, o).points;
        }
        for (auto& cp : cps) {
            check_admissible(spec, cp.levels);
            cp.residual = critical_residual(spec, cp.levels);
            cases.emplace_back(space_from_critical_point(spec, cp), cp);
        }
    } else {
        fail(ErrorCode::ParseError, "instance needs \"space\" or \"spec\"");
    }

    Json out = Json::array();
    for (size_t k = 0; k < cases.size(); ++k) {
        const auto& [v, given] = cases[k];
        if (v.N() != 2 || v.M() != 2) fail(ErrorCode::InvalidArgument, "verify-duality covers N = M = 2; use `gaudin conjecture` otherwise");
        const std::string tag = "[" + std::to_string(k) + "] ";
        const DualityReport2x2 d = duality_report_2x2(v, tol);
        duality_checks(rep, tag, d, tol);
        const MasterSpec spec(v.lambda, v.z, v.n, v.m);
        const CriticalPoint cp = given ? *given : critical_point_from_space(v);
        Json entry{{"levels", io::to_json(cp.levels)}, {"c", io::to_json(d.c)}, {"d", io::to_json(d.d)}, {"e", io::to_json(d.e)}};
        entry["worst_index"] = d.worst_index;
        entry.update(orbit_checks_2x2(rep, tag, spec, cp, tol));
        out.push_back(std::move(entry));
    }
    rep.result() = Json{{"cases", out}};
    return rep;
}

Report cmd_conjecture(const Global& g, const std::string& path, int starts) {
    Report rep("gaudin conjecture");
    const MasterSpec spec = spec_of(load(rep, "spec", path));
    BetheOptions o;
    o.seed = g.seed;
    o.starts = starts;
    rep.set_option("seed", g.seed);
    const ConjectureReport cr = conjecture_report(spec, o);
    const double tol = tol_or(g, 1e-8);
    Json entries = Json::array();
    for (size_t k = 0; k < cr.entries.size(); ++k) {
        const auto& e = cr.entries[k];
        const std::string tag = "[" + std::to_string(k) + "] ";
        rep.check(tag + "eigenvector", "the predicted eigenvalues admit a joint eigenvector", e.eigen_residual, tol);
        rep.check(tag + "dual eigenvector", "the dual predicted eigenvalues admit a joint eigenvector", e.dual_eigen_residual, tol);
        rep.check(tag + "eigenvalue exchange", "KZ eigenvalues of one side equal dynamical eigenvalues of the other", e.eigenvalue_mismatch,
                  tol);
        rep.check(tag + "vector exchange", "the duality isomorphism carries one Bethe vector to the other, up to scale", e.proportionality,
                  tol);
        entries.push_back(Json{{"point", io::to_json(e.point)}, {"dual_point", io::to_json(e.dual_point)}});
    }
    rep.result() = Json{{"experimental", true}, {"spec", io::to_json(spec)}, {"dimension", cr.dimension}, {"entries", entries}};
    return rep;
}

Report cmd_baker_verify(const Global& g, const std::string& path, int grid_size) {
    Report rep("baker verify");
    const io::SpaceFile f = io::space_from_json(load(rep, "space", path));
    BakerGrid grid;
    grid.size = grid_size;
    grid.seed = g.seed;
    rep.set_option("grid", grid_size);
    rep.set_option("seed", g.seed);
    const double tol = tol_or(g, 1e-9);
    InvolutionReport ir;
    if (f.z) {
        const SpecialSpace v = io::special_from_file(f);
        ir = verify_involution(v.space, special_bispectral_dual(v).dual_space, grid, tol);
    } else {
        ir = verify_involution(f.space, grid, tol);
    }
    const std::string detail = ir.vacuous ? "no singular points" : std::to_string(ir.samples.size()) + " samples, " +
                                                                        std::to_string(ir.skipped) + " skipped";
    if (!ir.vacuous && ir.samples.empty())
        rep.check("baker involution", "psi_U(x, xi) = psi_V(xi, x) for a dual pair", false, "every grid node was skipped");
    else
        rep.check("baker involution", "psi_U(x, xi) = psi_V(xi, x) for a dual pair", ir.max_deviation, tol, detail);
    Json samples = Json::array();
    for (const auto& s : ir.samples)
        samples.push_back(Json{{"x", s.x}, {"xi", s.xi}, {"psi_u", complex_json(s.psi_u)}, {"psi_v", complex_json(s.psi_v)}, {"deviation", s.deviation}});
    rep.result() = Json{{"vacuous", ir.vacuous}, {"skipped", ir.skipped}, {"max_deviation", ir.max_deviation}, {"samples", samples}};
    return rep;
}

Report cmd_demo(const Global& g) {
    Report rep("demo");
    rep.set_option("seed", g.seed);
    const std::vector<Scalar> lambda = {Scalar::exact(0), Scalar::exact(1)};
    const std::vector<Scalar> z = {Scalar::exact(0), Scalar::exact(1)};
    const MasterSpec spec(lambda, z, {1, 1}, {1, 1});
    const double tol = tol_or(g, 1e-8);

    const HamiltonianSet hs = hamiltonians(build_weight_basis(2, 2, spec.m(), spec.n()), lambda, z);
    rep.check("commutators", "the KZ and dynamical Hamiltonians pairwise commute", max_commutator(hs), 0.0);
    rep.check("interchange", "the duality isomorphism exchanges KZ and dynamical Hamiltonians",
              check_interchange(duality_isomorphism(2, 2, spec.m(), spec.n()), lambda, z).max_deviation, 0.0);

    BetheOptions o;
    o.seed = g.seed;
    const BetheSolution sol = solve_bethe(spec, o);
    rep.check("orbit count", "the number of orbits equals the weight-space dimension", sol.points.size() == sol.bound,
              std::to_string(sol.points.size()) + " of " + std::to_string(sol.bound));
    // t^2 - 3t + 1 = 0
    const std::array<double, 2> roots = {(3.0 - std::sqrt(5.0)) / 2.0, (3.0 + std::sqrt(5.0)) / 2.0};
    Json orbits = Json::array();
    for (size_t k = 0; k < sol.points.size(); ++k) {
        const auto& cp = sol.points[k];
        const std::string tag = "[" + std::to_string(k) + "] ";
        const Complex t = cp.levels.at(0).at(0).to_complex();
        const double off = std::min(std::abs(t - roots[0]), std::abs(t - roots[1]));
        rep.check(tag + "orbit value", "the orbit is a root of t^2 - 3t + 1", off, 1e-10);
        rep.check(tag + "critical residual", "the orbit solves the critical point equations", cp.residual, 1e-10);

        const SpecialSpace v = space_from_critical_point(spec, cp);
        const TransformResult r = special_bispectral_dual(v);
        for (const auto& c : verify_special_dual(v, r)) rep.check(tag + "special dual: " + c.name, transform_clause(c.name), c.passed, c.detail);
        const TransformResult back = special_bispectral_dual(*r.special);
        rep.check(tag + "involution", "applying the special transform twice returns the original space", span_equal(back.dual_space, v.space));
        duality_checks(rep, tag, duality_report_2x2(v, tol), tol);
        Json entry = point_json(cp);
        entry.update(orbit_checks_2x2(rep, tag, spec, cp, tol));
        const InvolutionReport ir = verify_involution(v.space, r.dual_space, BakerGrid{5, 2.0, 6.0, g.seed}, 1e-9);
        rep.check(tag + "baker involution", "psi_U(x, xi) = psi_V(xi, x) for a dual pair", ir.samples.empty() ? INFINITY : ir.max_deviation,
                  1e-9, std::to_string(ir.samples.size()) + " samples");
        entry["space"] = io::to_json(io::file_of(v));
        entry["dual"] = io::to_json(io::file_of(*r.special));
        orbits.push_back(std::move(entry));
    }
    rep.result() = Json{{"spec", io::to_json(spec)}, {"orbits", orbits}};
    return rep;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bispectral duality toolkit: transforms, Bethe equations, Gaudin Hamiltonians", "bispectral"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    app.add_option("--tol", g.tol, "tolerance override for numeric checks");
    app.add_flag("--exact", g.exact, "use the exact backend where supported");
    app.add_option("--seed", g.seed, "seed for every stochastic step (default 0)");
    app.add_option("--out", g.out, "write the report here instead of stdout");

    TransformArgs ta;
    auto* transform = app.add_subcommand("transform", "bispectral dual of a space file");
    transform->add_option("--input", ta.input, "space file")->required();
    transform->add_flag("--special", ta.special, "use the special transform (needs \"z\")");
    transform->add_option("--output", ta.output, "write the dual space file here");
    transform->add_option("--report", ta.report, "write the report here");

    auto* bethe = app.add_subcommand("bethe", "critical points of the master function");
    bethe->require_subcommand(1);
    bethe->fallthrough();
    SolveArgs sa;
    auto* solve = bethe->add_subcommand("solve", "multistart solve; the report is a points file");
    solve->add_option("--spec", sa.spec, "spec file")->required();
    solve->add_option("--starts", sa.starts, "number of starts (0 = automatic)");
    solve->add_flag("--require-bound", sa.require_bound, "fail unless the weight-space bound is attained");
    std::string points_path;
    auto* verify = bethe->add_subcommand("verify", "re-check the orbits of a points file");
    verify->add_option("--points", points_path, "points file written by bethe solve")->required();

    auto* gaudin = app.add_subcommand("gaudin", "Gaudin Hamiltonians and the (gl_N, gl_M) duality");
    gaudin->require_subcommand(1);
    gaudin->fallthrough();
    SpectrumArgs spa;
    auto* spectrum = gaudin->add_subcommand("spectrum", "Hamiltonians and joint spectrum on a weight space");
    spectrum->add_option("--N", spa.N)->required();
    spectrum->add_option("--M", spa.M)->required();
    spectrum->add_option("--m", spa.m, "comma separated")->delimiter(',')->required();
    spectrum->add_option("--n", spa.n, "comma separated")->delimiter(',')->required();
    spectrum->add_option("--lambda", spa.lambda, "comma separated, p/q or decimals")->required();
    spectrum->add_option("--z", spa.z, "comma separated, p/q or decimals")->required();
    std::string instance;
    auto* duality = gaudin->add_subcommand("verify-duality", "N = M = 2 duality of expansions, eigenvectors and Lagrange data");
    duality->add_option("--instance", instance, "space file with z, or {spec, point|points}")->required();
    std::string conj_spec;
    int conj_starts = 0;
    auto* conjecture = gaudin->add_subcommand("conjecture", "experimental eigenvector correspondence for any N, M");
    conjecture->add_option("--spec", conj_spec, "spec file")->required();
    conjecture->add_option("--starts", conj_starts, "number of starts (0 = automatic)");

    auto* baker = app.add_subcommand("baker", "Baker-Akhiezer functions");
    baker->require_subcommand(1);
    baker->fallthrough();
    std::string baker_space;
    int grid = 5;
    auto* baker_verify = baker->add_subcommand("verify", "check psi_U(x, xi) = psi_V(xi, x) on a grid");
    baker_verify->add_option("--space", baker_space, "space file")->required();
    baker_verify->add_option("--grid", grid, "grid nodes per axis")->check(CLI::PositiveNumber);

    auto* demo = app.add_subcommand("demo", "end-to-end run on lambda = z = (0, 1), n = m = (1, 1)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        std::optional<Report> rep;
        std::string dest = g.out;
        if (transform->parsed()) {
            rep = cmd_transform(g, ta);
            if (!ta.report.empty()) dest = ta.report;
        } else if (solve->parsed()) {
            rep = cmd_bethe_solve(g, sa);
        } else if (verify->parsed()) {
            rep = cmd_bethe_verify(g, points_path);
        } else if (spectrum->parsed()) {
            rep = cmd_gaudin_spectrum(g, spa);
        } else if (duality->parsed()) {
            rep = cmd_verify_duality(g, instance);
        } else if (conjecture->parsed()) {
            rep = cmd_conjecture(g, conj_spec, conj_starts);
        } else if (baker_verify->parsed()) {
            rep = cmd_baker_verify(g, baker_space, grid);
        } else if (demo->parsed()) {
            rep = cmd_demo(g);
        }
        const Json j = rep->to_json();
        if (dest.empty())
            out << j.dump(2) << '\n';
        else
            io::write_json_file(dest, j);
        for (const auto& c : rep->checks())
            if (!c.passed) logger()->error("check failed: {} (residual {}, tolerance {})", c.name, fmt_double(c.residual), fmt_double(c.tolerance));
        return rep->passed() ? 0 : 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return is_check_failure(e.code()) ? 1 : 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace bispectral::cli
