#include "io.hpp"

#include <fstream>
#include <sstream>

namespace bispectral::io {

namespace {

[[noreturn]] void parse_fail(const std::string& what) { fail(ErrorCode::ParseError, what); }

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) parse_fail(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

char variable_of(const Json& j) {
    if (!j.contains("variable")) return 'x';
    const auto v = j.at("variable").get<std::string>();
    if (v.size() != 1) parse_fail("variable must be a single character");
    return v[0];
}

Rational decimal_to_rational(const std::string& s) {
    const auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(s, 10);
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    const size_t places = s.size() - dot - 1;
    Rational r(digits.empty() || digits == "-" ? "0" : digits, 10);
    r /= Rational(mpz_class("1" + std::string(places, '0')));
    r.canonicalize();
    return r;
}

Scalar component_pair(const Json& re, const Json& im) {
    if (re.is_string() || im.is_string()) {
        if (!re.is_string() || !im.is_string()) parse_fail("exact scalars need string components");
        try {
            return Scalar::parse_exact(re.get<std::string>(), im.get<std::string>());
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            parse_fail(std::string("bad rational: ") + e.what());
        }
    }
    if (!re.is_number() || !im.is_number()) parse_fail("scalar components must be numbers or strings");
    return Scalar::approx(re.get<double>(), im.get<double>());
}

}  // namespace

Json to_json(const Scalar& s) {
    if (s.is_exact()) {
        const auto& v = s.exact_value();
        return Json{{"re", v.re.get_str()}, {"im", v.im.get_str()}};
    }
    const Complex c = s.to_complex();
    return Json{{"re", c.real()}, {"im", c.imag()}};
}

Scalar scalar_from_json(const Json& j) {
    if (j.is_number()) return Scalar::approx(j.get<double>());
    if (j.is_string()) return component_pair(j, Json("0"));
    if (!j.is_object()) parse_fail("scalar must be an object, number or string");
    const Json zero = j.contains("re") && j.at("re").is_string() ? Json("0") : Json(0.0);
    return component_pair(field(j, "re"), j.contains("im") ? j.at("im") : zero);
}

Json to_json(const std::vector<Scalar>& v) {
    Json a = Json::array();
    for (const auto& s : v) a.push_back(to_json(s));
    return a;
}

std::vector<Scalar> scalars_from_json(const Json& j) {
    if (!j.is_array()) parse_fail("expected an array of scalars");
    std::vector<Scalar> out;
    for (const auto& e : j) out.push_back(scalar_from_json(e));
    return out;
}

Json to_json(const Polynomial& p) { return Json{{"coeffs", to_json(p.coeffs())}}; }

Polynomial polynomial_from_json(const Json& j) {
    const auto c = scalars_from_json(j.is_array() ? j : field(j, "coeffs"));
    if (c.empty()) return Polynomial(Backend::Exact);
    return Polynomial(c, c.front().backend());
}

Json to_json(const QuasiPolynomial& f) {
    Json terms = Json::array();
    for (const auto& t : f.terms())
        terms.push_back(Json{{"lambda", to_json(t.lambda)}, {"num", to_json(t.coeff.num().coeffs())}, {"den", to_json(t.coeff.den().coeffs())}});
    return Json{{"terms", terms}};
}

QuasiPolynomial quasipolynomial_from_json(const Json& j, char variable) {
    QuasiPolynomial f(Backend::Exact, variable);
    bool first = true;
    for (const auto& t : field(j, "terms")) {
        const Scalar lambda = scalar_from_json(field(t, "lambda"));
        const Polynomial num = polynomial_from_json(field(t, "num"));
        const Polynomial den = t.contains("den") ? polynomial_from_json(t.at("den")) : Polynomial::constant(lambda.one());
        if (den.is_zero()) parse_fail("zero denominator");
        const QuasiPolynomial term = QuasiPolynomial::term(RationalFunction(num, den), lambda, variable);
        if (first) {
            f = term;
            first = false;
        } else {
            f += term;
        }
    }
    return f;
}

Json to_json(const DiffOperator& op) {
    Json table = Json::array();
    for (const auto& e : op.table()) table.push_back(Json{{"i", e.i}, {"j", e.j}, {"coeff", to_json(e.coeff)}});
    return Json{{"variable", std::string(1, op.variable())}, {"table", table}};
}

DiffOperator operator_from_json(const Json& j) {
    std::vector<DiffOperator::Entry> entries;
    Backend be = Backend::Exact;
    for (const auto& e : field(j, "table")) {
        entries.push_back({field(e, "i").get<int>(), field(e, "j").get<int>(), scalar_from_json(field(e, "coeff"))});
        be = entries.back().coeff.backend();
    }
    return DiffOperator::from_table(entries, be, variable_of(j));
}

Json to_json(const SpaceFile& f) {
    Json basis = Json::array();
    for (const auto& b : f.space.basis()) basis.push_back(to_json(b));
    Json j{{"variable", std::string(1, f.space.variable())}};
    j["lambda"] = to_json(f.lambda ? *f.lambda : f.space.exponents());
    j["basis"] = basis;
    if (f.z) j["z"] = to_json(*f.z);
    return j;
}

SpaceFile space_from_json(const Json& j) {
    const char var = variable_of(j);
    std::vector<QuasiPolynomial> gens;
    for (const auto& g : field(j, "basis")) gens.push_back(quasipolynomial_from_json(g, var));
    Backend be = Backend::Exact;
    for (const auto& g : gens)
        if (g.backend() == Backend::Approx) be = Backend::Approx;
    if (be == Backend::Approx)
        for (auto& g : gens) g = g.to_backend(Backend::Approx);
    SpaceFile f{FunctionSpace(gens, var, be), std::nullopt, std::nullopt};
    if (j.contains("lambda")) f.lambda = scalars_from_json(j.at("lambda"));
    if (j.contains("z")) f.z = scalars_from_json(j.at("z"));
    return f;
}

SpecialSpace special_from_file(const SpaceFile& f) {
    if (!f.z) fail(ErrorCode::NotSpecial, "the space file has no \"z\" points");
    std::vector<Scalar> z = *f.z;
    if (f.space.backend() == Backend::Approx)
        for (auto& s : z) s = s.to_backend(Backend::Approx);
    return classify_special(f.space, z, f.lambda);
}

SpaceFile file_of(const SpecialSpace& s) { return {s.space, s.lambda, s.z}; }

Json to_json(const MasterSpec& spec) {
    return Json{{"lambda", to_json(spec.lambda())}, {"z", to_json(spec.z())}, {"n", spec.n()}, {"m", spec.m()}};
}

MasterSpec spec_from_json(const Json& j) {
    try {
        return MasterSpec(scalars_from_json(field(j, "lambda")), scalars_from_json(field(j, "z")), field(j, "n").get<std::vector<int>>(),
                          field(j, "m").get<std::vector<int>>());
    } catch (const nlohmann::json::exception& e) {
        parse_fail(std::string("bad spec: ") + e.what());
    }
}

Json to_json(const Levels& t) {
    Json a = Json::array();
    for (const auto& lv : t) a.push_back(to_json(lv));
    return a;
}

Levels levels_from_json(const Json& j) {
    if (!j.is_array()) parse_fail("levels must be an array of arrays");
    Levels t;
    for (const auto& lv : j) t.push_back(scalars_from_json(lv));
    return t;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) parse_fail("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        parse_fail(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + path);
    out << j.dump(2) << '\n';
}

std::vector<Scalar> parse_scalar_list(const std::string& text, bool exact) {
    std::vector<Scalar> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) parse_fail("empty entry in list \"" + text + "\"");
        try {
            if (tok.find('/') != std::string::npos) {
                const Scalar r = Scalar::parse_exact(tok, "0");
                out.push_back(exact ? r : r.to_backend(Backend::Approx));
            } else if (exact) {
                out.push_back(Scalar::exact(decimal_to_rational(tok)));
            } else {
                size_t used = 0;
                const double v = std::stod(tok, &used);
                if (used != tok.size()) parse_fail("not a number: \"" + tok + "\"");
                out.push_back(Scalar::approx(v));
            }
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            parse_fail("not a number: \"" + tok + "\"");
        }
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            parse_fail("not an integer: \"" + tok + "\"");
        }
        if (used != tok.size()) parse_fail("not an integer: \"" + tok + "\"");
        out.push_back(v);
    }
    return out;
}

}  // namespace bispectral::io
