#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "bispectral/bethe.hpp"

namespace bispectral::io {

using Json = nlohmann::ordered_json;

/// exact -> {"re":"p/q","im":"p/q"}; approx -> {"re":1.25,"im":-0.5}. On input a
/// bare number is an approximate real and a bare string an exact real.
Json to_json(const Scalar& s);
Scalar scalar_from_json(const Json& j);
Json to_json(const std::vector<Scalar>& v);
std::vector<Scalar> scalars_from_json(const Json& j);

/// {"coeffs":[Scalar,...]}
Json to_json(const Polynomial& p);
Polynomial polynomial_from_json(const Json& j);

/// {"terms":[{"lambda":Scalar,"num":[...],"den":[...]},...]}
Json to_json(const QuasiPolynomial& f);
QuasiPolynomial quasipolynomial_from_json(const Json& j, char variable);

/// {"variable":"x","table":[{"i":int,"j":int,"coeff":Scalar},...]}
Json to_json(const DiffOperator& op);
DiffOperator operator_from_json(const Json& j);

/// {"variable":"x","lambda":[...],"basis":[...],"z":[...]}, with "z" optional.
struct SpaceFile {
    FunctionSpace space;
    std::optional<std::vector<Scalar>> lambda;
    std::optional<std::vector<Scalar>> z;
};
Json to_json(const SpaceFile& f);
SpaceFile space_from_json(const Json& j);
/// The typed special space; NotSpecial when the file has no "z".
SpecialSpace special_from_file(const SpaceFile& f);
SpaceFile file_of(const SpecialSpace& s);

/// {"lambda":[...],"z":[...],"n":[...],"m":[...]}
Json to_json(const MasterSpec& spec);
MasterSpec spec_from_json(const Json& j);

/// [[Scalar,...],...], one array per level.
Json to_json(const Levels& t);
Levels levels_from_json(const Json& j);

/// Reads a whole file; ParseError if it is missing or not valid JSON.
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

/// Parses "0,1/2,-3" (exact) or "0,0.5" (approx unless exact is set).
std::vector<Scalar> parse_scalar_list(const std::string& text, bool exact);
std::vector<int> parse_int_list(const std::string& text);

}  // namespace bispectral::io
