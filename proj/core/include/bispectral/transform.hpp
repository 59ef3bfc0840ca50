#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bispectral/diffop.hpp"

namespace bispectral {

/// Transforms of all functions around one point z_a, each q(u) e^{z_a u}.
struct TransformComponent {
    Scalar point;
    std::vector<QuasiPolynomial> functions;
};

struct TransformResult {
    FunctionSpace dual_space;
    /// Sorted by (re, im) of the point; zero transforms are omitted.
    std::vector<TransformComponent> components;
    /// Short description of the source space.
    std::string provenance;
    /// The (z, lambda, m, n)-type data of the dual, filled by the special transform.
    std::optional<SpecialSpace> special;
};

/// Residue at z0 of e^{ux} f(x), without the factor 2 pi i:
/// sum_k u^k / k! * c_{-k-1} times e^{z0 u}, where c are the Laurent
/// coefficients of f at z0. On the exact backend the constant e^{lambda z0}
/// of a term with exponent lambda is dropped (spans are unaffected), so an
/// exact f may have a pole at z0 in only one of its exponent components.
QuasiPolynomial contour_transform(const QuasiPolynomial& f, const Scalar& z0);

/// U = span of the transforms of the regularized conjugate space around the
/// singular points. Throws DualityViolation if dim U differs from M.
TransformResult bispectral_dual(const FunctionSpace& space);
TransformResult bispectral_dual(const FunctionSpace& space, const std::vector<ExponentSequence>& singular);

/// Transforms of f / prod (x - z_a) for f in the conjugate space around every
/// z_a. The dual is classified with lambda as its points and z as its exponent
/// order; a mismatch of the swapped degrees throws DualityViolation.
TransformResult special_bispectral_dual(const SpecialSpace& special);

struct DualityCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Checks the statements relating V and its dual U: dimension, degrees of the
/// components, operator swap, singular points and exponents of U.
std::vector<DualityCheck> verify_bispectral_dual(const FunctionSpace& space, const TransformResult& result);
/// Same for the special transform: type of (U, lambda), swapped degrees and
/// the special fundamental operator.
std::vector<DualityCheck> verify_special_dual(const SpecialSpace& special, const TransformResult& result);

}  // namespace bispectral
