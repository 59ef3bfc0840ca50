#pragma once

#include <cstdint>
#include <vector>

#include "bispectral/transform.hpp"

namespace bispectral {

/// W = { r in C[t] : sum_a c_{ija} r^{(a)}(lambda_i) = 0 for all i, j }.
struct AdmissibleSubspace {
    /// Distinct points lambda_i.
    std::vector<Scalar> points;
    /// conditions[i][j] = (c_{ij0}, ..., c_{ij n_ij}), top entry nonzero.
    std::vector<std::vector<std::vector<Scalar>>> conditions;

    int condition_count() const;
    /// True if r satisfies every condition (exactly, or within tolerance).
    bool contains(const Polynomial& r) const;
};

/// Reads p_ij = sum_a c_ija x^a off the canonical basis p_ij e^{lambda_i x}.
/// Throws NonPolynomialCoefficients for rational coefficients.
AdmissibleSubspace space_to_subspace(const FunctionSpace& space);
/// Throws InvalidArgument if a condition has a zero top coefficient.
FunctionSpace subspace_to_space(const AdmissibleSubspace& w, char variable = 'x');

struct BakerValue {
    Complex Psi;  ///< prod (xi - lambda_i)^{-N_i} (Dbar_V e^{x xi})
    Complex psi;  ///< Psi e^{-x xi}
};

/// Pointwise value at (x0, xi0), with Dbar_V the monic fundamental operator.
/// Throws PoleHit when xi0 is an exponent or x0 is a pole of a coefficient.
BakerValue baker_function(const FunctionSpace& space, const Scalar& x0, const Scalar& xi0);

struct BakerGrid {
    int size = 5;
    double lo = 2.0;
    double hi = 6.0;
    std::uint64_t seed = 0;
    /// Each node moves by at most this amount in each coordinate.
    double jitter = 0.05;
    /// Nodes closer than this to a pole of either side are skipped.
    double pole_distance = 0.1;
};

struct InvolutionSample {
    double x = 0.0;
    double xi = 0.0;
    Complex psi_u;  ///< psi_U(x, xi)
    Complex psi_v;  ///< psi_V(xi, x)
    double deviation = 0.0;
};

struct InvolutionReport {
    std::vector<InvolutionSample> samples;
    int skipped = 0;
    /// Set when V has no singular points, so that U is zero-dimensional.
    bool vacuous = false;
    double max_deviation = 0.0;
    bool passed = false;
};

/// max over the grid of |psi_U(x, xi) - psi_V(xi, x)| / max(1, |psi_V|).
InvolutionReport verify_involution(const FunctionSpace& v, const FunctionSpace& u, const BakerGrid& grid = {},
                                   double tol = 1e-9);
/// Computes U with the bispectral transform first.
InvolutionReport verify_involution(const FunctionSpace& v, const BakerGrid& grid = {}, double tol = 1e-9);

}  // namespace bispectral
