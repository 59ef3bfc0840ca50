#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "bispectral/transform.hpp"

namespace bispectral {

/// Parameters of the master function Phi(t; lambda; z; m) with degree data n.
class MasterSpec {
public:
    /// Throws CoincidingParameters for repeated lambda or z, InvalidArgument for
    /// negative degrees or sum n != sum m.
    MasterSpec(std::vector<Scalar> lambda, std::vector<Scalar> z, std::vector<int> n, std::vector<int> m);

    const std::vector<Scalar>& lambda() const noexcept { return lambda_; }
    const std::vector<Scalar>& z() const noexcept { return z_; }
    const std::vector<int>& n() const noexcept { return n_; }
    const std::vector<int>& m() const noexcept { return m_; }
    int N() const noexcept { return static_cast<int>(lambda_.size()); }
    int M() const noexcept { return static_cast<int>(z_.size()); }
    /// nbar_i = n_{i+1} + ... + n_N for levels i = 1..N-1 (index i-1).
    const std::vector<int>& nbar() const noexcept { return nbar_; }
    int variable_count() const noexcept;

    /// The spec with the roles of (lambda, n) and (z, m) exchanged.
    MasterSpec dual() const { return MasterSpec(z_, lambda_, m_, n_); }

private:
    std::vector<Scalar> lambda_;
    std::vector<Scalar> z_;
    std::vector<int> n_;
    std::vector<int> m_;
    std::vector<int> nbar_;
};

/// Coordinates t^{(i)}_j grouped by level i = 1..N-1.
using Levels = std::vector<std::vector<Scalar>>;

struct CriticalPoint {
    Levels levels;
    double residual = 0.0;
    std::optional<MasterSpec> spec;
};

/// Throws NonAdmissiblePoint unless every level has nbar_i coordinates, no two
/// coordinates of a level coincide, adjacent levels share no value and level 1
/// avoids every z_a.
void check_admissible(const MasterSpec& spec, const Levels& t);

/// Phi evaluated from its product formula (complex double).
Scalar master_value(const MasterSpec& spec, const Levels& t);
/// log Phi as a sum of principal logarithms of the factors.
Complex log_master_value(const MasterSpec& spec, const Levels& t);

/// Left-minus-right side of the critical point equations, flattened level by
/// level; equals the gradient of log Phi in t.
std::vector<Scalar> critical_equations(const MasterSpec& spec, const Levels& t);
double critical_residual(const MasterSpec& spec, const Levels& t);

/// dim (L_{m_1} x ... x L_{m_M})[n_1, ..., n_N]: the number of nonnegative
/// integer M x N matrices with row sums m and column sums n.
std::uint64_t weight_space_dimension(const std::vector<int>& m, const std::vector<int>& n);

/// True if sum c_i (lambda_i - lambda_{i+1}) != 0 for every integer vector c
/// with 0 <= c_i <= nbar_i, c != 0.
bool lambda_is_generic(const MasterSpec& spec);

struct BetheOptions {
    /// 0 selects 200 * (number of variables).
    int starts = 0;
    std::uint64_t seed = 1;
    int max_iterations = 100;
    /// Radius of the start disc; 0 selects 2 * max(|z_a|, |lambda_i|, 1).
    double radius = 0.0;
    /// Throw PossiblyNonGeneric when a continuum of critical points is detected.
    bool strict = true;
    /// Throw MaxStartsExceeded if the weight-space bound is not reached.
    bool require_bound = false;
};

struct BetheSolution {
    std::vector<CriticalPoint> points;
    std::uint64_t bound = 0;
    bool bound_attained = false;
    bool generic_lambda = true;
    bool possibly_nongeneric = false;
    int starts_used = 0;
};

/// Multistart damped Newton on the critical equations; orbits are returned
/// with coordinates sorted inside each level.
BetheSolution solve_bethe(const MasterSpec& spec, const BetheOptions& options = {});

/// Sorts coordinates inside each level by (re, im); real parts within 1e-8
/// (relative) are treated as ties.
Levels canonical_levels(Levels t);
/// Largest coordinate distance between two canonical orbits.
double orbit_distance(const Levels& a, const Levels& b);

/// y^V_i = e^{-(lambda_{i+1}+...+lambda_N)x} Wr(p_{i+1} e^{lambda_{i+1}x}, ..., p_N e^{lambda_N x}),
/// monic. Throws NonAdmissibleSpace if the tuple is not admissible.
std::vector<Polynomial> tuple_from_space(const SpecialSpace& special);
/// Roots of the tuple, level by level, on the approximate backend.
CriticalPoint critical_point_from_space(const SpecialSpace& special);

/// Monic tuple y_i = prod_j (x - t^{(i)}_j).
std::vector<Polynomial> tuple_from_levels(const Levels& t, Backend backend);

/// Kernel of the factorized operator built from the orbit, classified as a
/// special space of the (lambda, z, n, m)-type.
SpecialSpace space_from_critical_point(const MasterSpec& spec, const CriticalPoint& cp);
SpecialSpace space_from_critical_point(const CriticalPoint& cp);

/// d log Phi / d(lambda_1, lambda_2, ..., z_1, z_2, ...) at t.
std::vector<Scalar> parameter_gradient(const MasterSpec& spec, const Levels& t);

/// parameter_gradient with d/d lambda_k shifted by d/d lambda_k of
/// -sum_{i<j} n_j log(lambda_i - lambda_j). The shifted values are the
/// eigenvalues of the KZ and dynamical Hamiltonians on the Bethe vector; the
/// z-derivatives are unchanged.
std::vector<Scalar> eigenvalue_gradient(const MasterSpec& spec, const Levels& t);

/// The three master functions attached to one N = M = 2 space and their
/// corresponding critical points: Phi(.; lambda; z; m) at t, Phi(.; lambda_2,
/// lambda_1; z; m) at the roots of p_1, Phi(.; z; lambda; n) at the roots of q_2.
struct LagrangeChain {
    std::array<MasterSpec, 3> specs;
    std::array<CriticalPoint, 3> points;
    SpecialSpace space;
    SpecialSpace dual;
};
LagrangeChain build_lagrange_chain(const MasterSpec& spec, const CriticalPoint& cp);

struct LagrangeReport {
    /// partials[k] = (d/d lambda_1, d/d lambda_2, d/d z_1, d/d z_2) of the
    /// eigenvalue-normalized log Phi_k, named after the parameters of the first
    /// function.
    std::array<std::array<Complex, 4>, 3> partials{};
    double max_discrepancy = 0.0;
    bool matched = false;
    /// The same partials of the unnormalized logarithms. These differ across
    /// the three functions by rational functions of lambda and z alone.
    std::array<std::array<Complex, 4>, 3> raw_partials{};
    double raw_discrepancy = 0.0;
};

/// Compares the eigenvalue-normalized parameter partials of the three
/// functions. Throws CorrespondenceBroken when they differ by more than `tol`.
LagrangeReport lagrange_match(const std::array<MasterSpec, 3>& specs, const std::array<CriticalPoint, 3>& cps,
                              double tol = 1e-8);

}  // namespace bispectral
