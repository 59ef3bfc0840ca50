#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "bispectral/bethe.hpp"
#include "bispectral/linalg.hpp"

namespace bispectral {

/// Row a is the exponent vector of the degree-m_a monomial in the a-th factor.
using ExponentMatrix = std::vector<std::vector<int>>;

/// Monomial basis of (L_{m_1} x ... x L_{m_M})[n_1, ..., n_N] with L_m realized
/// as homogeneous polynomials of degree m in N variables.
struct WeightBasis {
    int N = 0;
    int M = 0;
    std::vector<int> m;
    std::vector<int> n;
    /// Lexicographic in the row-major entries.
    std::vector<ExponentMatrix> basis;

    size_t size() const noexcept { return basis.size(); }
    std::optional<size_t> index_of(const ExponentMatrix& e) const;
};

/// Throws WeightMismatch for negative entries, wrong lengths or sum n != sum m.
WeightBasis build_weight_basis(int N, int M, const std::vector<int>& m, const std::vector<int>& n);
/// Number of M x N nonnegative integer matrices with row sums m and column
/// sums n; 0 when infeasible.
std::uint64_t weight_dimension(int N, int M, const std::vector<int>& m, const std::vector<int>& n);

struct HamiltonianSet {
    std::vector<Matrix> H;  ///< KZ Hamiltonians, one per factor
    std::vector<Matrix> G;  ///< dynamical Hamiltonians, one per variable
    std::vector<Scalar> lambda;
    std::vector<Scalar> z;
};

/// E_ij acts on each factor as x_i d/dx_j.
/// H_a = sum_{b != a} Omega^{(ab)} / (z_a - z_b) + sum_i lambda_i E_ii^{(a)},
/// G_i = sum_{j != i} (E_ij E_ji - E_ii) / (lambda_i - lambda_j) + sum_a z_a E_ii^{(a)}.
/// Throws CoincidingParameters for repeated lambda or z.
HamiltonianSet hamiltonians(const WeightBasis& basis, const std::vector<Scalar>& lambda, const std::vector<Scalar>& z);
/// Omega^{(ab)} = sum_{ij} E_ij^{(a)} E_ji^{(b)} on the weight space.
Matrix casimir(const WeightBasis& basis, int a, int b, Backend backend);
/// Largest entry of all pairwise commutators (0 exactly on the exact backend).
double max_commutator(const HamiltonianSet& hs);

struct DualityMap {
    WeightBasis source;  ///< gl_N side, (L_m)[n]
    WeightBasis target;  ///< gl_M side, (L_n)[m]
    /// Permutation matrix sending basis matrix k to its transpose.
    Matrix map;
    std::vector<size_t> image;  ///< image[k] = index of transpose(source.basis[k])
};
DualityMap duality_isomorphism(int N, int M, const std::vector<int>& m, const std::vector<int>& n);

struct InterchangeReport {
    /// max over a of |P H_a P^T - G'_a| and over i of |P G_i P^T - H'_i|.
    double max_deviation = 0.0;
    bool exact = false;
};
/// Compares the Hamiltonians of the source at (lambda, z) with those of the
/// target at (z, lambda).
InterchangeReport check_interchange(const DualityMap& d, const std::vector<Scalar>& lambda, const std::vector<Scalar>& z);

/// alpha = max(0, n_2 - m_1), beta = min(m_2, n_2).
std::array<int, 2> index_bounds(const std::vector<int>& m, const std::vector<int>& n);

/// Coefficient of x_1^{m-k} x_2^k in E_21^k x_1^m / k!, obtained by applying
/// the derivation k times.
Scalar divided_power_scale(int m, int k, Backend backend);

/// For N = M = 2: basis index of E_21^{n_2-i} v_{m_1}/(n_2-i)! x E_21^i v_{m_2}/i!.
size_t divided_index(const WeightBasis& basis, int i);
/// Monomial coordinates of sum_i coords[i - alpha] * (divided-power vector i).
Vector from_divided(const WeightBasis& basis, const std::vector<Scalar>& coords);
/// Inverse of from_divided.
std::vector<Scalar> to_divided(const WeightBasis& basis, const Vector& v);

struct WeylMap {
    WeightBasis source;  ///< weight [n_1, n_2]
    WeightBasis target;  ///< weight [n_2, n_1]
    int alpha = 0;
    int beta = 0;
    /// divided[j][i - alpha] = 1 when index i goes to j + alpha' of the target.
    Matrix divided;
    /// The same map in monomial coordinates.
    Matrix monomial;
};
/// Index map i -> m_2 - i; throws OutOfRange outside alpha..beta.
int weyl_index(const std::vector<int>& m, const std::vector<int>& n, int i);
WeylMap weyl_isomorphism(const WeightBasis& basis);

/// C_i(t) for i = 0..n_2, with Sym summing over all permutations.
std::vector<Scalar> universal_coefficients(const std::vector<Scalar>& t, const Scalar& z1, const Scalar& z2);

/// Coefficients c_0..c_n of p = sum c_i (x-z1)^{n-i}/(n-i)! (x-z2)^i/i!.
/// Throws DegreeTooHigh if deg p > n.
std::vector<Scalar> mixed_basis_expand(const Polynomial& p, const Scalar& z1, const Scalar& z2, int n);

/// Relative distance of b from the line through a: |b - s a| / |b| with s
/// fitted at the largest entry of a. 0 when both vanish, 1 when only one does.
double proportionality_deviation(const std::vector<Scalar>& a, const std::vector<Scalar>& b);
/// Divides by the first entry that is not negligible.
std::vector<Scalar> normalized_first(const std::vector<Scalar>& v);

struct BetheVector2x2 {
    WeightBasis basis;
    int alpha = 0;
    int beta = 0;
    std::vector<Scalar> C;  ///< C_0..C_{n_2}
    Vector vector;          ///< sum_{alpha..beta} C_i (divided-power vector i), monomial coordinates
    /// c_i of p_2 = prod (x - t_j) against (-1)^i C_i.
    std::vector<Scalar> c;
    double factor_deviation = 0.0;
};
/// Throws NonAdmissiblePoint if the orbit repeats a coordinate or meets z.
BetheVector2x2 bethe_vector_2x2(const CriticalPoint& cp, const std::vector<int>& m, const std::vector<Scalar>& z);

struct EigenvectorCheck {
    std::vector<Complex> g_values;
    std::vector<Complex> h_values;
    /// max_i |G_i w - g_i w| / |w| and the same for H.
    double g_residual = 0.0;
    double h_residual = 0.0;
};
/// `values` is ordered (G_1..G_N, H_1..H_M), as returned by eigenvalue_gradient.
EigenvectorCheck eigenvector_check(const HamiltonianSet& hs, const Vector& w, const std::vector<Scalar>& values);

struct RecurrenceData {
    Scalar lambda1, lambda2, z1, z2;
    int n1 = 0, n2 = 0, m1 = 0, m2 = 0;
    Scalar phi11;
};
/// Coefficients (of c_{i+1}, c_{i-1}, c_i) of equation i.
std::array<Scalar, 3> recurrence_coefficients(const RecurrenceData& r, int i);
/// Equations alpha..beta evaluated on the expansion coefficients c_0..c_{n_2}.
/// The displayed coefficients act on (-1)^i c_i. Each residual is divided by
/// the sum of the moduli of its terms' largest.
std::vector<Complex> recurrence_residuals(const RecurrenceData& r, const std::vector<Scalar>& c);
double recurrence_residual(const RecurrenceData& r, const std::vector<Scalar>& c);
/// Data of the p_1 equations: lambda, n reversed and phi_11 replaced by phi_12.
RecurrenceData second_symmetry(const RecurrenceData& r, const Scalar& phi12);
/// Data of the q_2 equations: (lambda, n) and (z, m) exchanged, phi of the dual.
RecurrenceData first_symmetry(const RecurrenceData& r, const Scalar& phi11_dual);

struct DualityReport2x2 {
    int alpha = 0;
    int beta = 0;
    std::vector<Scalar> c;  ///< p_2 in the (z1, z2) mixed basis
    std::vector<Scalar> d;  ///< p_1 in the (z1, z2) mixed basis
    std::vector<Scalar> e;  ///< q_2 in the (lambda1, lambda2) mixed basis
    PhiMatrix phi;
    PhiMatrix phi_dual;
    double cd_deviation = 0.0;  ///< c_i vs d_{m_2-i}
    double ce_deviation = 0.0;  ///< c_i vs e_i
    double recurrence_c = 0.0;
    double recurrence_second = 0.0;  ///< c read through i = m_2 - j in the p_1 equations
    double recurrence_d = 0.0;
    double recurrence_e = 0.0;
    double weyl_deviation = 0.0;     ///< Bethe vector of c vs that of d
    double duality_deviation = 0.0;  ///< Bethe vector of c vs that of e
    /// Index of the largest mismatch in c_i = d_{m_2-i} = e_i.
    int worst_index = 0;
    std::vector<DualityCheck> checks;
    bool passed = false;
    double max_deviation() const;
};
/// Computes the dual with the special transform.
DualityReport2x2 duality_report_2x2(const SpecialSpace& v, double tol = 1e-8);
DualityReport2x2 duality_report_2x2(const SpecialSpace& v, const SpecialSpace& u, double tol = 1e-8);
/// Throws DualityViolation naming the offending index and residual.
DualityReport2x2 verify_duality_2x2(const SpecialSpace& v, double tol = 1e-8);

struct JointSpectrum {
    /// Common eigenvectors of a generic combination, as columns.
    std::vector<std::vector<Complex>> vectors;
    /// values[k] = (G_1..G_N, H_1..H_M) on vector k (Rayleigh quotients).
    std::vector<std::vector<Complex>> values;
    /// Largest eigen-equation residual relative to |v|.
    double residual = 0.0;
};
JointSpectrum joint_spectrum(const HamiltonianSet& hs, std::uint64_t seed = 0);

struct JointEigenvector {
    std::vector<Complex> vector;  ///< unit norm
    /// max over the operators of |(X - value) v|.
    double residual = 0.0;
};
/// Best common eigenvector for the prescribed values (G_1..G_N, H_1..H_M):
/// the smallest right singular vector of the stacked shifted operators.
JointEigenvector joint_eigenvector(const HamiltonianSet& hs, const std::vector<Scalar>& values);

/// Experimental comparison for arbitrary N, M: for every critical point found
/// on the gl_N side, the joint eigenvector with the predicted eigenvalues is
/// transported by the duality isomorphism and compared with the joint
/// eigenvector attached to the dual critical point.
struct ConjectureEntry {
    Levels point;
    Levels dual_point;
    double eigen_residual = 0.0;       ///< gl_N side, predicted eigenvalues
    double dual_eigen_residual = 0.0;  ///< gl_M side
    double eigenvalue_mismatch = 0.0;  ///< predicted H_a vs predicted dual G_a
    double proportionality = 0.0;      ///< transported vs dual eigenvector
};
struct ConjectureReport {
    std::vector<ConjectureEntry> entries;
    std::uint64_t dimension = 0;
    double max_deviation = 0.0;
};
ConjectureReport conjecture_report(const MasterSpec& spec, const BetheOptions& options = {});

}  // namespace bispectral
