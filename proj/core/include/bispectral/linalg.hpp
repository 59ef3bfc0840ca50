#pragma once

#include <vector>

#include "bispectral/field.hpp"

namespace bispectral {

using Vector = std::vector<Scalar>;
using Matrix = std::vector<Vector>;

/// Relative pivot threshold for approximate elimination.
inline constexpr double kPivotThreshold = 1e-9;

struct Echelon {
    Matrix rows;              ///< nonzero rows of the reduced row-echelon form
    std::vector<int> pivots;  ///< pivot column of each row
};

/// Reduced row-echelon form. Exact: first nonzero pivot. Approx: rows are
/// scaled to unit max-norm, partial pivoting, entries below
/// kPivotThreshold * (max entry) count as zero.
Echelon row_echelon(const Matrix& m, Backend backend);

int matrix_rank(const Matrix& m, Backend backend);

/// Basis of {v : m v = 0}; `cols` is needed when m has no rows.
std::vector<Vector> nullspace(const Matrix& m, int cols, Backend backend);

Matrix zero_matrix(int rows, int cols, Backend backend);
Matrix identity_matrix(int n, Backend backend);
Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, const Vector& v);
Matrix transpose(const Matrix& a);
Matrix mat_add(const Matrix& a, const Matrix& b);
Matrix mat_scale(const Matrix& a, const Scalar& s);
/// a*b - b*a.
Matrix commutator(const Matrix& a, const Matrix& b);
bool is_zero_matrix(const Matrix& a);
/// Largest entry modulus.
double max_abs(const Matrix& a);

}  // namespace bispectral
