#include "bispectral/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace bispectral {

namespace {

int column_count(const Matrix& m) { return m.empty() ? 0 : static_cast<int>(m.front().size()); }

Echelon echelon_exact(Matrix a) {
    const int rows = static_cast<int>(a.size());
    const int cols = column_count(a);
    Echelon out;
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int pivot = -1;
        for (int i = r; i < rows; ++i)
            if (!a[i][c].is_zero()) {
                pivot = i;
                break;
            }
        if (pivot < 0) continue;
        std::swap(a[r], a[pivot]);
        const Scalar inv = a[r][c].one() / a[r][c];
        for (int j = c; j < cols; ++j) a[r][j] *= inv;
        for (int i = 0; i < rows; ++i) {
            if (i == r || a[i][c].is_zero()) continue;
            const Scalar f = a[i][c];
            for (int j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
        }
        out.pivots.push_back(c);
        ++r;
    }
    a.resize(static_cast<size_t>(r));
    out.rows = std::move(a);
    return out;
}

Echelon echelon_approx(const Matrix& m) {
    const int rows = static_cast<int>(m.size());
    const int cols = column_count(m);
    std::vector<std::vector<Complex>> a(static_cast<size_t>(rows), std::vector<Complex>(static_cast<size_t>(cols)));
    double global = 0.0;
    for (int i = 0; i < rows; ++i) {
        double row_max = 0.0;
        for (int j = 0; j < cols; ++j) {
            a[i][j] = m[i][j].to_complex();
            row_max = std::max(row_max, std::abs(a[i][j]));
        }
        if (row_max > 0.0)
            for (auto& v : a[i]) v /= row_max;
        if (row_max > 0.0) global = 1.0;
    }
    const double threshold = kPivotThreshold * global;
    Echelon out;
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int pivot = r;
        for (int i = r + 1; i < rows; ++i)
            if (std::abs(a[i][c]) > std::abs(a[pivot][c])) pivot = i;
        if (std::abs(a[pivot][c]) <= threshold) {
            for (int i = r; i < rows; ++i) a[i][c] = 0.0;
            continue;
        }
        std::swap(a[r], a[pivot]);
        const Complex inv = 1.0 / a[r][c];
        for (int j = c; j < cols; ++j) a[r][j] *= inv;
        for (int i = 0; i < rows; ++i) {
            if (i == r) continue;
            const Complex f = a[i][c];
            if (f == 0.0) continue;
            for (int j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
            a[i][c] = 0.0;
        }
        out.pivots.push_back(c);
        ++r;
    }
    for (int i = 0; i < r; ++i) {
        Vector row;
        row.reserve(static_cast<size_t>(cols));
        for (int j = 0; j < cols; ++j) {
            const Complex v = std::abs(a[i][j]) <= threshold ? Complex(0.0) : a[i][j];
            row.push_back(Scalar::approx(v));
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace

Echelon row_echelon(const Matrix& m, Backend backend) {
    if (backend == Backend::Exact) return echelon_exact(m);
    return echelon_approx(m);
}

int matrix_rank(const Matrix& m, Backend backend) { return static_cast<int>(row_echelon(m, backend).pivots.size()); }

std::vector<Vector> nullspace(const Matrix& m, int cols, Backend backend) {
    const Echelon e = row_echelon(m, backend);
    std::vector<bool> is_pivot(static_cast<size_t>(cols), false);
    for (int p : e.pivots) is_pivot[static_cast<size_t>(p)] = true;
    std::vector<Vector> basis;
    for (int free = 0; free < cols; ++free) {
        if (is_pivot[static_cast<size_t>(free)]) continue;
        Vector v(static_cast<size_t>(cols), Scalar::from_int(0, backend));
        v[static_cast<size_t>(free)] = Scalar::from_int(1, backend);
        for (size_t r = 0; r < e.pivots.size(); ++r) v[static_cast<size_t>(e.pivots[r])] = -e.rows[r][static_cast<size_t>(free)];
        basis.push_back(std::move(v));
    }
    return basis;
}

Matrix zero_matrix(int rows, int cols, Backend backend) {
    return Matrix(static_cast<size_t>(rows), Vector(static_cast<size_t>(cols), Scalar::from_int(0, backend)));
}

Matrix identity_matrix(int n, Backend backend) {
    Matrix m = zero_matrix(n, n, backend);
    for (int i = 0; i < n; ++i) m[i][i] = Scalar::from_int(1, backend);
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.empty() || b.empty()) return {};
    const size_t n = a.size();
    const size_t k = b.size();
    const size_t p = b.front().size();
    if (a.front().size() != k) fail(ErrorCode::InvalidArgument, "matrix shapes do not match");
    const Scalar zero = a.front().front().zero();
    Matrix c(n, Vector(p, zero));
    for (size_t i = 0; i < n; ++i)
        for (size_t l = 0; l < k; ++l) {
            const Scalar& x = a[i][l];
            if (x.is_exact() && x.is_zero()) continue;
            for (size_t j = 0; j < p; ++j) c[i][j] += x * b[l][j];
        }
    return c;
}

Vector matvec(const Matrix& a, const Vector& v) {
    Vector out;
    out.reserve(a.size());
    for (const auto& row : a) {
        if (row.size() != v.size()) fail(ErrorCode::InvalidArgument, "matrix-vector shapes do not match");
        Scalar acc = v.empty() ? Scalar() : v.front().zero();
        for (size_t j = 0; j < v.size(); ++j) acc += row[j] * v[j];
        out.push_back(acc);
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    if (a.empty()) return {};
    Matrix t(a.front().size(), Vector(a.size()));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
    return t;
}

Matrix mat_add(const Matrix& a, const Matrix& b) {
    Matrix c = a;
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) c[i][j] += b[i][j];
    return c;
}

Matrix mat_scale(const Matrix& a, const Scalar& s) {
    Matrix c = a;
    for (auto& row : c)
        for (auto& v : row) v *= s;
    return c;
}

Matrix commutator(const Matrix& a, const Matrix& b) {
    return mat_add(matmul(a, b), mat_scale(matmul(b, a), Scalar::from_int(-1, a.front().front().backend())));
}

bool is_zero_matrix(const Matrix& a) {
    for (const auto& row : a)
        for (const auto& v : row)
            if (!v.is_zero()) return false;
    return true;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (const auto& row : a)
        for (const auto& v : row) m = std::max(m, v.abs());
    return m;
}

}  // namespace bispectral
