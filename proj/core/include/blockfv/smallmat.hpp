#pragma once

// Dense n x n block helpers on raw row-major storage. Blocks in this
// project are small (n <= 5) so everything is done in place with
// partial-pivoted LU, no external linear algebra dependency.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fvb::smallmat {

inline constexpr double kSingularPivot = 1e-300;

// y += A * x
inline void matvecAdd(const double* A, const double* x, double* y, int n) {
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        const double* row = A + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) s += row[j] * x[j];
        y[i] += s;
    }
}

// y -= A * x
inline void matvecSub(const double* A, const double* x, double* y, int n) {
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        const double* row = A + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) s += row[j] * x[j];
        y[i] -= s;
    }
}

// C += A * B, all n x n row-major
inline void matmulAdd(const double* A, const double* B, double* C, int n) {
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double a = A[static_cast<std::size_t>(i) * n + k];
            if (a == 0.0) continue;
            for (int j = 0; j < n; ++j)
                C[static_cast<std::size_t>(i) * n + j] += a * B[static_cast<std::size_t>(k) * n + j];
        }
}

// C -= A * B
inline void matmulSub(const double* A, const double* B, double* C, int n) {
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double a = A[static_cast<std::size_t>(i) * n + k];
            if (a == 0.0) continue;
            for (int j = 0; j < n; ++j)
                C[static_cast<std::size_t>(i) * n + j] -= a * B[static_cast<std::size_t>(k) * n + j];
        }
}

// Factored block: LU with partial pivoting stored in place plus pivot indices.
struct LuBlock {
    std::vector<double> lu;
    std::vector<int> piv;
    int n = 0;
};

// Factor A (row-major n x n). Throws std::runtime_error on a pivot below
// the singularity threshold.
inline LuBlock luFactor(const double* A, int n) {
    LuBlock f;
    f.n = n;
    f.lu.assign(A, A + static_cast<std::size_t>(n) * n);
    f.piv.resize(n);
    double* lu = f.lu.data();
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::fabs(lu[static_cast<std::size_t>(k) * n + k]);
        for (int i = k + 1; i < n; ++i) {
            const double v = std::fabs(lu[static_cast<std::size_t>(i) * n + k]);
            if (v > best) { best = v; p = i; }
        }
        if (best < kSingularPivot) throw std::runtime_error("singular block in LU factorization");
        f.piv[k] = p;
        if (p != k)
            for (int j = 0; j < n; ++j)
                std::swap(lu[static_cast<std::size_t>(k) * n + j], lu[static_cast<std::size_t>(p) * n + j]);
        const double d = lu[static_cast<std::size_t>(k) * n + k];
        for (int i = k + 1; i < n; ++i) {
            double& m = lu[static_cast<std::size_t>(i) * n + k];
            m /= d;
            for (int j = k + 1; j < n; ++j)
                lu[static_cast<std::size_t>(i) * n + j] -= m * lu[static_cast<std::size_t>(k) * n + j];
        }
    }
    return f;
}

// x := A^{-1} x
inline void luSolve(const LuBlock& f, double* x) {
    const int n = f.n;
    const double* lu = f.lu.data();
    for (int k = 0; k < n; ++k)
        if (f.piv[k] != k) std::swap(x[k], x[f.piv[k]]);
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) x[i] -= lu[static_cast<std::size_t>(i) * n + j] * x[j];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) x[i] -= lu[static_cast<std::size_t>(i) * n + j] * x[j];
        x[i] /= lu[static_cast<std::size_t>(i) * n + i];
    }
}

// B := A^{-1} B, B is n x m row-major
inline void luSolveMat(const LuBlock& f, double* B, int m) {
    const int n = f.n;
    std::vector<double> col(n);
    for (int c = 0; c < m; ++c) {
        for (int i = 0; i < n; ++i) col[i] = B[static_cast<std::size_t>(i) * m + c];
        luSolve(f, col.data());
        for (int i = 0; i < n; ++i) B[static_cast<std::size_t>(i) * m + c] = col[i];
    }
}

inline double frobNorm(const double* A, int n) {
    double s = 0.0;
    for (int i = 0; i < n * n; ++i) s += A[i] * A[i];
    return std::sqrt(s);
}

// Dense LU solve for a general m x m system, used by the AMG coarse level.
struct DenseLu {
    std::vector<double> lu;
    std::vector<int> piv;
    int m = 0;
};

inline DenseLu denseFactor(std::vector<double> A, int m) {
    DenseLu f;
    f.m = m;
    f.lu = std::move(A);
    f.piv.resize(m);
    double* lu = f.lu.data();
    for (int k = 0; k < m; ++k) {
        int p = k;
        double best = std::fabs(lu[static_cast<std::size_t>(k) * m + k]);
        for (int i = k + 1; i < m; ++i) {
            const double v = std::fabs(lu[static_cast<std::size_t>(i) * m + k]);
            if (v > best) { best = v; p = i; }
        }
        if (best < kSingularPivot) throw std::runtime_error("singular coarse-level matrix");
        f.piv[k] = p;
        if (p != k)
            for (int j = 0; j < m; ++j)
                std::swap(lu[static_cast<std::size_t>(k) * m + j], lu[static_cast<std::size_t>(p) * m + j]);
        const double d = lu[static_cast<std::size_t>(k) * m + k];
        for (int i = k + 1; i < m; ++i) {
            double& mult = lu[static_cast<std::size_t>(i) * m + k];
            mult /= d;
            for (int j = k + 1; j < m; ++j)
                lu[static_cast<std::size_t>(i) * m + j] -= mult * lu[static_cast<std::size_t>(k) * m + j];
        }
    }
    return f;
}

inline void denseSolve(const DenseLu& f, double* x) {
    const int m = f.m;
    const double* lu = f.lu.data();
    for (int k = 0; k < m; ++k)
        if (f.piv[k] != k) std::swap(x[k], x[f.piv[k]]);
    for (int i = 1; i < m; ++i)
        for (int j = 0; j < i; ++j) x[i] -= lu[static_cast<std::size_t>(i) * m + j] * x[j];
    for (int i = m - 1; i >= 0; --i) {
        for (int j = i + 1; j < m; ++j) x[i] -= lu[static_cast<std::size_t>(i) * m + j] * x[j];
        x[i] /= lu[static_cast<std::size_t>(i) * m + i];
    }
}

} // namespace fvb::smallmat
