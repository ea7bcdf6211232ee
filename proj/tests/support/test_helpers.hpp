#pragma once

// Shared helpers for the test suite: random meshes and matrices, and a
// dense reference implementation used as the matvec/solve oracle.

#include "blockfv/block_matrix.hpp"
#include "blockfv/mesh.hpp"

#include <random>
#include <stdexcept>
#include <vector>

namespace testsup {

inline fvb::Mesh randomMesh(std::mt19937& rng, int maxCells = 1000) {
    std::uniform_int_distribution<int> pick(0, 2);
    switch (pick(rng)) {
        case 0: {
            std::uniform_int_distribution<int> d(2, 31);
            int nx = d(rng), ny = d(rng);
            while (nx * ny > maxCells) { nx = d(rng); ny = d(rng); }
            return fvb::generateStructured2d(nx, ny, {1.0, 1.0, 1.0});
        }
        case 1: {
            std::uniform_int_distribution<int> d(2, maxCells);
            return fvb::generate1dTube(d(rng), 1.0);
        }
        default: {
            std::uniform_int_distribution<int> d(2, 20);
            return fvb::generateStructured2d(d(rng), d(rng), {2.0, 0.5, 1.0});
        }
    }
}

inline std::vector<fvb::VariableDescriptor> variablesFor(int n) {
    switch (n) {
        case 1: return {{"a", 1}};
        case 3: return {{"v", 3}};
        case 4: return {{"v", 3}, {"a", 1}};
        case 5: return {{"v", 3}, {"a", 1}, {"b", 1}};
        default: throw std::invalid_argument("unsupported block size");
    }
}

// Random coefficients with a strongly dominant diagonal so Krylov tests
// have a well-conditioned system.
inline void randomize(fvb::BlockLduMatrix& A, std::mt19937& rng, double diagBoost = 4.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = A.blockSize();
    for (int f = 0; f < A.nFaces(); ++f)
        for (int q = 0; q < n * n; ++q) {
            A.upper(f)[q] = u(rng);
            A.lower(f)[q] = u(rng);
        }
    std::vector<double> rowMass(static_cast<std::size_t>(A.nCells()) * n, 0.0);
    const auto& faces = A.mesh().faces();
    for (int f = 0; f < A.nFaces(); ++f)
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                rowMass[static_cast<std::size_t>(faces[f].owner) * n + r] += std::abs(A.upper(f)[r * n + c]);
                rowMass[static_cast<std::size_t>(faces[f].neighbour) * n + r] += std::abs(A.lower(f)[r * n + c]);
            }
    for (int i = 0; i < A.nCells(); ++i)
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                double v = u(rng);
                if (r == c) v += diagBoost * (rowMass[static_cast<std::size_t>(i) * n + r] + n);
                A.diag(i)[r * n + c] = v;
            }
}

inline fvb::BlockVector randomVector(int nCells, int n, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    fvb::BlockVector x(nCells, n);
    for (double& v : x.values) v = u(rng);
    return x;
}

// Dense row-major copy in global scalar coordinates.
inline std::vector<double> denseFrom(const fvb::BlockLduMatrix& A) {
    const int n = A.blockSize();
    const std::size_t N = static_cast<std::size_t>(A.nCells()) * n;
    std::vector<double> D(N * N, 0.0);
    auto put = [&](int row, int col, const double* blk) {
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                D[(static_cast<std::size_t>(row) * n + r) * N + static_cast<std::size_t>(col) * n + c] +=
                    blk[r * n + c];
    };
    for (int i = 0; i < A.nCells(); ++i) put(i, i, A.diag(i));
    const auto& faces = A.mesh().faces();
    for (int f = 0; f < A.nFaces(); ++f) {
        put(faces[f].owner, faces[f].neighbour, A.upper(f));
        put(faces[f].neighbour, faces[f].owner, A.lower(f));
    }
    return D;
}

inline std::vector<double> denseMatvec(const std::vector<double>& D, const std::vector<double>& x) {
    const std::size_t N = x.size();
    std::vector<double> y(N, 0.0);
    for (std::size_t r = 0; r < N; ++r)
        for (std::size_t c = 0; c < N; ++c) y[r] += D[r * N + c] * x[c];
    return y;
}

// Gaussian elimination with partial pivoting; independent of the library
// LU helpers.
inline std::vector<double> denseSolveOracle(std::vector<double> D, std::vector<double> b) {
    const std::size_t N = b.size();
    for (std::size_t k = 0; k < N; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < N; ++i)
            if (std::abs(D[i * N + k]) > std::abs(D[p * N + k])) p = i;
        if (p != k) {
            for (std::size_t j = 0; j < N; ++j) std::swap(D[k * N + j], D[p * N + j]);
            std::swap(b[k], b[p]);
        }
        for (std::size_t i = k + 1; i < N; ++i) {
            const double m = D[i * N + k] / D[k * N + k];
            for (std::size_t j = k; j < N; ++j) D[i * N + j] -= m * D[k * N + j];
            b[i] -= m * b[k];
        }
    }
    for (std::size_t i = N; i-- > 0;) {
        for (std::size_t j = i + 1; j < N; ++j) b[i] -= D[i * N + j] * b[j];
        b[i] /= D[i * N + i];
    }
    return b;
}

} // namespace testsup
