#include "blockfv/preconditioner.hpp"

#include <stdexcept>

namespace fvb {

namespace {

std::vector<smallmat::LuBlock> factorCsrDiagonals(const BlockCsrMatrix& A) {
    std::vector<smallmat::LuBlock> inv;
    inv.reserve(A.nRows);
    for (int r = 0; r < A.nRows; ++r) {
        const int d = A.diagIndex(r);
        if (d < 0) throw std::runtime_error("preconditioner setup: missing diagonal in row " + std::to_string(r));
        try {
            inv.push_back(smallmat::luFactor(A.block(d), A.blockSize));
        } catch (const std::runtime_error&) {
            throw std::runtime_error("preconditioner setup: singular diagonal block in cell " + std::to_string(r));
        }
    }
    return inv;
}

} // namespace

CsrLusgsPrecond::CsrLusgsPrecond(const BlockCsrMatrix& A)
    : A_(&A), diagInv_(factorCsrDiagonals(A)) {}

void CsrLusgsPrecond::apply(const double* r, double* z) const {
    const BlockCsrMatrix& A = *A_;
    const int n = A.blockSize;
    std::vector<double> tmp(n);

    // forward: (D+L) z = r
    for (int i = 0; i < A.nRows; ++i) {
        double* zi = z + static_cast<std::size_t>(i) * n;
        for (int q = 0; q < n; ++q) zi[q] = r[static_cast<std::size_t>(i) * n + q];
        for (int k = A.rowOffsets[i]; k < A.rowOffsets[i + 1]; ++k) {
            const int j = A.colIndices[k];
            if (j >= i) break;
            smallmat::matvecSub(A.block(k), z + static_cast<std::size_t>(j) * n, zi, n);
        }
        smallmat::luSolve(diagInv_[i], zi);
    }
    // backward: z_i -= D_i^{-1} sum_{j>i} U_ij z_j
    for (int i = A.nRows - 1; i >= 0; --i) {
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (int k = A.rowOffsets[i + 1] - 1; k >= A.rowOffsets[i]; --k) {
            const int j = A.colIndices[k];
            if (j <= i) break;
            smallmat::matvecAdd(A.block(k), z + static_cast<std::size_t>(j) * n, tmp.data(), n);
        }
        smallmat::luSolve(diagInv_[i], tmp.data());
        double* zi = z + static_cast<std::size_t>(i) * n;
        for (int q = 0; q < n; ++q) zi[q] -= tmp[q];
    }
}

LduLusgsPrecond::LduLusgsPrecond(const BlockLduMatrix& A) : A_(&A) {
    const int n = A.blockSize();
    diagInv_.reserve(A.nCells());
    for (int c = 0; c < A.nCells(); ++c) {
        try {
            diagInv_.push_back(smallmat::luFactor(A.diag(c), n));
        } catch (const std::runtime_error&) {
            throw std::runtime_error("LUSGS setup: singular diagonal block in cell " + std::to_string(c));
        }
    }
    lowerFaces_.resize(A.nCells());
    upperFaces_.resize(A.nCells());
    const auto& faces = A.mesh().faces();
    for (int f = 0; f < A.nFaces(); ++f) {
        lowerFaces_[faces[f].neighbour].push_back(f);  // row neighbour, col owner < row
        upperFaces_[faces[f].owner].push_back(f);      // row owner, col neighbour > row
    }
}

void LduLusgsPrecond::apply(const double* r, double* z) const {
    const BlockLduMatrix& A = *A_;
    const int n = A.blockSize();
    const auto& faces = A.mesh().faces();
    std::vector<double> tmp(n);

    for (int i = 0; i < A.nCells(); ++i) {
        double* zi = z + static_cast<std::size_t>(i) * n;
        for (int q = 0; q < n; ++q) zi[q] = r[static_cast<std::size_t>(i) * n + q];
        for (int f : lowerFaces_[i])
            smallmat::matvecSub(A.lower(f), z + static_cast<std::size_t>(faces[f].owner) * n, zi, n);
        smallmat::luSolve(diagInv_[i], zi);
    }
    for (int i = A.nCells() - 1; i >= 0; --i) {
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (int f : upperFaces_[i])
            smallmat::matvecAdd(A.upper(f), z + static_cast<std::size_t>(faces[f].neighbour) * n, tmp.data(), n);
        smallmat::luSolve(diagInv_[i], tmp.data());
        double* zi = z + static_cast<std::size_t>(i) * n;
        for (int q = 0; q < n; ++q) zi[q] -= tmp[q];
    }
}

CsrDiluPrecond::CsrDiluPrecond(const BlockCsrMatrix& A) : A_(&A) {
    const int n = A.blockSize;
    std::vector<std::vector<double>> dTilde(A.nRows);
    dTildeInv_.reserve(A.nRows);
    std::vector<double> t(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < A.nRows; ++i) {
        const int d = A.diagIndex(i);
        if (d < 0) throw std::runtime_error("DILU setup: missing diagonal in row " + std::to_string(i));
        dTilde[i].assign(A.block(d), A.block(d) + static_cast<std::size_t>(n) * n);
        for (int k = A.rowOffsets[i]; k < A.rowOffsets[i + 1]; ++k) {
            const int j = A.colIndices[k];
            if (j >= i) break;
            const int kji = A.find(j, i);
            if (kji < 0) continue;  // structurally one-sided coupling
            // t = D~_j^{-1} A_ji
            std::copy(A.block(kji), A.block(kji) + static_cast<std::size_t>(n) * n, t.begin());
            smallmat::luSolveMat(dTildeInv_[j], t.data(), n);
            smallmat::matmulSub(A.block(k), t.data(), dTilde[i].data(), n);
        }
        try {
            dTildeInv_.push_back(smallmat::luFactor(dTilde[i].data(), n));
        } catch (const std::runtime_error&) {
            throw std::runtime_error("DILU setup: singular modified diagonal in cell " + std::to_string(i));
        }
    }
}

void CsrDiluPrecond::apply(const double* r, double* z) const {
    const BlockCsrMatrix& A = *A_;
    const int n = A.blockSize;
    std::vector<double> tmp(n);

    // forward: (D~+L) y = r, y stored in z
    for (int i = 0; i < A.nRows; ++i) {
        double* zi = z + static_cast<std::size_t>(i) * n;
        for (int q = 0; q < n; ++q) zi[q] = r[static_cast<std::size_t>(i) * n + q];
        for (int k = A.rowOffsets[i]; k < A.rowOffsets[i + 1]; ++k) {
            const int j = A.colIndices[k];
            if (j >= i) break;
            smallmat::matvecSub(A.block(k), z + static_cast<std::size_t>(j) * n, zi, n);
        }
        smallmat::luSolve(dTildeInv_[i], zi);
    }
    // backward: z_i = y_i - D~_i^{-1} sum_{j>i} A_ij z_j
    for (int i = A.nRows - 1; i >= 0; --i) {
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (int k = A.rowOffsets[i + 1] - 1; k >= A.rowOffsets[i]; --k) {
            const int j = A.colIndices[k];
            if (j <= i) break;
            smallmat::matvecAdd(A.block(k), z + static_cast<std::size_t>(j) * n, tmp.data(), n);
        }
        smallmat::luSolve(dTildeInv_[i], tmp.data());
        double* zi = z + static_cast<std::size_t>(i) * n;
        for (int q = 0; q < n; ++q) zi[q] -= tmp[q];
    }
}

} // namespace fvb
