#pragma once

// Engine-side block CSR (AoS) storage: row offsets, block column indices
// and contiguous row-major block values. LDU <-> CSR conversion is a pure
// permutation of the scalar values.

#include "blockfv/block_matrix.hpp"

#include <cstdint>
#include <vector>

namespace fvb {

struct BlockCsrMatrix {
    int nRows = 0;
    int blockSize = 0;
    std::vector<int> rowOffsets;   // nRows + 1
    std::vector<int> colIndices;   // nnz, strictly increasing within a row
    std::vector<double> values;    // nnz * n * n, blocks row-major

    int nnz() const { return static_cast<int>(colIndices.size()); }
    double* block(int k) { return values.data() + static_cast<std::size_t>(k) * blockSize * blockSize; }
    const double* block(int k) const { return values.data() + static_cast<std::size_t>(k) * blockSize * blockSize; }

    // Index of the (row, col) block, -1 if not present.
    int find(int row, int col) const;
    // Diagonal block index of a row (located by search, not by convention).
    int diagIndex(int row) const { return find(row, row); }

    void validate() const;
};

// Builds canonical block CSR from an LDU matrix. Values are copied
// bit-identically, no arithmetic.
BlockCsrMatrix lduToBlockCsr(const BlockLduMatrix& A);

// Inverse permutation; target must share the source addressing.
void blockCsrToLdu(const BlockCsrMatrix& csr, BlockLduMatrix& A);

// In-place value refresh, O(nnz * n^2). Throws std::runtime_error if the
// LDU addressing no longer matches the CSR structure.
void replaceValues(BlockCsrMatrix& csr, const BlockLduMatrix& A);

// y = A x on CSR storage.
void csrMatvec(const BlockCsrMatrix& A, const double* x, double* y);

// Cheap structural fingerprint used to detect topology changes.
std::uint64_t topologySignature(const BlockLduMatrix& A);
std::uint64_t topologySignature(const BlockCsrMatrix& A);

} // namespace fvb
