#pragma once

// Block preconditioners: symmetric Gauss-Seidel sweeps (LUSGS) and
// diagonal-based incomplete LU (DILU), on both CSR and LDU storage.

#include "blockfv/block_csr.hpp"
#include "blockfv/smallmat.hpp"

#include <memory>
#include <vector>

namespace fvb {

class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    // z = M^{-1} r
    virtual void apply(const double* r, double* z) const = 0;
};

class IdentityPrecond final : public Preconditioner {
public:
    explicit IdentityPrecond(std::size_t n) : n_(n) {}
    void apply(const double* r, double* z) const override {
        for (std::size_t i = 0; i < n_; ++i) z[i] = r[i];
    }
private:
    std::size_t n_;
};

// One symmetric sweep: (D+L) z* = r forward, then (D+U) backward
// correction. Exact for block-triangular and block-diagonal matrices.
class CsrLusgsPrecond final : public Preconditioner {
public:
    explicit CsrLusgsPrecond(const BlockCsrMatrix& A);
    void apply(const double* r, double* z) const override;
private:
    const BlockCsrMatrix* A_;
    std::vector<smallmat::LuBlock> diagInv_;
};

// Same sweep structure on LDU addressing for the host backend.
class LduLusgsPrecond final : public Preconditioner {
public:
    explicit LduLusgsPrecond(const BlockLduMatrix& A);
    void apply(const double* r, double* z) const override;
private:
    const BlockLduMatrix* A_;
    std::vector<smallmat::LuBlock> diagInv_;
    // per cell: faces where the cell is the higher-index side (lower
    // blocks, columns < row) and the lower-index side (upper blocks)
    std::vector<std::vector<int>> lowerFaces_, upperFaces_;
};

// DILU: modified diagonals D~_i = A_ii - sum_{j<i} A_ij D~_j^{-1} A_ji,
// applied as z = (D~+U)^{-1} D~ (D~+L)^{-1} r.
class CsrDiluPrecond final : public Preconditioner {
public:
    explicit CsrDiluPrecond(const BlockCsrMatrix& A);
    void apply(const double* r, double* z) const override;
private:
    const BlockCsrMatrix* A_;
    std::vector<smallmat::LuBlock> dTildeInv_;
};

} // namespace fvb
