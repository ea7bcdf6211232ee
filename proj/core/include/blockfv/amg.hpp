#pragma once

// Pairwise-aggregation algebraic multigrid for block CSR matrices, used
// as a V-cycle preconditioner with DILU smoothing and a block-dense
// direct solve on the coarsest level.

#include "blockfv/block_csr.hpp"
#include "blockfv/krylov.hpp"
#include "blockfv/preconditioner.hpp"
#include "blockfv/smallmat.hpp"

#include <memory>
#include <vector>

namespace fvb {

struct AmgLevel {
    BlockCsrMatrix A;
    std::vector<int> aggregate;  // fine row -> coarse row (empty on coarsest)
    int nCoarse = 0;
    std::unique_ptr<CsrDiluPrecond> smoother;
};

class AmgHierarchy final : public Preconditioner {
public:
    AmgHierarchy(const BlockCsrMatrix& fine, const AmgConfig& cfg);

    int depth() const { return static_cast<int>(levels_.size()); }
    const AmgLevel& level(int l) const { return levels_[l]; }

    // One V-cycle from zero initial guess: z ~= A^{-1} r.
    void apply(const double* r, double* z) const override;

private:
    void vcycle(int l, const double* r, double* z) const;

    AmgConfig cfg_;
    std::vector<AmgLevel> levels_;
    smallmat::DenseLu coarseLu_;
    int coarseRows_ = 0;
};

// Pairwise aggregation on the scalar strength graph
// s_ij = ||A_ij||_F / sqrt(||A_ii||_F ||A_jj||_F). Isolated rows become
// singleton aggregates.
std::vector<int> pairwiseAggregate(const BlockCsrMatrix& A, int& nCoarseOut);

// Galerkin coarse operator with piecewise-constant block transfer:
// coarse blocks are sums of fine blocks within aggregate pairs.
BlockCsrMatrix galerkinCoarse(const BlockCsrMatrix& A, const std::vector<int>& aggregate, int nCoarse);

} // namespace fvb
