#include "blockfv/amg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace fvb {

std::vector<int> pairwiseAggregate(const BlockCsrMatrix& A, int& nCoarseOut) {
    const int n = A.blockSize;
    std::vector<double> diagNorm(A.nRows, 0.0);
    for (int r = 0; r < A.nRows; ++r) {
        const int d = A.diagIndex(r);
        diagNorm[r] = d >= 0 ? smallmat::frobNorm(A.block(d), n) : 0.0;
    }

    std::vector<int> agg(A.nRows, -1);
    int next = 0;
    for (int r = 0; r < A.nRows; ++r) {
        if (agg[r] >= 0) continue;
        int best = -1;
        double bestStrength = -1.0;
        for (int k = A.rowOffsets[r]; k < A.rowOffsets[r + 1]; ++k) {
            const int j = A.colIndices[k];
            if (j == r || agg[j] >= 0) continue;
            const double denom = std::sqrt(std::max(diagNorm[r] * diagNorm[j], 1e-300));
            const double s = smallmat::frobNorm(A.block(k), n) / denom;
            if (s > bestStrength) { bestStrength = s; best = j; }
        }
        agg[r] = next;
        if (best >= 0) agg[best] = next;
        ++next;
    }
    nCoarseOut = next;
    return agg;
}

BlockCsrMatrix galerkinCoarse(const BlockCsrMatrix& A, const std::vector<int>& aggregate, int nCoarse) {
    const int n = A.blockSize;
    const int nn = n * n;

    // collect coarse sparsity, then sum fine blocks into coarse slots
    std::vector<std::map<int, int>> pattern(nCoarse);  // col -> slot (filled later)
    for (int r = 0; r < A.nRows; ++r)
        for (int k = A.rowOffsets[r]; k < A.rowOffsets[r + 1]; ++k)
            pattern[aggregate[r]].emplace(aggregate[A.colIndices[k]], 0);

    BlockCsrMatrix C;
    C.nRows = nCoarse;
    C.blockSize = n;
    C.rowOffsets.resize(nCoarse + 1, 0);
    for (int r = 0; r < nCoarse; ++r) {
        pattern[r].emplace(r, 0);  // always keep the diagonal
        C.rowOffsets[r + 1] = C.rowOffsets[r] + static_cast<int>(pattern[r].size());
        for (auto& [col, slot] : pattern[r]) {
            slot = static_cast<int>(C.colIndices.size());
            C.colIndices.push_back(col);
        }
    }
    C.values.assign(static_cast<std::size_t>(C.nnz()) * nn, 0.0);

    for (int r = 0; r < A.nRows; ++r)
        for (int k = A.rowOffsets[r]; k < A.rowOffsets[r + 1]; ++k) {
            const int slot = pattern[aggregate[r]].at(aggregate[A.colIndices[k]]);
            double* dst = C.block(slot);
            const double* src = A.block(k);
            for (int q = 0; q < nn; ++q) dst[q] += src[q];
        }
    return C;
}

AmgHierarchy::AmgHierarchy(const BlockCsrMatrix& fine, const AmgConfig& cfg) : cfg_(cfg) {
    levels_.push_back({fine, {}, 0, nullptr});
    while (static_cast<int>(levels_.size()) < cfg.maxLevels &&
           levels_.back().A.nRows > cfg.minCoarseRows) {
        AmgLevel& lvl = levels_.back();
        int nCoarse = 0;
        lvl.aggregate = pairwiseAggregate(lvl.A, nCoarse);
        if (nCoarse == lvl.A.nRows) { lvl.aggregate.clear(); break; }  // no coarsening possible
        lvl.nCoarse = nCoarse;
        BlockCsrMatrix coarse = galerkinCoarse(lvl.A, lvl.aggregate, nCoarse);
        levels_.push_back({std::move(coarse), {}, 0, nullptr});
    }

    // DILU smoother on all but the coarsest level
    for (std::size_t l = 0; l + 1 < levels_.size(); ++l)
        levels_[l].smoother = std::make_unique<CsrDiluPrecond>(levels_[l].A);

    // dense factorization of the coarsest level
    const BlockCsrMatrix& Ac = levels_.back().A;
    const int n = Ac.blockSize;
    coarseRows_ = Ac.nRows * n;
    std::vector<double> dense(static_cast<std::size_t>(coarseRows_) * coarseRows_, 0.0);
    for (int r = 0; r < Ac.nRows; ++r)
        for (int k = Ac.rowOffsets[r]; k < Ac.rowOffsets[r + 1]; ++k) {
            const int c = Ac.colIndices[k];
            const double* b = Ac.block(k);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    dense[static_cast<std::size_t>(r * n + i) * coarseRows_ + (c * n + j)] =
                        b[static_cast<std::size_t>(i) * n + j];
        }
    coarseLu_ = smallmat::denseFactor(std::move(dense), coarseRows_);
}

void AmgHierarchy::apply(const double* r, double* z) const {
    vcycle(0, r, z);
}

void AmgHierarchy::vcycle(int l, const double* r, double* z) const {
    const AmgLevel& lvl = levels_[l];
    const int n = lvl.A.blockSize;
    const std::size_t N = static_cast<std::size_t>(lvl.A.nRows) * n;

    if (l == depth() - 1) {
        std::copy(r, r + N, z);
        smallmat::denseSolve(coarseLu_, z);
        return;
    }

    std::fill(z, z + N, 0.0);
    std::vector<double> res(N), corr(N);

    auto smooth = [&](int sweeps) {
        for (int s = 0; s < sweeps; ++s) {
            csrMatvec(lvl.A, z, res.data());
            for (std::size_t i = 0; i < N; ++i) res[i] = r[i] - res[i];
            lvl.smoother->apply(res.data(), corr.data());
            for (std::size_t i = 0; i < N; ++i) z[i] += corr[i];
        }
    };

    smooth(cfg_.preSweeps);

    csrMatvec(lvl.A, z, res.data());
    for (std::size_t i = 0; i < N; ++i) res[i] = r[i] - res[i];

    // restrict by aggregate summation (piecewise-constant transfer)
    const std::size_t Nc = static_cast<std::size_t>(lvl.nCoarse) * n;
    std::vector<double> rc(Nc, 0.0), zc(Nc);
    for (int row = 0; row < lvl.A.nRows; ++row) {
        const int c = lvl.aggregate[row];
        for (int q = 0; q < n; ++q)
            rc[static_cast<std::size_t>(c) * n + q] += res[static_cast<std::size_t>(row) * n + q];
    }

    vcycle(l + 1, rc.data(), zc.data());

    // prolong by injection
    for (int row = 0; row < lvl.A.nRows; ++row) {
        const int c = lvl.aggregate[row];
        for (int q = 0; q < n; ++q)
            z[static_cast<std::size_t>(row) * n + q] += zc[static_cast<std::size_t>(c) * n + q];
    }

    smooth(cfg_.postSweeps);
}

} // namespace fvb
