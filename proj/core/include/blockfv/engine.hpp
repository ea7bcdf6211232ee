#pragma once

// Backend-agnostic solve pipeline: the host path runs Krylov directly on
// LDU storage, the engine path stages the system through block-AoS / CSR
// conversion with a setup-or-replace branch and per-stage timings.

#include "blockfv/amg.hpp"
#include "blockfv/block_csr.hpp"
#include "blockfv/krylov.hpp"
#include "blockfv/preconditioner.hpp"

#include <memory>
#include <utility>

namespace fvb {

enum class Backend { HostLdu, EngineCsr };

// Preconditioner factory for CSR systems.
std::unique_ptr<Preconditioner> makeCsrPreconditioner(const BlockCsrMatrix& A, const SolverConfig& cfg);

// Krylov solve on an assembled CSR system. x0 gives the initial guess.
std::pair<BlockVector, SolveReport> solveCsr(const BlockCsrMatrix& A, const BlockVector& b,
                                             const BlockVector& x0, const SolverConfig& cfg);

// Stateful pipeline: remembers the engine-side matrix between calls so
// unchanged topology takes the cheap value-replace branch.
class SolvePipeline {
public:
    std::pair<BlockVector, SolveReport> solve(const BlockLduMatrix& A, const BlockVector& b,
                                              const BlockVector& x0, Backend backend,
                                              const SolverConfig& cfg);

private:
    bool hasSetup_ = false;
    std::uint64_t signature_ = 0;
    BlockCsrMatrix csr_;
};

// One-shot convenience wrapper around a fresh pipeline.
std::pair<BlockVector, SolveReport> backendSolve(const BlockLduMatrix& A, const BlockVector& b,
                                                 const BlockVector& x0, Backend backend,
                                                 const SolverConfig& cfg);

} // namespace fvb
