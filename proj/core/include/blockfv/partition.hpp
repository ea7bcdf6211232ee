#pragma once

// Distributed-matrix layer with simulated ranks: coordinate-bisection
// decomposition with post-decomposition renumbering (each rank owns
// consecutive global rows), halo coefficient arrays addressed by local
// row / global column, consolidation of rank partitions onto fewer
// engine contexts, and a deterministic in-process mailbox harness.

#include "blockfv/block_csr.hpp"
#include "blockfv/engine.hpp"
#include "blockfv/krylov.hpp"
#include "blockfv/mesh.hpp"

#include <deque>
#include <map>
#include <string>
#include <vector>

namespace fvb {

struct Decomposition {
    int nRanks = 0;
    std::vector<int> cellToRank;                   // by original cell index
    std::vector<int> rankRowOffset;                // nRanks + 1, global row ranges
    std::vector<std::vector<int>> localToGlobalRow;  // per rank, ascending
    std::vector<int> oldToNewRow;                  // original cell -> global row
    std::vector<int> newToOldRow;

    int rankOfRow(int globalRow) const;
    int nLocalRows(int rank) const { return rankRowOffset[rank + 1] - rankRowOffset[rank]; }
};

// Recursive coordinate bisection on cell centroids, then renumbering so
// every rank owns a consecutive global row range. Deterministic.
Decomposition decompose(const Mesh& mesh, int nRanks);

struct HaloEntry {
    int localRow = 0;
    int globalCol = 0;
    int peerRank = 0;
    std::vector<double> block;  // n x n row-major
};

struct HaloCoefficients {
    std::vector<HaloEntry> entries;
    int count() const { return static_cast<int>(entries.size()); }  // NExternalNZ
};

// One matrix partition; used both for MPI-rank partitions and for
// consolidated engine contexts (same row-range + halo structure).
struct MatrixPartition {
    int id = 0;
    int rowStart = 0, rowEnd = 0;        // owned global rows [rowStart, rowEnd)
    BlockCsrMatrix local;                // local row/col indices
    HaloCoefficients halo;               // couplings to off-partition columns
    // (peerId, localRow) pairs this partition must send before a matvec
    std::vector<std::pair<int, int>> sendPlan;
    std::vector<int> memberRanks;        // engines only

    int nLocalRows() const { return rowEnd - rowStart; }
};

// Splits a serial LDU matrix into per-rank partitions. The multiset of
// scalar values across local matrices and halo arrays equals the serial
// matrix values exactly.
std::vector<MatrixPartition> buildPartitioned(const BlockLduMatrix& A, const Decomposition& dec);

struct ConsolidationPlan {
    int nEngines = 0;
    std::vector<int> rankToEngine;
    std::vector<int> engineRowOffset;  // per rank, row offset inside its engine

    void validate(const Decomposition& dec) const;
};

// Contiguous rank blocks per engine; nEngines <= nRanks.
ConsolidationPlan makeConsolidationPlan(const Decomposition& dec, int nEngines);

// Merges member ranks' partitions per engine, offsetting row and column
// indices; intra-engine halo entries become interior entries.
std::vector<MatrixPartition> consolidate(const std::vector<MatrixPartition>& parts,
                                         const ConsolidationPlan& plan, const Decomposition& dec);

// Reliable, ordered, deterministic in-process message transport between
// simulated ranks. Single-threaded round-robin scheduling.
class MailboxNetwork {
public:
    struct Message {
        int from = 0, to = 0;
        std::string tag;
        std::vector<int> ids;
        std::vector<double> payload;
    };

    void send(Message m);
    // Throws a distributed-failure error naming the ranks if no matching
    // message has been delivered.
    Message receive(int to, int from, const std::string& tag);
    bool empty() const { return queues_.empty(); }

private:
    std::map<std::pair<int, int>, std::deque<Message>> queues_;
};

// Distributed block vector: one slice per partition, concatenated in
// partition order these form the global vector in renumbered row order.
using DistributedVector = std::vector<std::vector<double>>;

DistributedVector scatterVector(const BlockVector& x, const Decomposition& dec, int blockSize);
BlockVector gatherVector(const DistributedVector& slices, const Decomposition& dec, int blockSize);

// y = A x with halo exchange through the mailbox network. Equals the
// serial block matvec up to roundoff for any decomposition.
DistributedVector distributedMatvec(const std::vector<MatrixPartition>& parts,
                                    const DistributedVector& x, MailboxNetwork& net);

// Krylov solve over consolidated engines: per-matvec halo exchange,
// fixed-order tree reductions for dot products, per-engine
// preconditioning, gather/scatter of rank slices through the network.
std::pair<DistributedVector, SolveReport> distributedSolve(const std::vector<MatrixPartition>& rankParts,
                                                           const DistributedVector& b,
                                                           const DistributedVector& x0,
                                                           const SolverConfig& cfg,
                                                           const ConsolidationPlan& plan,
                                                           const Decomposition& dec,
                                                           MailboxNetwork& net);

// Per-rank rows, NExternalNZ and engine assignment as a JSON document.
std::string partitionReportJson(const Decomposition& dec, const std::vector<MatrixPartition>& parts,
                                const ConsolidationPlan& plan);

} // namespace fvb
