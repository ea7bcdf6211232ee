#include "blockfv/partition.hpp"

#include "support/test_helpers.hpp"

#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>

using namespace fvb;

namespace {

std::vector<double> valueMultiset(const std::vector<MatrixPartition>& parts) {
    std::vector<double> all;
    for (const MatrixPartition& p : parts) {
        all.insert(all.end(), p.local.values.begin(), p.local.values.end());
        for (const HaloEntry& h : p.halo.entries)
            all.insert(all.end(), h.block.begin(), h.block.end());
    }
    std::sort(all.begin(), all.end());
    return all;
}

std::vector<double> valueMultiset(const BlockLduMatrix& A) {
    std::vector<double> all;
    auto add = [&all](std::span<const double> s) { all.insert(all.end(), s.begin(), s.end()); };
    add(A.diagValues());
    add(A.upperValues());
    add(A.lowerValues());
    std::sort(all.begin(), all.end());
    return all;
}

double maxRelDiff(const BlockVector& a, const BlockVector& b) {
    double scale = 0.0, err = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        scale = std::max(scale, std::fabs(a.values[i]));
        err = std::max(err, std::fabs(a.values[i] - b.values[i]));
    }
    return err / std::max(scale, 1e-300);
}

} // namespace

TEST_CASE("decomposition yields consecutive global rows per rank") {
    const Mesh m = generateStructured2d(3, 3, {1, 1, 1});
    const Decomposition dec = decompose(m, 3);
    CHECK(dec.rankRowOffset == std::vector<int>{0, 3, 6, 9});
    for (int r = 0; r < 3; ++r) {
        REQUIRE(dec.localToGlobalRow[r].size() == 3);
        for (int l = 0; l < 3; ++l)
            CHECK(dec.localToGlobalRow[r][l] == dec.rankRowOffset[r] + l);
    }
    for (int c = 0; c < m.nCells(); ++c) {
        const int g = dec.oldToNewRow[c];
        CHECK(dec.newToOldRow[g] == c);
        CHECK(dec.rankOfRow(g) == dec.cellToRank[c]);
    }
}

TEST_CASE("decomposition balances a tube across four ranks") {
    const Mesh m = generate1dTube(100, 1.0);
    const Decomposition dec = decompose(m, 4);
    for (int r = 0; r < 4; ++r) CHECK(dec.nLocalRows(r) == 25);
    // bisection on x: rank assignment is monotone along the tube
    for (int c = 1; c < m.nCells(); ++c)
        CHECK(dec.cellToRank[c] >= dec.cellToRank[c - 1]);
    CHECK_THROWS_AS(decompose(m, 0), std::invalid_argument);
    CHECK_THROWS_AS(decompose(m, 101), std::invalid_argument);
}

TEST_CASE("decomposition is deterministic") {
    const Mesh m = generateStructured2d(7, 5, {1, 1, 1});
    const Decomposition a = decompose(m, 3);
    const Decomposition b = decompose(m, 3);
    CHECK(a.cellToRank == b.cellToRank);
    CHECK(a.oldToNewRow == b.oldToNewRow);
}

TEST_CASE("single-rank partition is the serial matrix with no halo") {
    std::mt19937 rng(14);
    const Mesh m = generateStructured2d(4, 4, {1, 1, 1});
    BlockLduMatrix A(m, testsup::variablesFor(4));
    testsup::randomize(A, rng);

    const Decomposition dec = decompose(m, 1);
    const auto parts = buildPartitioned(A, dec);
    REQUIRE(parts.size() == 1);
    CHECK(parts[0].halo.count() == 0);
    CHECK(parts[0].sendPlan.empty());
    CHECK(parts[0].local.nnz() == m.nCells() + 2 * m.nInternalFaces());
    CHECK(valueMultiset(parts) == valueMultiset(A));
}

TEST_CASE("two cells on two ranks expose one halo coupling each") {
    std::mt19937 rng(15);
    const Mesh m = generate1dTube(2, 1.0);
    BlockLduMatrix A(m, testsup::variablesFor(3));
    testsup::randomize(A, rng);

    const Decomposition dec = decompose(m, 2);
    const auto parts = buildPartitioned(A, dec);
    REQUIRE(parts.size() == 2);
    for (int r = 0; r < 2; ++r) {
        CHECK(parts[r].nLocalRows() == 1);
        REQUIRE(parts[r].halo.count() == 1);
        const HaloEntry& h = parts[r].halo.entries[0];
        CHECK(h.localRow == 0);
        CHECK(h.peerRank == 1 - r);
        CHECK(h.globalCol == dec.rankRowOffset[1 - r]);
        REQUIRE(parts[r].sendPlan.size() == 1);
        CHECK(parts[r].sendPlan[0] == std::pair<int, int>{1 - r, 0});
    }
    CHECK(valueMultiset(parts) == valueMultiset(A));
}

TEST_CASE("partitioning conserves the scalar value multiset") {
    std::mt19937 rng(16);
    const Mesh m = generateStructured2d(6, 5, {1, 1, 1});
    BlockLduMatrix A(m, testsup::variablesFor(5));
    testsup::randomize(A, rng);
    for (int nRanks : {2, 3, 4}) {
        const Decomposition dec = decompose(m, nRanks);
        CHECK(valueMultiset(buildPartitioned(A, dec)) == valueMultiset(A));
    }
}

TEST_CASE("distributed matvec equals the serial matvec") {
    std::mt19937 rng(17);
    const Mesh m = generateStructured2d(8, 7, {1, 1, 1});
    BlockLduMatrix A(m, testsup::variablesFor(4));
    testsup::randomize(A, rng);
    const BlockVector x = testsup::randomVector(m.nCells(), 4, rng);

    // serial result, permuted to the renumbered row order per decomposition
    const BlockVector ySerial = blockMatvec(A, x);

    for (int nRanks : {1, 2, 3, 4, 8}) {
        const Decomposition dec = decompose(m, nRanks);
        const auto parts = buildPartitioned(A, dec);
        MailboxNetwork net;
        const DistributedVector xd = scatterVector(x, dec, 4);
        const DistributedVector yd = distributedMatvec(parts, xd, net);
        const BlockVector y = gatherVector(yd, dec, 4);
        CHECK(maxRelDiff(ySerial, y) <= 1e-13);
        CHECK(net.empty());
    }
}

TEST_CASE("missing halo traffic raises a distributed failure naming the ranks") {
    MailboxNetwork net;
    CHECK_THROWS_WITH_AS(net.receive(2, 0, "halo"), doctest::Contains("rank 2"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(net.receive(2, 0, "halo"), doctest::Contains("rank 0"),
                         std::runtime_error);

    net.send({0, 2, "halo", {5}, {1.0}});
    // a mismatched tag is consumed and reported as a failure too
    CHECK_THROWS_WITH_AS(net.receive(2, 0, "upload"), doctest::Contains("upload"),
                         std::runtime_error);
    net.send({0, 2, "halo", {5}, {1.0}});
    const MailboxNetwork::Message msg = net.receive(2, 0, "halo");
    CHECK(msg.ids == std::vector<int>{5});
    CHECK(net.empty());
}

TEST_CASE("consolidation onto one engine rebuilds the serial operator") {
    std::mt19937 rng(18);
    const Mesh m = generateStructured2d(6, 6, {1, 1, 1});
    BlockLduMatrix A(m, testsup::variablesFor(4));
    testsup::randomize(A, rng);
    const Decomposition dec = decompose(m, 3);
    const auto parts = buildPartitioned(A, dec);

    const ConsolidationPlan plan = makeConsolidationPlan(dec, 1);
    plan.validate(dec);
    const auto engines = consolidate(parts, plan, dec);
    REQUIRE(engines.size() == 1);
    CHECK(engines[0].halo.count() == 0);
    CHECK(engines[0].nLocalRows() == m.nCells());
    CHECK(engines[0].memberRanks == std::vector<int>{0, 1, 2});
    CHECK(valueMultiset(engines) == valueMultiset(A));

    // matvec through the consolidated operator matches the serial one
    const BlockVector x = testsup::randomVector(m.nCells(), 4, rng);
    const BlockVector ySerial = blockMatvec(A, x);
    DistributedVector xg(1);
    for (int g = 0; g < m.nCells(); ++g)
        for (int k = 0; k < 4; ++k)
            xg[0].push_back(x.values[static_cast<std::size_t>(dec.newToOldRow[g]) * 4 + k]);
    std::vector<double> y(xg[0].size());
    csrMatvec(engines[0].local, xg[0].data(), y.data());
    for (int g = 0; g < m.nCells(); ++g)
        for (int k = 0; k < 4; ++k)
            CHECK(y[static_cast<std::size_t>(g) * 4 + k] ==
                  doctest::Approx(ySerial.values[static_cast<std::size_t>(dec.newToOldRow[g]) * 4 + k])
                      .epsilon(1e-13));
}

TEST_CASE("consolidation shrinks the external coupling count") {
    std::mt19937 rng(19);
    const Mesh m = generateStructured2d(8, 8, {1, 1, 1});
    BlockLduMatrix A(m, testsup::variablesFor(4));
    testsup::randomize(A, rng);
    const Decomposition dec = decompose(m, 4);
    const auto parts = buildPartitioned(A, dec);

    const ConsolidationPlan plan = makeConsolidationPlan(dec, 2);
    const auto engines = consolidate(parts, plan, dec);
    REQUIRE(engines.size() == 2);

    int rankHalo = 0, engineHalo = 0;
    for (const auto& p : parts) rankHalo += p.halo.count();
    for (const auto& e : engines) engineHalo += e.halo.count();
    CHECK(engineHalo > 0);
    CHECK(engineHalo < rankHalo);
    CHECK(valueMultiset(engines) == valueMultiset(A));

    CHECK_THROWS_AS(makeConsolidationPlan(dec, 5), std::invalid_argument);
    CHECK_THROWS_AS(makeConsolidationPlan(dec, 0), std::invalid_argument);
}

TEST_CASE("distributed solve matches the serial solution") {
    std::mt19937 rng(20);
    const Mesh m = generateStructured2d(8, 6, {1, 1, 1});
    BlockLduMatrix A(m, testsup::variablesFor(4));
    testsup::randomize(A, rng);
    const BlockVector b = testsup::randomVector(m.nCells(), 4, rng);
    const BlockVector x0(m.nCells(), 4);

    SolverConfig cfg;
    cfg.relTol = 1e-12;
    cfg.maxIters = 2000;
    const auto [xSerial, repSerial] = backendSolve(A, b, x0, Backend::EngineCsr, cfg);
    REQUIRE(repSerial.converged);

    const std::pair<int, int> layouts[] = {{2, 1}, {4, 2}, {4, 4}, {3, 2}};
    for (const auto& [nRanks, nEngines] : layouts) {
        const Decomposition dec = decompose(m, nRanks);
        const auto parts = buildPartitioned(A, dec);
        const ConsolidationPlan plan = makeConsolidationPlan(dec, nEngines);
        MailboxNetwork net;
        const auto [xd, rep] = distributedSolve(parts, scatterVector(b, dec, 4),
                                                scatterVector(x0, dec, 4), cfg, plan, dec, net);
        REQUIRE(rep.converged);
        const BlockVector x = gatherVector(xd, dec, 4);
        CHECK(maxRelDiff(xSerial, x) <= 1e-9);
        for (const char* key : {"convert", "setup", "solve", "retrieve"})
            CHECK(rep.timings.count(key) == 1);
    }
}

TEST_CASE("partition report lists ranks, rows and engine assignment") {
    const Mesh m = generateStructured2d(4, 4, {1, 1, 1});
    BlockLduMatrix A(m, testsup::variablesFor(4));
    std::mt19937 rng(3);
    testsup::randomize(A, rng);
    const Decomposition dec = decompose(m, 2);
    const auto parts = buildPartitioned(A, dec);
    const ConsolidationPlan plan = makeConsolidationPlan(dec, 1);
    const std::string json = partitionReportJson(dec, parts, plan);
    CHECK(json.find("\"nRanks\": 2") != std::string::npos);
    CHECK(json.find("\"nEngines\": 1") != std::string::npos);
    CHECK(json.find("nExternalNZ") != std::string::npos);
}
