#include "blockfv/block_matrix.hpp"

#include "support/test_helpers.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace fvb;

TEST_CASE("variable layout is vector-first") {
    const Mesh m = generate1dTube(3, 1.0);
    BlockLduMatrix A(m, {{"p", 1}, {"U", 3}});
    CHECK(A.blockSize() == 4);
    CHECK(A.variables()[0].name == "U");
    CHECK(A.variables()[1].name == "p");

    const SubBlockView up = A.view("U", "p");
    CHECK(up.rowStart == 0);
    CHECK(up.rowSize == 3);
    CHECK(up.colStart == 3);
    CHECK(up.colSize == 1);

    const SubBlockView pu = A.view("p", "U");
    CHECK(pu.rowStart == 3);
    CHECK(pu.colSize == 3);

    CHECK_THROWS_AS(A.view("q", "p"), std::invalid_argument);
    CHECK_THROWS_AS(BlockLduMatrix(m, {}), std::invalid_argument);
    CHECK_THROWS_AS(BlockLduMatrix(m, {{"t", 2}}), std::invalid_argument);
}

TEST_CASE("subEntry reads and writes through views") {
    const Mesh m = generate1dTube(3, 1.0);
    BlockLduMatrix A(m, {{"U", 3}, {"p", 1}});
    const SubBlockView v = A.view("p", "U");

    A.subEntry(v, 1, BlockPart::diag, 0, 2) = 7.5;
    CHECK(A.diag(1)[3 * 4 + 2] == 7.5);
    CHECK(A.subEntry(v, 1, BlockPart::diag, 0, 2) == 7.5);

    A.subEntry(v, 0, BlockPart::upper, 0, 1) = -2.0;
    CHECK(A.upper(0)[3 * 4 + 1] == -2.0);

    CHECK_THROWS_AS(A.subEntry(v, 0, BlockPart::diag, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(A.subEntry(v, 0, BlockPart::diag, 0, 3), std::invalid_argument);
}

TEST_CASE("addFaceContribution accumulates") {
    const Mesh m = generate1dTube(2, 1.0);
    BlockLduMatrix A(m, {{"a", 1}});
    const double d0 = 1.0, d1 = 2.0, u = 3.0, l = 4.0;
    A.addFaceContribution(0, &d0, &d1, &u, &l);
    A.addFaceContribution(0, &d0, &d1, &u, &l);
    CHECK(A.diag(0)[0] == 2.0);
    CHECK(A.diag(1)[0] == 4.0);
    CHECK(A.upper(0)[0] == 6.0);
    CHECK(A.lower(0)[0] == 8.0);
    A.setZero();
    CHECK(A.diag(0)[0] == 0.0);
}

TEST_CASE("block matvec equals the dense oracle") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const Mesh m = testsup::randomMesh(rng, 200);
        for (int n : {1, 3, 4, 5}) {
            BlockLduMatrix A(m, testsup::variablesFor(n));
            testsup::randomize(A, rng);
            const BlockVector x = testsup::randomVector(m.nCells(), n, rng);

            const BlockVector y = blockMatvec(A, x);
            const auto yRef = testsup::denseMatvec(testsup::denseFrom(A), x.values);
            for (std::size_t i = 0; i < yRef.size(); ++i)
                CHECK(y.values[i] == doctest::Approx(yRef[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("dump emits global scalar coordinates") {
    const Mesh m = generate1dTube(2, 1.0);
    BlockLduMatrix A(m, {{"a", 1}});
    *A.diag(0) = 1.5;
    *A.upper(0) = 2.5;
    const std::string text = A.dump();
    CHECK(text.find("0 0") != std::string::npos);
    CHECK(text.find("1.5") != std::string::npos);
    CHECK(text.find("2.5") != std::string::npos);
}
