#include "blockfv/mesh.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cstdio>
#include <fstream>

using namespace fvb;

TEST_CASE("structured 2d generator geometry") {
    const Mesh m = generateStructured2d(4, 3, {2.0, 1.5, 1.0});
    CHECK(m.nCells() == 12);
    CHECK(m.nInternalFaces() == 3 * 3 + 4 * 2);  // vertical + horizontal
    for (double v : m.cellVolumes()) CHECK(v == doctest::Approx(0.5 * 0.5));
    CHECK(m.cellCentroids()[0].x == doctest::Approx(0.25));
    CHECK(m.cellCentroids()[5].y == doctest::Approx(0.75));

    for (const InternalFace& f : m.faces()) {
        CHECK(f.owner < f.neighbour);
        CHECK(f.fx == doctest::Approx(0.5));
    }
    REQUIRE(m.findPatch("left") != nullptr);
    CHECK(m.findPatch("left")->kind == PatchKind::inlet);
    CHECK(m.findPatch("right")->kind == PatchKind::outlet);
    CHECK(m.findPatch("top")->faces.size() == 4);
    CHECK_FALSE(m.findPatch("missing"));
    m.validate();
}

TEST_CASE("1d tube generator") {
    const Mesh m = generate1dTube(10, 2.0);
    CHECK(m.nCells() == 10);
    CHECK(m.nInternalFaces() == 9);
    CHECK(m.cellVolumes()[0] == doctest::Approx(0.2));
    CHECK(m.centroidDelta(0).x == doctest::Approx(0.2));
    CHECK(m.findPatch("sides")->kind == PatchKind::slip);
    m.validate();
    CHECK_THROWS_AS(generate1dTube(1, 1.0), std::invalid_argument);
}

TEST_CASE("fromComponents enforces owner < neighbour") {
    std::vector<InternalFace> faces{{1, 0, {1.0, 0.0, 0.0}, 0.3}};
    BoundaryPatch end{"end", PatchKind::wall,
                      {{0, {-1.0, 0.0, 0.0}}, {0, {1.0, 0.0, 0.0}}, {1, {-1.0, 0.0, 0.0}},
                       {1, {1.0, 0.0, 0.0}}}};
    // give each cell a pair of cancelling boundary faces plus the shared
    // face so closure fails; disable the check and inspect the swap only
    const Mesh m = Mesh::fromComponents({1.0, 1.0}, {{0.5, 0, 0}, {1.5, 0, 0}}, faces, {end}, false);
    CHECK(m.faces()[0].owner == 0);
    CHECK(m.faces()[0].neighbour == 1);
    CHECK(m.faces()[0].areaVector.x == doctest::Approx(-1.0));
    CHECK(m.faces()[0].fx == doctest::Approx(0.7));
}

TEST_CASE("validate rejects broken meshes") {
    std::vector<InternalFace> badFx{{0, 1, {1.0, 0.0, 0.0}, 1.5}};
    CHECK_THROWS_WITH_AS(
        Mesh::fromComponents({1.0, 1.0}, {{0.5, 0, 0}, {1.5, 0, 0}}, badFx, {}),
        doctest::Contains("interpolation weight"), std::runtime_error);

    CHECK_THROWS_WITH_AS(
        Mesh::fromComponents({1.0, -1.0}, {{0.5, 0, 0}, {1.5, 0, 0}}, {}, {}),
        doctest::Contains("volume"), std::runtime_error);
}

TEST_CASE("save / load round trip") {
    const Mesh m = generateStructured2d(3, 2, {1.0, 1.0, 1.0});
    const std::string path = "roundtrip.blockmesh";
    m.save(path);
    const Mesh back = loadMesh(path);
    std::remove(path.c_str());

    REQUIRE(back.nCells() == m.nCells());
    REQUIRE(back.nInternalFaces() == m.nInternalFaces());
    for (int f = 0; f < m.nInternalFaces(); ++f) {
        CHECK(back.faces()[f].owner == m.faces()[f].owner);
        CHECK(back.faces()[f].neighbour == m.faces()[f].neighbour);
        CHECK(back.faces()[f].areaVector.x == doctest::Approx(m.faces()[f].areaVector.x));
    }
    REQUIRE(back.patches().size() == m.patches().size());
    CHECK(back.patches()[0].name == m.patches()[0].name);
    CHECK(back.patches()[0].kind == m.patches()[0].kind);
}

TEST_CASE("loader reports the offending line") {
    const std::string path = "broken.blockmesh";
    {
        std::ofstream f(path);
        f << "blockmesh v1\n";
        f << "cells 1\n";
        f << "1.0 0.5 oops 0.0\n";
    }
    CHECK_THROWS_WITH_AS(loadMesh(path), doctest::Contains("line 3"), std::runtime_error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(loadMesh("does-not-exist.blockmesh"), std::runtime_error);
}
