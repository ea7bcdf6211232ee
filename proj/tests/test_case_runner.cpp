#include "blockfv/case_runner.hpp"

#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fvb;

namespace {

std::string cavityJson(int n, int iters, const char* name) {
    std::ostringstream os;
    os << R"({
  "name": ")" << name << R"(",
  "mesh": {"generator": "structured2d", "nx": )" << n << R"(, "ny": )" << n << R"(},
  "solver": "pressureCoupled",
  "physics": {
    "nu": 0.01,
    "boundaries": {
      "left": {"kind": "wall"},
      "right": {"kind": "wall"},
      "bottom": {"kind": "wall"},
      "top": {"kind": "movingWall", "u": [1.0, 0.0, 0.0]}
    }
  },
  "linear": {"method": "gmres", "preconditioner": "dilu", "relTol": 1e-10, "maxIters": 2000},
  "run": {"maxIters": )" << iters << R"(, "convergenceTol": 1e-12}
})";
    return os.str();
}

std::string readFile(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const char* name) : path(name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("case config JSON round trip") {
    CaseConfig c = CaseConfig::fromJson(cavityJson(8, 5, "roundtrip"));
    CHECK(c.name == "roundtrip");
    CHECK(c.mesh.nx == 8);
    CHECK(c.solver == SolverChoice::pressureCoupled);
    CHECK(c.pressure.bcs.at("top").kind == IncompressibleBc::Kind::movingWall);
    CHECK(c.pressure.bcs.at("top").u.x == doctest::Approx(1.0));
    CHECK(c.linear.preconditioner == PrecondKind::DILU);
    CHECK(c.linear.relTol == doctest::Approx(1e-10));
    CHECK(c.run.maxIters == 5);

    const CaseConfig back = CaseConfig::fromJson(c.toJson());
    CHECK(back.toJson() == c.toJson());

    CaseConfig d = CaseConfig::fromJson(R"({
        "name": "tube",
        "mesh": {"generator": "tube1d", "n": 50, "length": 2.0},
        "solver": "density",
        "physics": {"flux": "hllc", "init": "sod", "cfl": {"start": 2.0, "end": 20.0}},
        "partitioning": {"ranks": 2, "engines": 2},
        "backend": "host"
    })");
    CHECK(d.solver == SolverChoice::density);
    CHECK(d.mesh.kind == MeshSpec::Kind::tube1d);
    CHECK(d.density.ec.flux == FluxScheme::HLLC);
    CHECK(d.density.init == DensityPhysics::Init::sod);
    CHECK(d.density.ptc.startCfl == doctest::Approx(2.0));
    CHECK(d.partitioning.ranks == 2);
    CHECK(d.backend == Backend::HostLdu);
    CHECK(CaseConfig::fromJson(d.toJson()).toJson() == d.toJson());
}

TEST_CASE("config validation rejects bad partitioning") {
    CaseConfig c = CaseConfig::fromJson(cavityJson(8, 5, "bad"));
    c.partitioning.ranks = 2;
    c.partitioning.engines = 4;  // more engines than ranks
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.partitioning.engines = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.partitioning = {};
    c.run.maxIters = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("runCase writes a loadable report directory") {
    const CaseConfig c = CaseConfig::fromJson(cavityJson(6, 6, "smoke"));
    const RunReport rep = runCase(c);
    CHECK(rep.iterations == 6);
    REQUIRE(rep.history.size() == 6);
    CHECK(rep.residualNames == std::vector<std::string>{"Ux", "Uy", "Uz", "p"});
    CHECK(rep.wallTime > 0.0);
    CHECK(rep.coefficients.count("maxContinuityDefect") == 1);
    CHECK(rep.coefficients.count("force_top_x") == 1);

    TempDir dir("tcr_smoke");
    writeReports(rep, dir.path.string());
    for (const char* f : {"residuals.csv", "timings.csv", "report.json", "case.json"})
        CHECK(std::filesystem::exists(dir.path / f));

    const RunReport back = loadReportDir(dir.path.string());
    CHECK(back.residualNames == rep.residualNames);
    REQUIRE(back.history.size() == rep.history.size());
    for (std::size_t i = 0; i < rep.history.size(); ++i)
        for (std::size_t k = 0; k < rep.residualNames.size(); ++k)
            CHECK(back.history[i].residuals[k] == rep.history[i].residuals[k]);
    CHECK(back.coefficients.at("force_top_x") == rep.coefficients.at("force_top_x"));
}

TEST_CASE("deterministic runs are byte-identical") {
    const CaseConfig c = CaseConfig::fromJson(cavityJson(6, 5, "repro"));
    TempDir a("tcr_repro_a"), b("tcr_repro_b");
    writeReports(runCase(c), a.path.string());
    writeReports(runCase(c), b.path.string());
    CHECK(readFile(a.path / "residuals.csv") == readFile(b.path / "residuals.csv"));
    CHECK(readFile(a.path / "case.json") == readFile(b.path / "case.json"));
}

TEST_CASE("density tube case runs serial and partitioned") {
    CaseConfig c = CaseConfig::fromJson(R"({
        "name": "sod",
        "mesh": {"generator": "tube1d", "n": 40},
        "solver": "density",
        "physics": {"flux": "roe", "firstOrder": true, "init": "sod",
                    "cfl": {"start": 1.0, "end": 5.0, "rampIters": 20}},
        "linear": {"preconditioner": "lusgs", "relTol": 1e-10, "maxIters": 2000},
        "run": {"maxIters": 4, "convergenceTol": 1e-14}
    })");
    const RunReport serial = runCase(c);
    CHECK(serial.residualNames ==
          std::vector<std::string>{"rho", "rhoUx", "rhoUy", "rhoUz", "rhoE"});
    REQUIRE(serial.history.size() == 4);
    CHECK(serial.partitionJson.empty());
    CHECK(serial.coefficients.count("mass") == 1);

    c.partitioning.ranks = 2;
    c.partitioning.engines = 2;
    const RunReport dist = runCase(c);
    REQUIRE(dist.history.size() == 4);
    CHECK_FALSE(dist.partitionJson.empty());
    CHECK(dist.partitionJson.find("nExternalNZ") != std::string::npos);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t k = 0; k < 5; ++k)
            CHECK(dist.history[i].residuals[k] ==
                  doctest::Approx(serial.history[i].residuals[k]).epsilon(1e-8));
}

TEST_CASE("comparing a run with itself reports zero deltas") {
    const CaseConfig c = CaseConfig::fromJson(cavityJson(6, 5, "selfcmp"));
    const RunReport rep = runCase(c);
    const ComparisonSummary s = compareRuns(rep, rep, 1e-3);
    CHECK(s.overlapIters == 5);
    CHECK(s.maxResidualDelta == 0.0);
    CHECK(s.meanResidualDelta == 0.0);
    CHECK(s.maxResidualRelDelta == 0.0);
    CHECK(s.timeToThresholdA == s.timeToThresholdB);
    for (const auto& [name, d] : s.coefficientDeltas) CHECK(d == 0.0);
    CHECK(s.toJson().find("maxResidualDelta") != std::string::npos);
}

TEST_CASE("comparison rejects empty or mismatched histories") {
    const CaseConfig c = CaseConfig::fromJson(cavityJson(6, 3, "cmp"));
    const RunReport rep = runCase(c);
    RunReport empty = rep;
    empty.history.clear();
    CHECK_THROWS_AS(compareRuns(rep, empty), std::invalid_argument);

    RunReport other = rep;
    other.residualNames = {"a", "b", "c", "d"};
    CHECK_THROWS_AS(compareRuns(rep, other), std::invalid_argument);
}

TEST_CASE("timing breakdown fractions are normalized") {
    const CaseConfig c = CaseConfig::fromJson(cavityJson(6, 5, "timing"));
    const RunReport rep = runCase(c);
    const TimingDecomposition t = emitTimingBreakdown(rep);
    CHECK_FALSE(t.empty);

    double sum = 0.0;
    for (const auto& [name, frac] : t.kernelFractions) {
        CHECK(frac >= 0.0);
        sum += frac;
    }
    CHECK(sum <= 1.0 + 1e-9);
    CHECK(t.kernelFractions.count("linearAlgebra") == 1);
    CHECK(t.kernelFractions.count("other") == 1);
    for (const char* key : {"convert", "setupOrReplace", "solve", "retrieve"})
        CHECK(t.linearFractions.count(key) == 1);
    CHECK(t.toText().find("linearAlgebra") != std::string::npos);
    CHECK(t.toJson().find("solve") != std::string::npos);
}
