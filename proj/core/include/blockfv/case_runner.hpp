#pragma once

// Case orchestration: JSON case configs, the nonlinear run loop over the
// configured solver / backend / partitioning, CSV + JSON reporting,
// timing decompositions and run-to-run comparisons.

#include "blockfv/engine.hpp"
#include "blockfv/euler.hpp"
#include "blockfv/incompressible.hpp"
#include "blockfv/krylov.hpp"
#include "blockfv/mesh.hpp"

#include <map>
#include <string>
#include <vector>

namespace fvb {

struct MeshSpec {
    enum class Kind { structured2d, tube1d, file };
    Kind kind = Kind::structured2d;
    int nx = 32, ny = 32;
    double lx = 1.0, ly = 1.0;
    int n = 100;          // tube cells
    double length = 1.0;  // tube length
    std::string path;     // file source

    Mesh build() const;
};

enum class SolverChoice { density, pressureCoupled, pressureSimple };

struct DensityPhysics {
    EulerCase ec;
    PseudoTimeControl ptc;
    enum class Init { freestream, sod } init = Init::freestream;
    PrimState sodLeft{1.0, 0.0, 0.0, 0.0, 1.0};
    PrimState sodRight{0.125, 0.0, 0.0, 0.0, 0.1};
    double diaphragm = 0.5;
};

struct PressurePhysics {
    double nu = 0.01;
    BcMap bcs;
    double relaxU = 0.7, relaxP = 0.3;
};

struct PartitionConfig {
    int ranks = 1;
    int engines = 1;
};

struct RunControl {
    int maxIters = 100;
    double convergenceTol = 1e-8;
    int reportEvery = 10;
};

struct CaseConfig {
    std::string name = "case";
    MeshSpec mesh;
    SolverChoice solver = SolverChoice::pressureCoupled;
    DensityPhysics density;
    PressurePhysics pressure;
    SolverConfig linear;
    PartitionConfig partitioning;
    RunControl run;
    Backend backend = Backend::EngineCsr;
    bool deterministic = true;
    unsigned seed = 0;
    std::string outputDir;

    void validate() const;
    static CaseConfig fromJson(const std::string& text);
    static CaseConfig loadFile(const std::string& path);
    std::string toJson() const;  // all defaults materialized
};

struct IterationRecord {
    int iter = 0;
    std::vector<double> residuals;             // matches RunReport::residualNames
    std::map<std::string, double> timings;     // seconds per kernel
};

struct RunReport {
    CaseConfig config;
    std::vector<std::string> residualNames;
    std::vector<IterationRecord> history;
    std::map<std::string, double> coefficients;  // final integral/force quantities
    bool converged = false;
    int iterations = 0;
    double wallTime = 0.0;
    std::string partitionJson;  // empty for serial runs

    std::string toJson() const;
    static RunReport fromJson(const std::string& text);
};

RunReport runCase(const CaseConfig& cfg);

// residuals.csv, timings.csv, report.json, partition.json, case.json
void writeReports(const RunReport& report, const std::string& dir);
RunReport loadReportDir(const std::string& dir);

struct ComparisonSummary {
    int overlapIters = 0;
    double maxResidualDelta = 0.0;   // absolute, over overlapping iterations
    double meanResidualDelta = 0.0;
    double maxResidualRelDelta = 0.0;
    std::map<std::string, double> coefficientDeltas;  // relative
    double timeToThresholdA = -1.0;  // seconds to reach the residual threshold, -1 = never
    double timeToThresholdB = -1.0;
    double threshold = 1e-5;

    std::string toJson() const;
};

ComparisonSummary compareRuns(const RunReport& a, const RunReport& b, double threshold = 1e-5);

struct TimingDecomposition {
    std::map<std::string, double> kernelFractions;  // of total iteration time, plus "other"
    std::map<std::string, double> linearFractions;  // convert/setupOrReplace/solve/retrieve
    bool empty = false;

    std::string toText() const;
    std::string toJson() const;
};

TimingDecomposition emitTimingBreakdown(const RunReport& report);

} // namespace fvb
