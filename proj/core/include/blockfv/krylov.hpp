#pragma once

// Restarted GMRES and preconditioned BiCGStab over caller-supplied
// operator, preconditioner and dot-product callbacks, so the same code
// serves the serial LDU backend, the CSR engine and the distributed path.

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace fvb {

enum class KrylovMethod { GMRES, PBiCGStab };
enum class PrecondKind { none, LUSGS, DILU, AMG };

struct AmgConfig {
    int maxLevels = 10;
    int minCoarseRows = 8;
    int preSweeps = 1;
    int postSweeps = 1;
    // pairwise aggregation, size-2 aggregates
    int aggregationSize = 2;
};

struct SolverConfig {
    KrylovMethod method = KrylovMethod::GMRES;
    PrecondKind preconditioner = PrecondKind::LUSGS;
    double relTol = 1e-6;
    double absTol = 1e-300;
    int maxIters = 500;
    int gmresRestart = 30;
    AmgConfig amg;

    void validate() const;
};

struct SolveReport {
    int iterations = 0;
    double initialResidual = 0.0;  // true residual ||b - A x0||_2
    double finalResidual = 0.0;    // true residual at exit
    bool converged = false;
    bool breakdown = false;
    std::map<std::string, double> timings;  // seconds: convert, setup, replace, solve, retrieve

    // One CSV row: iter, initRes, finalRes, tConvert, tSetup, tSolve, tRetrieve
    std::string csvRow() const;
    static std::string csvHeader();
};

// Vector-space hooks. Vectors are flat double arrays of fixed length.
struct KrylovOps {
    std::size_t size = 0;
    std::function<void(const double*, double*)> applyA;     // y = A x
    std::function<void(const double*, double*)> applyM;     // z = M^{-1} r; null = identity
    std::function<double(const double*, const double*)> dot;  // null = std::inner_product
};

// Solves A x = b; x holds x0 on entry and the solution on exit.
// Convergence is on the true residual ||b - A x||_2.
SolveReport gmresSolve(const KrylovOps& ops, const double* b, double* x, const SolverConfig& cfg);
SolveReport bicgstabSolve(const KrylovOps& ops, const double* b, double* x, const SolverConfig& cfg);
SolveReport krylovSolve(const KrylovOps& ops, const double* b, double* x, const SolverConfig& cfg);

} // namespace fvb
