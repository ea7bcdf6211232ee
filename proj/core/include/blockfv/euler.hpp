#pragma once

// Implicit density-based coupled solver for the Euler equations: MUSCL
// reconstruction with Barth-Jespersen limiting, Roe/HLLC/Rusanov fluxes,
// approximate convective Jacobians with scalar spectral-radius
// dissipation, and pseudo-time marching with local time steps.

#include "blockfv/block_matrix.hpp"
#include "blockfv/krylov.hpp"
#include "blockfv/mesh.hpp"

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace fvb {

struct GasModel {
    double gamma = 1.4;
    double R = 287.0;  // J/(kg K)
};

// Primitive state [rho, ux, uy, uz, p]; conservative vectors used by the
// flux routines are ordered [rho, rho*u (3), rho*E].
using PrimState = std::array<double, 5>;

inline bool physical(const PrimState& q) { return q[0] > 0.0 && q[4] > 0.0; }

double soundSpeed(const PrimState& q, const GasModel& gas);
void primToCons(const PrimState& q, const GasModel& gas, double* Q);
PrimState consToPrim(const double* Q, const GasModel& gas);

// Analytic Euler flux F(Q)·n per unit area, n a unit normal.
void analyticFlux(const PrimState& q, const Vec3& n, const GasModel& gas, double* flux);

// Analytic convective flux Jacobian d(F·n)/dQ, 5x5 row-major in the
// conservative ordering above.
void eulerJacobian(const PrimState& q, const Vec3& n, const GasModel& gas, double* J);

// Roe-averaged state (rho, u, H, c) of a face.
struct RoeAverage {
    double rho = 0.0;
    Vec3 u;
    double H = 0.0;
    double c = 0.0;
};
RoeAverage roeAverage(const PrimState& L, const PrimState& R, const GasModel& gas);

enum class FluxScheme { Roe, HLLC, Rusanov };
FluxScheme fluxSchemeFromString(const std::string& s);

void roeFlux(const PrimState& L, const PrimState& R, const Vec3& n, const GasModel& gas, double* flux);
void hllcFlux(const PrimState& L, const PrimState& R, const Vec3& n, const GasModel& gas, double* flux);
void rusanovFlux(const PrimState& L, const PrimState& R, const Vec3& n, const GasModel& gas, double* flux);
void riemannFlux(FluxScheme scheme, const PrimState& L, const PrimState& R, const Vec3& n,
                 const GasModel& gas, double* flux);

enum class Limiter { none, BarthJespersen };

struct ReconstructionConfig {
    Limiter limiter = Limiter::BarthJespersen;
    bool firstOrder = false;
};

// Least-squares cell gradients of the five primitive components.
std::vector<std::array<Vec3, 5>> primitiveGradients(const std::vector<PrimState>& q, const Mesh& mesh);

struct FaceStates {
    std::vector<PrimState> left, right;  // per internal face, owner / neighbour side
    int fallbacks = 0;                   // faces reverted to first order (p or rho <= 0)
};

FaceStates musclReconstruct(const std::vector<PrimState>& q, const Mesh& mesh,
                            const ReconstructionConfig& cfg);

struct PseudoTimeControl {
    double startCfl = 1.0;
    double endCfl = 50.0;
    int rampIters = 200;
    bool localTimeStepping = true;

    double cfl(int iter) const;
};

struct EulerCase {
    GasModel gas;
    FluxScheme flux = FluxScheme::Roe;
    ReconstructionConfig recon;
    PrimState freestream{1.0, 0.0, 0.0, 0.0, 1.0};  // inlet / farfield state
    // overrides the mesh patch kinds by patch name (e.g. treat a
    // generator's inlet as an outlet)
    std::map<std::string, PatchKind> patchOverride;
};

// Ghost state seen across a boundary face of the given patch kind.
PrimState ghostState(const PrimState& inner, const Vec3& outwardN, PatchKind kind,
                     const EulerCase& ec);

// Steady residual R_i = -sum_f S_f * flux_f over all faces of cell i,
// conservative ordering, not divided by the volume.
BlockVector computeResidual(const std::vector<PrimState>& q, const Mesh& mesh, const EulerCase& ec);

// Assembles [V/dtau I - dR/dQ] with the first-order approximate Jacobian
// (analytic convective Jacobian plus |lambda| I dissipation, lambda at
// the Roe-averaged face state) and the residual as the RHS. cfl <= 0
// omits the pseudo-time diagonal. Block layout is the matrix's
// vector-first ordering [rhoU, rho, rhoE].
std::pair<BlockLduMatrix, BlockVector> assembleJacobian(const std::vector<PrimState>& q,
                                                        const Mesh& mesh, const EulerCase& ec,
                                                        double cfl);

// Pluggable linear solve so serial backends and the distributed path can
// both drive the nonlinear update.
using LinearSolveFn = std::function<std::pair<BlockVector, SolveReport>(
    const BlockLduMatrix&, const BlockVector&, const BlockVector&)>;

struct EulerStepResult {
    std::array<double, 5> residualNorms{};  // L2 of R per equation: rho, ux, uy, uz, E
    SolveReport linear;
    int halvings = 0;
};

// One pseudo-time step: assemble, solve, update with a positivity guard
// that halves the increment up to five times before aborting.
EulerStepResult implicitStep(std::vector<PrimState>& q, const Mesh& mesh, const EulerCase& ec,
                             double cfl, const LinearSolveFn& solve);

// Largest stable time step for explicit marching at the given Courant number.
double stableTimeStep(const std::vector<PrimState>& q, const Mesh& mesh, const EulerCase& ec,
                      double courant);

// Two-stage SSP Runge-Kutta time-accurate step.
void explicitStep(std::vector<PrimState>& q, const Mesh& mesh, const EulerCase& ec, double dt);

std::array<double, 5> residualNorms(const BlockVector& R);

} // namespace fvb
