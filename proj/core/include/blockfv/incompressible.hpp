#pragma once

// Steady incompressible solvers on collocated grids: a block-coupled
// p-U system (4x4 blocks) with Rhie-Chow face fluxes, and a segregated
// SIMPLE reference built from the same discretization pieces.

#include "blockfv/block_matrix.hpp"
#include "blockfv/engine.hpp"
#include "blockfv/krylov.hpp"
#include "blockfv/mesh.hpp"

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace fvb {

// Cell state is a BlockVector with blockSize 4: [ux, uy, uz, p], p the
// kinematic pressure. Face fluxes are volumetric, signed owner->neighbour.
using FaceFluxField = std::vector<double>;

struct IncompressibleBc {
    enum class Kind { wall, movingWall, inlet, outlet };
    Kind kind = Kind::wall;
    Vec3 u;         // fixed velocity for movingWall / inlet
    double p = 0.0; // fixed pressure for outlet
};

using BcMap = std::map<std::string, IncompressibleBc>;

IncompressibleBc::Kind bcKindFromString(const std::string& s);

// Scalar momentum diagonal a_ii^uu per cell (identical for the three
// components); the diagonal operator is D = V / a.
std::vector<double> momentumDiagCoeff(const BlockVector& state, const FaceFluxField& phi,
                                      const Mesh& mesh, double nu, const BcMap& bcs);

// Least-squares pressure gradients from the state.
std::vector<Vec3> pressureGradients(const BlockVector& state, const Mesh& mesh);

// phi_f = S . [u_bar - D_bar (grad_p_compact - grad_p_bar)] per internal
// face; D is the per-cell V/a scalar.
FaceFluxField rhieChowFlux(const BlockVector& state, const Mesh& mesh, const std::vector<double>& D);

// Assembles the coupled system. The pressure row is the negated
// continuity equation, which gives the negative-diagonal pressure
// sub-block convention (a_ii^pp = -a_ij^pp) and zero interior row sums.
std::pair<BlockLduMatrix, BlockVector> assembleCoupled(const BlockVector& state,
                                                       const FaceFluxField& phi, const Mesh& mesh,
                                                       double nu, const BcMap& bcs);

// Replaces the pressure row of the given cell with p = value; needed
// when no patch fixes the pressure level.
void pinPressure(BlockLduMatrix& A, BlockVector& rhs, int cell, double value);

bool fixesPressureLevel(const BcMap& bcs);

// Signed flux balance per cell, including boundary fluxes.
std::vector<double> divergenceCheck(const FaceFluxField& phi, const BlockVector& state,
                                    const Mesh& mesh, const BcMap& bcs);

// Pressure and viscous force on a named patch.
Vec3 patchForce(const BlockVector& state, const Mesh& mesh, double nu, const BcMap& bcs,
                const std::string& patchName);

using CoupledSolveFn = std::function<std::pair<BlockVector, SolveReport>(
    const BlockLduMatrix&, const BlockVector&, const BlockVector&)>;

struct IterateResult {
    std::array<double, 4> residuals{};  // initial linear residual: ux, uy, uz, continuity
    SolveReport linear;                 // coupled solve / pressure solve of this iteration
};

// One coupled iteration: assemble from the previous fluxes, solve the
// 4x4 block system without under-relaxation, update state and fluxes.
IterateResult coupledIterate(BlockVector& state, FaceFluxField& phi, const Mesh& mesh, double nu,
                             const BcMap& bcs, const CoupledSolveFn& solve);

// One SIMPLE iteration: under-relaxed momentum predictor, pressure
// correction, explicit velocity/flux correction.
IterateResult simpleIterate(BlockVector& state, FaceFluxField& phi, const Mesh& mesh, double nu,
                            const BcMap& bcs, double relaxU, double relaxP,
                            const SolverConfig& cfg);

} // namespace fvb
