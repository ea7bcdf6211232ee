#include "blockfv/incompressible.hpp"

#include "blockfv/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fvb {

namespace {

constexpr int kP = 3;  // pressure index inside the [ux, uy, uz, p] block

Vec3 cellU(const BlockVector& s, int i) {
    const double* v = s.cell(i);
    return {v[0], v[1], v[2]};
}

struct FaceGeom {
    double S = 0.0;   // face area
    Vec3 n;           // unit normal owner -> neighbour
    double nd = 0.0;  // n . d, centroid distance along the normal
};

FaceGeom faceGeom(const Mesh& mesh, int f) {
    const InternalFace& face = mesh.faces()[f];
    FaceGeom g;
    g.S = mag(face.areaVector);
    g.n = face.areaVector / g.S;
    g.nd = dot(g.n, mesh.centroidDelta(f));
    if (std::fabs(g.nd) < 1e-14)
        throw std::runtime_error("degenerate geometry at face " + std::to_string(f));
    return g;
}

// distance from the cell centroid to a boundary face of the orthogonal
// cells in scope
double wallDistance(const Mesh& mesh, const BoundaryFace& bf) {
    return mesh.cellVolumes()[bf.cell] / (2.0 * mag(bf.areaVector));
}

const IncompressibleBc& bcFor(const BcMap& bcs, const std::string& patch) {
    const auto it = bcs.find(patch);
    if (it == bcs.end())
        throw std::invalid_argument("no boundary condition for patch '" + patch + "'");
    return it->second;
}

} // namespace

IncompressibleBc::Kind bcKindFromString(const std::string& s) {
    if (s == "wall") return IncompressibleBc::Kind::wall;
    if (s == "movingWall") return IncompressibleBc::Kind::movingWall;
    if (s == "inlet") return IncompressibleBc::Kind::inlet;
    if (s == "outlet") return IncompressibleBc::Kind::outlet;
    throw std::invalid_argument("unknown boundary kind: " + s);
}

std::vector<double> momentumDiagCoeff(const BlockVector& state, const FaceFluxField& phi,
                                      const Mesh& mesh, double nu, const BcMap& bcs) {
    std::vector<double> a(mesh.nCells(), 0.0);
    for (int f = 0; f < mesh.nInternalFaces(); ++f) {
        const FaceGeom g = faceGeom(mesh, f);
        const double gDiff = nu * g.S / g.nd;
        const InternalFace& face = mesh.faces()[f];
        a[face.owner] += std::max(phi[f], 0.0) + gDiff;
        a[face.neighbour] += -std::min(phi[f], 0.0) + gDiff;
    }
    for (const BoundaryPatch& patch : mesh.patches()) {
        const IncompressibleBc& bc = bcFor(bcs, patch.name);
        for (const BoundaryFace& bf : patch.faces) {
            const double S = mag(bf.areaVector);
            switch (bc.kind) {
                case IncompressibleBc::Kind::wall:
                case IncompressibleBc::Kind::movingWall:
                    a[bf.cell] += nu * S / wallDistance(mesh, bf);
                    break;
                case IncompressibleBc::Kind::inlet:
                    a[bf.cell] += nu * S / wallDistance(mesh, bf) +
                                  std::max(dot(bf.areaVector, bc.u), 0.0);
                    break;
                case IncompressibleBc::Kind::outlet:
                    a[bf.cell] += std::max(dot(bf.areaVector, cellU(state, bf.cell)), 0.0);
                    break;
            }
        }
    }
    return a;
}

std::vector<Vec3> pressureGradients(const BlockVector& state, const Mesh& mesh) {
    const int nc = mesh.nCells();
    std::vector<std::array<double, 9>> G(nc, {0, 0, 0, 0, 0, 0, 0, 0, 0});
    std::vector<Vec3> rhs(nc);

    auto accumulate = [&](int i, int j) {
        const Vec3 d = mesh.cellCentroids()[j] - mesh.cellCentroids()[i];
        const double w = 1.0 / magSqr(d);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) G[i][r * 3 + c] += w * d[r] * d[c];
        rhs[i] += d * (w * (state.cell(j)[kP] - state.cell(i)[kP]));
    };
    for (const InternalFace& f : mesh.faces()) {
        accumulate(f.owner, f.neighbour);
        accumulate(f.neighbour, f.owner);
    }

    std::vector<Vec3> grad(nc);
    for (int i = 0; i < nc; ++i) {
        double scale = 0.0;
        for (int r = 0; r < 3; ++r) scale = std::max(scale, G[i][r * 3 + r]);
        for (int r = 0; r < 3; ++r)
            if (G[i][r * 3 + r] <= 1e-12 * scale) {
                for (int c = 0; c < 3; ++c) { G[i][r * 3 + c] = 0.0; G[i][c * 3 + r] = 0.0; }
                G[i][r * 3 + r] = 1.0;
                rhs[i][r] = 0.0;
            }
        const smallmat::LuBlock lu = smallmat::luFactor(G[i].data(), 3);
        double v[3] = {rhs[i].x, rhs[i].y, rhs[i].z};
        smallmat::luSolve(lu, v);
        grad[i] = {v[0], v[1], v[2]};
    }
    return grad;
}

FaceFluxField rhieChowFlux(const BlockVector& state, const Mesh& mesh, const std::vector<double>& D) {
    const std::vector<Vec3> gradP = pressureGradients(state, mesh);
    FaceFluxField phi(mesh.nInternalFaces());
    for (int f = 0; f < mesh.nInternalFaces(); ++f) {
        const InternalFace& face = mesh.faces()[f];
        const FaceGeom g = faceGeom(mesh, f);
        const double fx = face.fx;
        const Vec3 uBar = cellU(state, face.owner) * fx + cellU(state, face.neighbour) * (1.0 - fx);
        const double dBar = fx * D[face.owner] + (1.0 - fx) * D[face.neighbour];
        const double dpCompact = (state.cell(face.neighbour)[kP] - state.cell(face.owner)[kP]) / g.nd;
        const Vec3 gpBar = gradP[face.owner] * fx + gradP[face.neighbour] * (1.0 - fx);
        phi[f] = dot(face.areaVector, uBar) - dBar * (g.S * dpCompact - dot(face.areaVector, gpBar));
    }
    return phi;
}

std::pair<BlockLduMatrix, BlockVector> assembleCoupled(const BlockVector& state,
                                                       const FaceFluxField& phi, const Mesh& mesh,
                                                       double nu, const BcMap& bcs) {
    const std::vector<double> aP = momentumDiagCoeff(state, phi, mesh, nu, bcs);
    std::vector<double> D(mesh.nCells());
    for (int i = 0; i < mesh.nCells(); ++i) D[i] = mesh.cellVolumes()[i] / aP[i];
    const std::vector<Vec3> gradP = pressureGradients(state, mesh);

    BlockLduMatrix A(mesh, {{"U", 3}, {"p", 1}});
    BlockVector rhs(mesh.nCells(), 4);

    for (int f = 0; f < mesh.nInternalFaces(); ++f) {
        const InternalFace& face = mesh.faces()[f];
        const int P = face.owner, N = face.neighbour;
        const FaceGeom g = faceGeom(mesh, f);
        const double fx = face.fx;
        const double gDiff = nu * g.S / g.nd;
        const Vec3& Sf = face.areaVector;

        const double dBar = fx * D[P] + (1.0 - fx) * D[N];
        const double c = dBar * g.S / g.nd;

        double* dP = A.diag(P);
        double* dN = A.diag(N);
        double* up = A.upper(f);  // owner row, neighbour column
        double* lo = A.lower(f);  // neighbour row, owner column

        for (int r = 0; r < 3; ++r) {
            // momentum: upwind convection + orthogonal diffusion
            dP[r * 4 + r] += std::max(phi[f], 0.0) + gDiff;
            up[r * 4 + r] += std::min(phi[f], 0.0) - gDiff;
            dN[r * 4 + r] += -std::min(phi[f], 0.0) + gDiff;
            lo[r * 4 + r] += -std::max(phi[f], 0.0) - gDiff;

            // pressure gradient, p interpolated with fx
            dP[r * 4 + kP] += fx * Sf[r];
            up[r * 4 + kP] += (1.0 - fx) * Sf[r];
            dN[r * 4 + kP] -= (1.0 - fx) * Sf[r];
            lo[r * 4 + kP] -= fx * Sf[r];

            // negated continuity: velocity part of the face flux
            dP[kP * 4 + r] -= fx * Sf[r];
            up[kP * 4 + r] -= (1.0 - fx) * Sf[r];
            dN[kP * 4 + r] += (1.0 - fx) * Sf[r];
            lo[kP * 4 + r] += fx * Sf[r];
        }

        // negated continuity: compact pressure Laplacian (negative diag)
        dP[kP * 4 + kP] -= c;
        up[kP * 4 + kP] += c;
        dN[kP * 4 + kP] -= c;
        lo[kP * 4 + kP] += c;

        // Rhie-Chow: interpolated-gradient part stays explicit
        const Vec3 gpBar = gradP[P] * fx + gradP[N] * (1.0 - fx);
        const double e = dBar * dot(Sf, gpBar);
        rhs.cell(P)[kP] += e;
        rhs.cell(N)[kP] -= e;
    }

    for (const BoundaryPatch& patch : mesh.patches()) {
        const IncompressibleBc& bc = bcFor(bcs, patch.name);
        for (const BoundaryFace& bf : patch.faces) {
            const int P = bf.cell;
            const Vec3& Sf = bf.areaVector;
            const double S = mag(Sf);
            const double db = wallDistance(mesh, bf);
            double* dP = A.diag(P);

            switch (bc.kind) {
                case IncompressibleBc::Kind::wall:
                case IncompressibleBc::Kind::movingWall: {
                    const double gb = nu * S / db;
                    for (int r = 0; r < 3; ++r) {
                        dP[r * 4 + r] += gb;
                        rhs.cell(P)[r] += gb * bc.u[r];
                        dP[r * 4 + kP] += Sf[r];  // zero-gradient p
                    }
                    break;  // no flux through the face
                }
                case IncompressibleBc::Kind::inlet: {
                    const double gb = nu * S / db;
                    const double phiB = dot(Sf, bc.u);
                    for (int r = 0; r < 3; ++r) {
                        dP[r * 4 + r] += gb + std::max(phiB, 0.0);
                        rhs.cell(P)[r] += gb * bc.u[r] - std::min(phiB, 0.0) * bc.u[r];
                        dP[r * 4 + kP] += Sf[r];
                    }
                    rhs.cell(P)[kP] += phiB;  // known flux, negated row
                    break;
                }
                case IncompressibleBc::Kind::outlet: {
                    const double phiB = dot(Sf, cellU(state, P));
                    const double cb = D[P] * S / db;
                    for (int r = 0; r < 3; ++r) {
                        dP[r * 4 + r] += std::max(phiB, 0.0);  // zero-gradient u, outflow
                        rhs.cell(P)[r] -= Sf[r] * bc.p;        // fixed boundary pressure
                        dP[kP * 4 + r] -= Sf[r];
                    }
                    dP[kP * 4 + kP] -= cb;
                    rhs.cell(P)[kP] -= cb * bc.p;
                    break;
                }
            }
        }
    }
    return {std::move(A), std::move(rhs)};
}

void pinPressure(BlockLduMatrix& A, BlockVector& rhs, int cell, double value) {
    double* d = A.diag(cell);
    for (int c = 0; c < 4; ++c) d[kP * 4 + c] = 0.0;
    d[kP * 4 + kP] = 1.0;
    const auto& faces = A.mesh().faces();
    for (int f = 0; f < A.nFaces(); ++f) {
        if (faces[f].owner == cell)
            for (int c = 0; c < 4; ++c) A.upper(f)[kP * 4 + c] = 0.0;
        if (faces[f].neighbour == cell)
            for (int c = 0; c < 4; ++c) A.lower(f)[kP * 4 + c] = 0.0;
    }
    rhs.cell(cell)[kP] = value;
}

bool fixesPressureLevel(const BcMap& bcs) {
    for (const auto& [name, bc] : bcs)
        if (bc.kind == IncompressibleBc::Kind::outlet) return true;
    return false;
}

std::vector<double> divergenceCheck(const FaceFluxField& phi, const BlockVector& state,
                                    const Mesh& mesh, const BcMap& bcs) {
    std::vector<double> defect(mesh.nCells(), 0.0);
    for (int f = 0; f < mesh.nInternalFaces(); ++f) {
        defect[mesh.faces()[f].owner] += phi[f];
        defect[mesh.faces()[f].neighbour] -= phi[f];
    }
    for (const BoundaryPatch& patch : mesh.patches()) {
        const IncompressibleBc& bc = bcFor(bcs, patch.name);
        for (const BoundaryFace& bf : patch.faces) {
            if (bc.kind == IncompressibleBc::Kind::inlet)
                defect[bf.cell] += dot(bf.areaVector, bc.u);
            else if (bc.kind == IncompressibleBc::Kind::outlet)
                defect[bf.cell] += dot(bf.areaVector, cellU(state, bf.cell));
        }
    }
    return defect;
}

Vec3 patchForce(const BlockVector& state, const Mesh& mesh, double nu, const BcMap& bcs,
                const std::string& patchName) {
    const BoundaryPatch* patch = mesh.findPatch(patchName);
    if (!patch) throw std::invalid_argument("no patch named '" + patchName + "'");
    const IncompressibleBc& bc = bcFor(bcs, patchName);

    Vec3 F;
    for (const BoundaryFace& bf : patch->faces) {
        const double S = mag(bf.areaVector);
        F += bf.areaVector * state.cell(bf.cell)[kP];
        F -= (bc.u - cellU(state, bf.cell)) * (nu * S / wallDistance(mesh, bf));
    }
    return F;
}

namespace {

std::array<double, 4> initialResidualNorms(const BlockLduMatrix& A, const BlockVector& rhs,
                                           const BlockVector& x) {
    BlockVector Ax(x.nCells(), 4);
    blockMatvec(A, x.values.data(), Ax.values.data());
    std::array<double, 4> norms{};
    for (int i = 0; i < x.nCells(); ++i)
        for (int k = 0; k < 4; ++k) {
            const double r = rhs.cell(i)[k] - Ax.cell(i)[k];
            norms[k] += r * r;
        }
    for (double& v : norms) v = std::sqrt(v);
    return norms;
}

} // namespace

IterateResult coupledIterate(BlockVector& state, FaceFluxField& phi, const Mesh& mesh, double nu,
                             const BcMap& bcs, const CoupledSolveFn& solve) {
    auto [A, rhs] = assembleCoupled(state, phi, mesh, nu, bcs);
    if (!fixesPressureLevel(bcs)) pinPressure(A, rhs, 0, 0.0);

    IterateResult res;
    res.residuals = initialResidualNorms(A, rhs, state);

    auto [x, rep] = solve(A, rhs, state);
    res.linear = rep;
    state = std::move(x);

    const std::vector<double> aP = momentumDiagCoeff(state, phi, mesh, nu, bcs);
    std::vector<double> D(mesh.nCells());
    for (int i = 0; i < mesh.nCells(); ++i) D[i] = mesh.cellVolumes()[i] / aP[i];
    phi = rhieChowFlux(state, mesh, D);
    return res;
}

IterateResult simpleIterate(BlockVector& state, FaceFluxField& phi, const Mesh& mesh, double nu,
                            const BcMap& bcs, double relaxU, double relaxP,
                            const SolverConfig& cfg) {
    if (relaxU <= 0.0 || relaxU > 1.0 || relaxP <= 0.0 || relaxP > 1.0)
        throw std::invalid_argument("relaxation factors must lie in (0, 1]");

    const int nc = mesh.nCells();
    IterateResult res;

    // continuity defect of the incoming state
    {
        const std::vector<double> defect = divergenceCheck(phi, state, mesh, bcs);
        double s = 0.0;
        for (double d : defect) s += d * d;
        res.residuals[kP] = std::sqrt(s);
    }

    // --- momentum predictor: one scalar matrix shared by the components
    BlockLduMatrix Au(mesh, {{"u", 1}});
    std::array<BlockVector, 3> bu = {BlockVector(nc, 1), BlockVector(nc, 1), BlockVector(nc, 1)};

    for (int f = 0; f < mesh.nInternalFaces(); ++f) {
        const InternalFace& face = mesh.faces()[f];
        const int P = face.owner, N = face.neighbour;
        const FaceGeom g = faceGeom(mesh, f);
        const double gDiff = nu * g.S / g.nd;
        *Au.diag(P) += std::max(phi[f], 0.0) + gDiff;
        *Au.upper(f) += std::min(phi[f], 0.0) - gDiff;
        *Au.diag(N) += -std::min(phi[f], 0.0) + gDiff;
        *Au.lower(f) += -std::max(phi[f], 0.0) - gDiff;

        const double pf = face.fx * state.cell(P)[kP] + (1.0 - face.fx) * state.cell(N)[kP];
        for (int r = 0; r < 3; ++r) {
            bu[r].cell(P)[0] -= face.areaVector[r] * pf;
            bu[r].cell(N)[0] += face.areaVector[r] * pf;
        }
    }
    for (const BoundaryPatch& patch : mesh.patches()) {
        const IncompressibleBc& bc = bcFor(bcs, patch.name);
        for (const BoundaryFace& bf : patch.faces) {
            const int P = bf.cell;
            const double S = mag(bf.areaVector);
            const double db = wallDistance(mesh, bf);
            switch (bc.kind) {
                case IncompressibleBc::Kind::wall:
                case IncompressibleBc::Kind::movingWall: {
                    const double gb = nu * S / db;
                    *Au.diag(P) += gb;
                    for (int r = 0; r < 3; ++r)
                        bu[r].cell(P)[0] += gb * bc.u[r] - bf.areaVector[r] * state.cell(P)[kP];
                    break;
                }
                case IncompressibleBc::Kind::inlet: {
                    const double gb = nu * S / db;
                    const double phiB = dot(bf.areaVector, bc.u);
                    *Au.diag(P) += gb + std::max(phiB, 0.0);
                    for (int r = 0; r < 3; ++r)
                        bu[r].cell(P)[0] += (gb - std::min(phiB, 0.0)) * bc.u[r] -
                                            bf.areaVector[r] * state.cell(P)[kP];
                    break;
                }
                case IncompressibleBc::Kind::outlet: {
                    *Au.diag(P) += std::max(dot(bf.areaVector, cellU(state, P)), 0.0);
                    for (int r = 0; r < 3; ++r) bu[r].cell(P)[0] -= bf.areaVector[r] * bc.p;
                    break;
                }
            }
        }
    }

    // implicit under-relaxation
    std::vector<double> aP(nc);
    for (int i = 0; i < nc; ++i) {
        const double orig = *Au.diag(i);
        *Au.diag(i) = orig / relaxU;
        // momentum interpolation uses the unrelaxed coefficient so the
        // converged solution does not depend on the relaxation factor
        aP[i] = orig;
        for (int r = 0; r < 3; ++r) bu[r].cell(i)[0] += orig * (1.0 / relaxU - 1.0) * state.cell(i)[r];
    }

    for (int r = 0; r < 3; ++r) {
        BlockVector x0(nc, 1);
        for (int i = 0; i < nc; ++i) x0.cell(i)[0] = state.cell(i)[r];
        {
            BlockVector Ax(nc, 1);
            blockMatvec(Au, x0.values.data(), Ax.values.data());
            double s = 0.0;
            for (int i = 0; i < nc; ++i) {
                const double d = bu[r].cell(i)[0] - Ax.cell(i)[0];
                s += d * d;
            }
            res.residuals[r] = std::sqrt(s);
        }
        auto [x, rep] = backendSolve(Au, bu[r], x0, Backend::EngineCsr, cfg);
        for (int i = 0; i < nc; ++i) state.cell(i)[r] = x.cell(i)[0];
    }

    std::vector<double> D(nc);
    for (int i = 0; i < nc; ++i) D[i] = mesh.cellVolumes()[i] / aP[i];
    FaceFluxField phiStar = rhieChowFlux(state, mesh, D);

    // --- pressure correction
    BlockLduMatrix Ap(mesh, {{"p", 1}});
    BlockVector bp(nc, 1);
    const std::vector<double> defect = divergenceCheck(phiStar, state, mesh, bcs);
    for (int i = 0; i < nc; ++i) bp.cell(i)[0] = -defect[i];

    std::vector<double> faceC(mesh.nInternalFaces());
    for (int f = 0; f < mesh.nInternalFaces(); ++f) {
        const InternalFace& face = mesh.faces()[f];
        const FaceGeom g = faceGeom(mesh, f);
        const double dBar = face.fx * D[face.owner] + (1.0 - face.fx) * D[face.neighbour];
        const double c = dBar * g.S / g.nd;
        faceC[f] = c;
        *Ap.diag(face.owner) += c;
        *Ap.upper(f) -= c;
        *Ap.diag(face.neighbour) += c;
        *Ap.lower(f) -= c;
    }
    for (const BoundaryPatch& patch : mesh.patches()) {
        const IncompressibleBc& bc = bcFor(bcs, patch.name);
        if (bc.kind != IncompressibleBc::Kind::outlet) continue;
        for (const BoundaryFace& bf : patch.faces)
            *Ap.diag(bf.cell) += D[bf.cell] * mag(bf.areaVector) / wallDistance(mesh, bf);
    }
    if (!fixesPressureLevel(bcs)) {
        // fix the correction level at cell 0
        for (int f = 0; f < mesh.nInternalFaces(); ++f) {
            if (mesh.faces()[f].owner == 0) *Ap.upper(f) = 0.0;
            if (mesh.faces()[f].neighbour == 0) *Ap.lower(f) = 0.0;
        }
        *Ap.diag(0) = 1.0;
        bp.cell(0)[0] = 0.0;
    }

    auto [pc, rep] = backendSolve(Ap, bp, BlockVector(nc, 1), Backend::EngineCsr, cfg);
    res.linear = rep;

    // --- corrections
    for (int f = 0; f < mesh.nInternalFaces(); ++f) {
        const InternalFace& face = mesh.faces()[f];
        phiStar[f] += faceC[f] * (pc.cell(face.owner)[0] - pc.cell(face.neighbour)[0]);
    }
    phi = std::move(phiStar);

    // Green-Gauss gradient of the correction for the velocity update
    std::vector<Vec3> gpc(nc);
    for (int f = 0; f < mesh.nInternalFaces(); ++f) {
        const InternalFace& face = mesh.faces()[f];
        const double pf = face.fx * pc.cell(face.owner)[0] + (1.0 - face.fx) * pc.cell(face.neighbour)[0];
        gpc[face.owner] += face.areaVector * pf;
        gpc[face.neighbour] -= face.areaVector * pf;
    }
    for (const BoundaryPatch& patch : mesh.patches()) {
        const IncompressibleBc& bc = bcFor(bcs, patch.name);
        for (const BoundaryFace& bf : patch.faces) {
            const double pf = bc.kind == IncompressibleBc::Kind::outlet ? 0.0 : pc.cell(bf.cell)[0];
            gpc[bf.cell] += bf.areaVector * pf;
        }
    }
    for (int i = 0; i < nc; ++i) {
        gpc[i] *= 1.0 / mesh.cellVolumes()[i];
        for (int r = 0; r < 3; ++r) state.cell(i)[r] -= D[i] * gpc[i][r];
        state.cell(i)[kP] += relaxP * pc.cell(i)[0];
    }
    return res;
}

} // namespace fvb
