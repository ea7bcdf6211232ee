#include "blockfv/euler.hpp"

#include "blockfv/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fvb {

namespace {

// natural component i ([rho, m, E]) sits at block position kPerm[i] in
// the matrix's vector-first layout [rhoU, rho, rhoE]
constexpr int kPerm[5] = {3, 0, 1, 2, 4};

Vec3 velocity(const PrimState& q) { return {q[1], q[2], q[3]}; }

} // namespace

double soundSpeed(const PrimState& q, const GasModel& gas) {
    return std::sqrt(gas.gamma * q[4] / q[0]);
}

void primToCons(const PrimState& q, const GasModel& gas, double* Q) {
    const Vec3 u = velocity(q);
    Q[0] = q[0];
    Q[1] = q[0] * u.x;
    Q[2] = q[0] * u.y;
    Q[3] = q[0] * u.z;
    Q[4] = q[4] / (gas.gamma - 1.0) + 0.5 * q[0] * magSqr(u);
}

PrimState consToPrim(const double* Q, const GasModel& gas) {
    PrimState q;
    q[0] = Q[0];
    q[1] = Q[1] / Q[0];
    q[2] = Q[2] / Q[0];
    q[3] = Q[3] / Q[0];
    q[4] = (gas.gamma - 1.0) * (Q[4] - 0.5 * (Q[1] * Q[1] + Q[2] * Q[2] + Q[3] * Q[3]) / Q[0]);
    return q;
}

void analyticFlux(const PrimState& q, const Vec3& n, const GasModel& gas, double* flux) {
    const Vec3 u = velocity(q);
    const double un = dot(u, n);
    const double rhoE = q[4] / (gas.gamma - 1.0) + 0.5 * q[0] * magSqr(u);
    flux[0] = q[0] * un;
    flux[1] = q[0] * u.x * un + q[4] * n.x;
    flux[2] = q[0] * u.y * un + q[4] * n.y;
    flux[3] = q[0] * u.z * un + q[4] * n.z;
    flux[4] = (rhoE + q[4]) * un;
}

void eulerJacobian(const PrimState& q, const Vec3& n, const GasModel& gas, double* J) {
    const Vec3 u = velocity(q);
    const double un = dot(u, n);
    const double g1 = gas.gamma - 1.0;
    const double ek = 0.5 * magSqr(u);
    const double H = soundSpeed(q, gas) * soundSpeed(q, gas) / g1 + ek;  // total enthalpy

    const double nv[3] = {n.x, n.y, n.z};
    const double uv[3] = {u.x, u.y, u.z};

    J[0] = 0.0;
    for (int j = 0; j < 3; ++j) J[1 + j] = nv[j];
    J[4] = 0.0;

    for (int i = 0; i < 3; ++i) {
        double* row = J + (i + 1) * 5;
        row[0] = g1 * ek * nv[i] - uv[i] * un;
        for (int j = 0; j < 3; ++j)
            row[1 + j] = uv[i] * nv[j] - g1 * uv[j] * nv[i] + (i == j ? un : 0.0);
        row[4] = g1 * nv[i];
    }

    double* row = J + 4 * 5;
    row[0] = (g1 * ek - H) * un;
    for (int j = 0; j < 3; ++j) row[1 + j] = H * nv[j] - g1 * uv[j] * un;
    row[4] = gas.gamma * un;
}

RoeAverage roeAverage(const PrimState& L, const PrimState& R, const GasModel& gas) {
    const double sL = std::sqrt(L[0]), sR = std::sqrt(R[0]);
    const double w = 1.0 / (sL + sR);
    RoeAverage a;
    a.rho = sL * sR;
    a.u = (velocity(L) * sL + velocity(R) * sR) * w;
    const double HL = gas.gamma / (gas.gamma - 1.0) * L[4] / L[0] + 0.5 * magSqr(velocity(L));
    const double HR = gas.gamma / (gas.gamma - 1.0) * R[4] / R[0] + 0.5 * magSqr(velocity(R));
    a.H = (sL * HL + sR * HR) * w;
    a.c = std::sqrt((gas.gamma - 1.0) * (a.H - 0.5 * magSqr(a.u)));
    return a;
}

FluxScheme fluxSchemeFromString(const std::string& s) {
    if (s == "roe") return FluxScheme::Roe;
    if (s == "hllc") return FluxScheme::HLLC;
    if (s == "rusanov") return FluxScheme::Rusanov;
    throw std::invalid_argument("unknown flux scheme: " + s);
}

void roeFlux(const PrimState& L, const PrimState& R, const Vec3& n, const GasModel& gas, double* flux) {
    double fL[5], fR[5];
    analyticFlux(L, n, gas, fL);
    analyticFlux(R, n, gas, fR);

    const RoeAverage a = roeAverage(L, R, gas);
    const double un = dot(a.u, n);
    const double c = a.c;

    const double dRho = R[0] - L[0];
    const Vec3 dU = velocity(R) - velocity(L);
    const double dUn = dot(dU, n);
    const double dP = R[4] - L[4];

    // wave strengths: acoustic pair, entropy, shear
    const double a1 = (dP - a.rho * c * dUn) / (2.0 * c * c);
    const double a5 = (dP + a.rho * c * dUn) / (2.0 * c * c);
    const double a2 = dRho - dP / (c * c);

    double lam1 = un - c, lam2 = un, lam5 = un + c;
    const double delta = 0.1 * (std::fabs(un) + c);  // entropy fix width
    auto fix = [delta](double lam) {
        const double m = std::fabs(lam);
        return m < delta ? (lam * lam + delta * delta) / (2.0 * delta) : m;
    };
    lam1 = fix(lam1);
    lam2 = std::fabs(lam2);
    lam5 = fix(lam5);

    double diss[5] = {0, 0, 0, 0, 0};
    auto addWave = [&](double strength, double lam, double k0, const Vec3& kU, double kE) {
        const double w = strength * lam;
        diss[0] += w * k0;
        diss[1] += w * kU.x;
        diss[2] += w * kU.y;
        diss[3] += w * kU.z;
        diss[4] += w * kE;
    };
    addWave(a1, lam1, 1.0, a.u - n * c, a.H - c * un);
    addWave(a2, lam2, 1.0, a.u, 0.5 * magSqr(a.u));
    addWave(a5, lam5, 1.0, a.u + n * c, a.H + c * un);
    // shear wave: tangential velocity jump carried at un
    const Vec3 dUt = dU - n * dUn;
    addWave(a.rho, lam2, 0.0, dUt, dot(a.u, dU) - un * dUn);

    for (int i = 0; i < 5; ++i) flux[i] = 0.5 * (fL[i] + fR[i]) - 0.5 * diss[i];
}

void hllcFlux(const PrimState& L, const PrimState& R, const Vec3& n, const GasModel& gas, double* flux) {
    const double unL = dot(velocity(L), n), unR = dot(velocity(R), n);
    const double cL = soundSpeed(L, gas), cR = soundSpeed(R, gas);
    const RoeAverage a = roeAverage(L, R, gas);
    const double unTilde = dot(a.u, n);

    const double sL = std::min(unL - cL, unTilde - a.c);
    const double sR = std::max(unR + cR, unTilde + a.c);

    if (sL >= 0.0) { analyticFlux(L, n, gas, flux); return; }
    if (sR <= 0.0) { analyticFlux(R, n, gas, flux); return; }

    const double sStar = (R[4] - L[4] + L[0] * unL * (sL - unL) - R[0] * unR * (sR - unR)) /
                         (L[0] * (sL - unL) - R[0] * (sR - unR));

    const PrimState& K = sStar >= 0.0 ? L : R;
    const double sK = sStar >= 0.0 ? sL : sR;
    const double unK = sStar >= 0.0 ? unL : unR;

    double QK[5], FK[5];
    primToCons(K, gas, QK);
    analyticFlux(K, n, gas, FK);

    const double fac = K[0] * (sK - unK) / (sK - sStar);
    double Qs[5];
    Qs[0] = fac;
    const Vec3 uStar = velocity(K) + n * (sStar - unK);
    Qs[1] = fac * uStar.x;
    Qs[2] = fac * uStar.y;
    Qs[3] = fac * uStar.z;
    Qs[4] = fac * (QK[4] / K[0] + (sStar - unK) * (sStar + K[4] / (K[0] * (sK - unK))));

    for (int i = 0; i < 5; ++i) flux[i] = FK[i] + sK * (Qs[i] - QK[i]);
}

void rusanovFlux(const PrimState& L, const PrimState& R, const Vec3& n, const GasModel& gas, double* flux) {
    double fL[5], fR[5], QL[5], QR[5];
    analyticFlux(L, n, gas, fL);
    analyticFlux(R, n, gas, fR);
    primToCons(L, gas, QL);
    primToCons(R, gas, QR);
    const RoeAverage a = roeAverage(L, R, gas);
    const double lam = std::fabs(dot(a.u, n)) + a.c;
    for (int i = 0; i < 5; ++i) flux[i] = 0.5 * (fL[i] + fR[i]) - 0.5 * lam * (QR[i] - QL[i]);
}

void riemannFlux(FluxScheme scheme, const PrimState& L, const PrimState& R, const Vec3& n,
                 const GasModel& gas, double* flux) {
    switch (scheme) {
        case FluxScheme::Roe: roeFlux(L, R, n, gas, flux); return;
        case FluxScheme::HLLC: hllcFlux(L, R, n, gas, flux); return;
        case FluxScheme::Rusanov: rusanovFlux(L, R, n, gas, flux); return;
    }
    throw std::invalid_argument("unknown flux scheme");
}

std::vector<std::array<Vec3, 5>> primitiveGradients(const std::vector<PrimState>& q, const Mesh& mesh) {
    const int nc = mesh.nCells();
    std::vector<std::array<double, 9>> G(nc, {0, 0, 0, 0, 0, 0, 0, 0, 0});
    std::vector<std::array<Vec3, 5>> rhs(nc);

    auto accumulate = [&](int i, int j) {
        const Vec3 d = mesh.cellCentroids()[j] - mesh.cellCentroids()[i];
        const double w = 1.0 / magSqr(d);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) G[i][r * 3 + c] += w * d[r] * d[c];
        for (int k = 0; k < 5; ++k) rhs[i][k] += d * (w * (q[j][k] - q[i][k]));
    };
    for (const InternalFace& f : mesh.faces()) {
        accumulate(f.owner, f.neighbour);
        accumulate(f.neighbour, f.owner);
    }

    std::vector<std::array<Vec3, 5>> grad(nc);
    for (int i = 0; i < nc; ++i) {
        // directions with no neighbour spread get a unit diagonal and a
        // zero gradient, so 1D/2D meshes work without special cases
        double scale = 0.0;
        for (int r = 0; r < 3; ++r) scale = std::max(scale, G[i][r * 3 + r]);
        for (int r = 0; r < 3; ++r)
            if (G[i][r * 3 + r] <= 1e-12 * scale) {
                for (int c = 0; c < 3; ++c) { G[i][r * 3 + c] = 0.0; G[i][c * 3 + r] = 0.0; }
                G[i][r * 3 + r] = 1.0;
                for (int k = 0; k < 5; ++k) rhs[i][k][r] = 0.0;
            }
        const smallmat::LuBlock lu = smallmat::luFactor(G[i].data(), 3);
        for (int k = 0; k < 5; ++k) {
            double v[3] = {rhs[i][k].x, rhs[i][k].y, rhs[i][k].z};
            smallmat::luSolve(lu, v);
            grad[i][k] = {v[0], v[1], v[2]};
        }
    }
    return grad;
}

FaceStates musclReconstruct(const std::vector<PrimState>& q, const Mesh& mesh,
                            const ReconstructionConfig& cfg) {
    const int nf = mesh.nInternalFaces();
    FaceStates out;
    out.left.resize(nf);
    out.right.resize(nf);

    if (cfg.firstOrder) {
        for (int f = 0; f < nf; ++f) {
            out.left[f] = q[mesh.faces()[f].owner];
            out.right[f] = q[mesh.faces()[f].neighbour];
        }
        return out;
    }

    const auto grad = primitiveGradients(q, mesh);
    const int nc = mesh.nCells();

    std::vector<std::array<double, 5>> psi(nc);
    for (auto& p : psi) p.fill(1.0);

    if (cfg.limiter == Limiter::BarthJespersen) {
        std::vector<std::array<double, 5>> qMin(nc), qMax(nc);
        for (int i = 0; i < nc; ++i) { qMin[i] = q[i]; qMax[i] = q[i]; }
        for (const InternalFace& f : mesh.faces())
            for (int k = 0; k < 5; ++k) {
                qMin[f.owner][k] = std::min(qMin[f.owner][k], q[f.neighbour][k]);
                qMax[f.owner][k] = std::max(qMax[f.owner][k], q[f.neighbour][k]);
                qMin[f.neighbour][k] = std::min(qMin[f.neighbour][k], q[f.owner][k]);
                qMax[f.neighbour][k] = std::max(qMax[f.neighbour][k], q[f.owner][k]);
            }
        auto limitAt = [&](int cell, int face) {
            const Vec3 dx = mesh.faceCentre(face) - mesh.cellCentroids()[cell];
            for (int k = 0; k < 5; ++k) {
                const double d = dot(grad[cell][k], dx);
                double r = 1.0;
                if (d > 1e-300) r = (qMax[cell][k] - q[cell][k]) / d;
                else if (d < -1e-300) r = (qMin[cell][k] - q[cell][k]) / d;
                psi[cell][k] = std::min(psi[cell][k], std::min(1.0, r));
            }
        };
        for (int f = 0; f < nf; ++f) {
            limitAt(mesh.faces()[f].owner, f);
            limitAt(mesh.faces()[f].neighbour, f);
        }
    }

    for (int f = 0; f < nf; ++f) {
        const InternalFace& face = mesh.faces()[f];
        const Vec3 xf = mesh.faceCentre(f);
        PrimState L = q[face.owner], R = q[face.neighbour];
        const Vec3 dL = xf - mesh.cellCentroids()[face.owner];
        const Vec3 dR = xf - mesh.cellCentroids()[face.neighbour];
        for (int k = 0; k < 5; ++k) {
            L[k] += psi[face.owner][k] * dot(grad[face.owner][k], dL);
            R[k] += psi[face.neighbour][k] * dot(grad[face.neighbour][k], dR);
        }
        if (!physical(L) || !physical(R)) {
            L = q[face.owner];
            R = q[face.neighbour];
            ++out.fallbacks;
        }
        out.left[f] = L;
        out.right[f] = R;
    }
    return out;
}

double PseudoTimeControl::cfl(int iter) const {
    if (rampIters <= 0 || iter >= rampIters) return endCfl;
    const double t = static_cast<double>(iter) / rampIters;
    return startCfl + t * (endCfl - startCfl);
}

PrimState ghostState(const PrimState& inner, const Vec3& outwardN, PatchKind kind,
                     const EulerCase& ec) {
    switch (kind) {
        case PatchKind::wall:
        case PatchKind::slip:
        case PatchKind::symmetry: {
            PrimState g = inner;
            const Vec3 u = velocity(inner);
            const Vec3 ug = u - outwardN * (2.0 * dot(u, outwardN));
            g[1] = ug.x;
            g[2] = ug.y;
            g[3] = ug.z;
            return g;
        }
        case PatchKind::inlet:
        case PatchKind::farfield:
            return ec.freestream;
        case PatchKind::outlet:
            return inner;
    }
    throw std::invalid_argument("unknown patch kind");
}

namespace {

PatchKind effectiveKind(const BoundaryPatch& patch, const EulerCase& ec) {
    const auto it = ec.patchOverride.find(patch.name);
    return it == ec.patchOverride.end() ? patch.kind : it->second;
}

} // namespace

BlockVector computeResidual(const std::vector<PrimState>& q, const Mesh& mesh, const EulerCase& ec) {
    BlockVector R(mesh.nCells(), 5);
    const FaceStates fs = musclReconstruct(q, mesh, ec.recon);

    for (int f = 0; f < mesh.nInternalFaces(); ++f) {
        const InternalFace& face = mesh.faces()[f];
        const double S = mag(face.areaVector);
        const Vec3 n = face.areaVector / S;
        double flux[5];
        riemannFlux(ec.flux, fs.left[f], fs.right[f], n, ec.gas, flux);
        for (int k = 0; k < 5; ++k) {
            R.cell(face.owner)[k] -= S * flux[k];
            R.cell(face.neighbour)[k] += S * flux[k];
        }
    }

    for (const BoundaryPatch& patch : mesh.patches()) {
        const PatchKind kind = effectiveKind(patch, ec);
        for (const BoundaryFace& bf : patch.faces) {
            const double S = mag(bf.areaVector);
            const Vec3 n = bf.areaVector / S;
            const PrimState g = ghostState(q[bf.cell], n, kind, ec);
            double flux[5];
            riemannFlux(ec.flux, q[bf.cell], g, n, ec.gas, flux);
            for (int k = 0; k < 5; ++k) R.cell(bf.cell)[k] -= S * flux[k];
        }
    }
    return R;
}

std::array<double, 5> residualNorms(const BlockVector& R) {
    std::array<double, 5> norms{};
    for (int i = 0; i < R.nCells(); ++i)
        for (int k = 0; k < 5; ++k) norms[k] += R.cell(i)[k] * R.cell(i)[k];
    for (double& v : norms) v = std::sqrt(v);
    return norms;
}

std::pair<BlockLduMatrix, BlockVector> assembleJacobian(const std::vector<PrimState>& q,
                                                        const Mesh& mesh, const EulerCase& ec,
                                                        double cfl) {
    for (int i = 0; i < mesh.nCells(); ++i)
        if (!physical(q[i]))
            throw std::runtime_error("non-physical state in cell " + std::to_string(i));

    BlockLduMatrix A(mesh, {{"rhoU", 3}, {"rho", 1}, {"rhoE", 1}});
    std::vector<double> sumLambda(mesh.nCells(), 0.0);

    double J[25];
    auto addBlock = [&](double* dst, double scale, const double* Jn, double lamScale) {
        // dst += scale * J + lamScale * I, both in block ordering
        for (int r = 0; r < 5; ++r)
            for (int c = 0; c < 5; ++c)
                dst[kPerm[r] * 5 + kPerm[c]] += scale * Jn[r * 5 + c] + (r == c ? lamScale : 0.0);
    };

    for (int f = 0; f < mesh.nInternalFaces(); ++f) {
        const InternalFace& face = mesh.faces()[f];
        const double S = mag(face.areaVector);
        const Vec3 n = face.areaVector / S;
        const PrimState& qo = q[face.owner];
        const PrimState& qn = q[face.neighbour];
        const RoeAverage a = roeAverage(qo, qn, ec.gas);
        const double lam = std::fabs(dot(a.u, n)) + a.c;

        eulerJacobian(qo, n, ec.gas, J);
        addBlock(A.diag(face.owner), 0.5 * S, J, 0.5 * S * lam);
        addBlock(A.lower(f), -0.5 * S, J, -0.5 * S * lam);  // neighbour row, owner column

        eulerJacobian(qn, n, ec.gas, J);
        addBlock(A.upper(f), 0.5 * S, J, -0.5 * S * lam);   // owner row, neighbour column
        addBlock(A.diag(face.neighbour), -0.5 * S, J, 0.5 * S * lam);

        sumLambda[face.owner] += lam * S;
        sumLambda[face.neighbour] += lam * S;
    }

    for (const BoundaryPatch& patch : mesh.patches()) {
        const PatchKind kind = effectiveKind(patch, ec);
        for (const BoundaryFace& bf : patch.faces) {
            const double S = mag(bf.areaVector);
            const Vec3 n = bf.areaVector / S;
            const PrimState g = ghostState(q[bf.cell], n, kind, ec);
            const RoeAverage a = roeAverage(q[bf.cell], g, ec.gas);
            const double lam = std::fabs(dot(a.u, n)) + a.c;
            // ghost state frozen: only the interior-side half enters
            eulerJacobian(q[bf.cell], n, ec.gas, J);
            addBlock(A.diag(bf.cell), 0.5 * S, J, 0.5 * S * lam);
            sumLambda[bf.cell] += lam * S;
        }
    }

    if (cfl > 0.0)
        for (int i = 0; i < mesh.nCells(); ++i) {
            const double vOverDtau = sumLambda[i] / cfl;  // V/dtau with dtau = cfl V / sum
            for (int r = 0; r < 5; ++r) A.diag(i)[r * 5 + r] += vOverDtau;
        }

    const BlockVector Rn = computeResidual(q, mesh, ec);
    BlockVector rhs(mesh.nCells(), 5);
    for (int i = 0; i < mesh.nCells(); ++i)
        for (int k = 0; k < 5; ++k) rhs.cell(i)[kPerm[k]] = Rn.cell(i)[k];
    return {std::move(A), std::move(rhs)};
}

EulerStepResult implicitStep(std::vector<PrimState>& q, const Mesh& mesh, const EulerCase& ec,
                             double cfl, const LinearSolveFn& solve) {
    auto [A, rhs] = assembleJacobian(q, mesh, ec, cfl);

    EulerStepResult res;
    for (int i = 0; i < mesh.nCells(); ++i)
        for (int k = 0; k < 5; ++k) {  // kPerm maps back to [rho, u, E] order
            const double v = rhs.cell(i)[kPerm[k]];
            res.residualNorms[k] += v * v;
        }
    for (double& v : res.residualNorms) v = std::sqrt(v);

    const BlockVector x0(mesh.nCells(), 5);
    auto [dQ, rep] = solve(A, rhs, x0);
    res.linear = rep;

    double scale = 1.0;
    for (int attempt = 0;; ++attempt) {
        std::vector<PrimState> trial(q.size());
        bool ok = true;
        for (int i = 0; i < mesh.nCells(); ++i) {
            double Q[5];
            primToCons(q[i], ec.gas, Q);
            for (int k = 0; k < 5; ++k) Q[k] += scale * dQ.cell(i)[kPerm[k]];
            trial[i] = consToPrim(Q, ec.gas);
            if (!physical(trial[i])) { ok = false; break; }
        }
        if (ok) {
            q = std::move(trial);
            res.halvings = attempt;
            return res;
        }
        if (attempt >= 5)
            throw std::runtime_error("implicit step: update keeps producing non-physical states "
                                     "after 5 halvings (cfl=" + std::to_string(cfl) + ")");
        scale *= 0.5;
    }
}

double stableTimeStep(const std::vector<PrimState>& q, const Mesh& mesh, const EulerCase& ec,
                      double courant) {
    std::vector<double> sumLambda(mesh.nCells(), 0.0);
    auto add = [&](int cell, const PrimState& a, const PrimState& b, const Vec3& areaVec) {
        const double S = mag(areaVec);
        const Vec3 n = areaVec / S;
        const RoeAverage avg = roeAverage(a, b, ec.gas);
        sumLambda[cell] += (std::fabs(dot(avg.u, n)) + avg.c) * S;
    };
    for (const InternalFace& f : mesh.faces()) {
        add(f.owner, q[f.owner], q[f.neighbour], f.areaVector);
        add(f.neighbour, q[f.owner], q[f.neighbour], f.areaVector);
    }
    for (const BoundaryPatch& patch : mesh.patches()) {
        const PatchKind kind = effectiveKind(patch, ec);
        for (const BoundaryFace& bf : patch.faces) {
            const Vec3 n = bf.areaVector / mag(bf.areaVector);
            add(bf.cell, q[bf.cell], ghostState(q[bf.cell], n, kind, ec), bf.areaVector);
        }
    }
    double dt = 1e300;
    for (int i = 0; i < mesh.nCells(); ++i)
        dt = std::min(dt, courant * mesh.cellVolumes()[i] / sumLambda[i]);
    return dt;
}

void explicitStep(std::vector<PrimState>& q, const Mesh& mesh, const EulerCase& ec, double dt) {
    const int nc = mesh.nCells();

    auto advance = [&](const std::vector<PrimState>& from, std::vector<double>& Q) {
        const BlockVector R = computeResidual(from, mesh, ec);
        for (int i = 0; i < nc; ++i) {
            const double s = dt / mesh.cellVolumes()[i];
            for (int k = 0; k < 5; ++k) Q[static_cast<std::size_t>(i) * 5 + k] += s * R.cell(i)[k];
        }
    };

    std::vector<double> Q0(static_cast<std::size_t>(nc) * 5), Q1;
    for (int i = 0; i < nc; ++i) primToCons(q[i], ec.gas, Q0.data() + static_cast<std::size_t>(i) * 5);

    Q1 = Q0;
    advance(q, Q1);
    std::vector<PrimState> q1(nc);
    for (int i = 0; i < nc; ++i) q1[i] = consToPrim(Q1.data() + static_cast<std::size_t>(i) * 5, ec.gas);

    advance(q1, Q1);  // Q1 now holds Q0 + dt L(q0) + dt L(q1)
    for (int i = 0; i < nc; ++i) {
        double Q[5];
        for (int k = 0; k < 5; ++k)
            Q[k] = 0.5 * (Q0[static_cast<std::size_t>(i) * 5 + k] + Q1[static_cast<std::size_t>(i) * 5 + k]);
        q[i] = consToPrim(Q, ec.gas);
    }
}

} // namespace fvb
