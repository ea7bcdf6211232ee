#include "support/exact_riemann.hpp"

#include <cmath>
#include <stdexcept>

namespace oracle {

using fvb::GasModel;
using fvb::PrimState;

namespace {

// pressure function f_K(p) and its derivative for one side
void sideFunction(double p, double rhoK, double pK, double g, double& f, double& fd) {
    if (p > pK) {  // shock
        const double A = 2.0 / ((g + 1.0) * rhoK);
        const double B = (g - 1.0) / (g + 1.0) * pK;
        const double q = std::sqrt(A / (p + B));
        f = (p - pK) * q;
        fd = q * (1.0 - 0.5 * (p - pK) / (B + p));
    } else {  // rarefaction
        const double cK = std::sqrt(g * pK / rhoK);
        f = 2.0 * cK / (g - 1.0) * (std::pow(p / pK, (g - 1.0) / (2.0 * g)) - 1.0);
        fd = 1.0 / (rhoK * cK) * std::pow(p / pK, -(g + 1.0) / (2.0 * g));
    }
}

} // namespace

RiemannStar solveStar(const PrimState& L, const PrimState& R, const GasModel& gas) {
    const double g = gas.gamma;
    const double rhoL = L[0], uL = L[1], pL = L[4];
    const double rhoR = R[0], uR = R[1], pR = R[4];
    const double cL = std::sqrt(g * pL / rhoL), cR = std::sqrt(g * pR / rhoR);
    const double du = uR - uL;

    if (2.0 * cL / (g - 1.0) + 2.0 * cR / (g - 1.0) <= du)
        throw std::runtime_error("exact Riemann oracle: vacuum generated");

    // two-rarefaction initial guess, clipped away from zero
    double p = std::pow((cL + cR - 0.5 * (g - 1.0) * du) /
                            (cL / std::pow(pL, (g - 1.0) / (2.0 * g)) +
                             cR / std::pow(pR, (g - 1.0) / (2.0 * g))),
                        2.0 * g / (g - 1.0));
    p = std::max(p, 1e-12 * std::min(pL, pR));

    RiemannStar s;
    for (int it = 0; it < 100; ++it) {
        double fL, fdL, fR, fdR;
        sideFunction(p, rhoL, pL, g, fL, fdL);
        sideFunction(p, rhoR, pR, g, fR, fdR);
        const double f = fL + fR + du;
        const double dp = f / (fdL + fdR);
        const double pNew = std::max(p - dp, 1e-14 * p);
        s.iterations = it + 1;
        if (std::fabs(pNew - p) / (0.5 * (pNew + p)) < 1e-14) { p = pNew; break; }
        p = pNew;
    }
    s.p = p;
    double fL, fdL, fR, fdR;
    sideFunction(p, rhoL, pL, g, fL, fdL);
    sideFunction(p, rhoR, pR, g, fR, fdR);
    s.u = 0.5 * (uL + uR) + 0.5 * (fR - fL);
    return s;
}

PrimState sample(const PrimState& L, const PrimState& R, const GasModel& gas, double xi) {
    const double g = gas.gamma;
    const RiemannStar s = solveStar(L, R, gas);

    const bool leftOfContact = xi <= s.u;
    const PrimState& K = leftOfContact ? L : R;
    const double sign = leftOfContact ? 1.0 : -1.0;  // waves face outward from the contact
    const double rhoK = K[0], uK = K[1], pK = K[4];
    const double cK = std::sqrt(g * pK / rhoK);

    PrimState out = K;  // tangential velocity is passively advected
    out[1] = s.u;
    out[4] = s.p;

    if (s.p > pK) {  // shock on this side
        const double ms = s.p / pK;
        const double rhoStar = rhoK * ((g + 1.0) * ms + (g - 1.0)) / ((g - 1.0) * ms + (g + 1.0));
        const double speed = uK - sign * cK * std::sqrt((g + 1.0) / (2.0 * g) * ms + (g - 1.0) / (2.0 * g));
        if (sign * (speed - xi) >= 0.0) return K;  // ahead of the shock
        out[0] = rhoStar;
        return out;
    }

    // rarefaction
    const double rhoStar = rhoK * std::pow(s.p / pK, 1.0 / g);
    const double cStar = cK * std::pow(s.p / pK, (g - 1.0) / (2.0 * g));
    const double headSpeed = uK - sign * cK;
    const double tailSpeed = s.u - sign * cStar;
    if (sign * (headSpeed - xi) >= 0.0) return K;  // ahead of the head
    if (sign * (tailSpeed - xi) <= 0.0) {          // behind the tail
        out[0] = rhoStar;
        return out;
    }
    // inside the fan
    const double c = (2.0 / (g + 1.0)) * (cK + sign * (g - 1.0) / 2.0 * (uK - xi));
    out[1] = (2.0 / (g + 1.0)) * (sign * cK + (g - 1.0) / 2.0 * uK + xi);
    out[0] = rhoK * std::pow(c / cK, 2.0 / (g - 1.0));
    out[4] = pK * std::pow(c / cK, 2.0 * g / (g - 1.0));
    return out;
}

void godunovFlux(const PrimState& L, const PrimState& R, const GasModel& gas, double* flux) {
    const PrimState q = sample(L, R, gas, 0.0);
    fvb::analyticFlux(q, {1.0, 0.0, 0.0}, gas, flux);
}

} // namespace oracle
