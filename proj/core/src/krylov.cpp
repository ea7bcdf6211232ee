#include "blockfv/krylov.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fvb {

void SolverConfig::validate() const {
    if (!(relTol > 0.0) || !(absTol > 0.0))
        throw std::invalid_argument("SolverConfig: tolerances must be positive");
    if (maxIters < 1) throw std::invalid_argument("SolverConfig: maxIters must be >= 1");
    if (gmresRestart < 1) throw std::invalid_argument("SolverConfig: gmresRestart must be >= 1");
    if (amg.maxLevels < 1) throw std::invalid_argument("SolverConfig: amg.maxLevels must be >= 1");
    if (amg.preSweeps < 0 || amg.postSweeps < 0)
        throw std::invalid_argument("SolverConfig: amg sweeps must be >= 0");
}

std::string SolveReport::csvHeader() {
    return "iter,initRes,finalRes,tConvert,tSetup,tSolve,tRetrieve";
}

std::string SolveReport::csvRow() const {
    auto t = [this](const char* k) {
        const auto it = timings.find(k);
        return it == timings.end() ? 0.0 : it->second;
    };
    std::ostringstream os;
    os.precision(12);
    os << iterations << "," << initialResidual << "," << finalResidual << ","
       << t("convert") << "," << t("setup") << "," << t("solve") << "," << t("retrieve");
    return os.str();
}

namespace {

double defaultDot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

struct Ops {
    const KrylovOps& k;
    double dot(const double* a, const double* b) const {
        return k.dot ? k.dot(a, b) : defaultDot(a, b, k.size);
    }
    double norm(const double* a) const { return std::sqrt(dot(a, a)); }
    void applyA(const double* x, double* y) const { k.applyA(x, y); }
    void applyM(const double* r, double* z) const {
        if (k.applyM) k.applyM(r, z);
        else for (std::size_t i = 0; i < k.size; ++i) z[i] = r[i];
    }
};

} // namespace

SolveReport gmresSolve(const KrylovOps& kops, const double* b, double* x, const SolverConfig& cfg) {
    cfg.validate();
    const Ops ops{kops};
    const std::size_t N = kops.size;
    const int m = cfg.gmresRestart;

    SolveReport rep;
    std::vector<double> r(N), w(N), z(N);

    ops.applyA(x, r.data());
    for (std::size_t i = 0; i < N; ++i) r[i] = b[i] - r[i];
    double beta = ops.norm(r.data());
    rep.initialResidual = beta;
    const double tol = std::max(cfg.relTol * beta, cfg.absTol);
    if (beta <= tol) {
        rep.finalResidual = beta;
        rep.converged = true;
        return rep;
    }

    std::vector<std::vector<double>> V(m + 1, std::vector<double>(N));
    std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m), sn(m), g(m + 1);

    int totalIters = 0;
    while (totalIters < cfg.maxIters) {
        for (std::size_t i = 0; i < N; ++i) V[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        int j = 0;
        bool happy = false;
        for (; j < m && totalIters < cfg.maxIters; ++j, ++totalIters) {
            // w = A M^{-1} v_j  (right preconditioning keeps the GMRES
            // residual equal to the true residual)
            ops.applyM(V[j].data(), z.data());
            ops.applyA(z.data(), w.data());
            for (int i = 0; i <= j; ++i) {
                H[i][j] = ops.dot(w.data(), V[i].data());
                for (std::size_t q = 0; q < N; ++q) w[q] -= H[i][j] * V[i][q];
            }
            H[j + 1][j] = ops.norm(w.data());
            if (H[j + 1][j] > 1e-290)
                for (std::size_t q = 0; q < N; ++q) V[j + 1][q] = w[q] / H[j + 1][j];
            else
                happy = true;

            for (int i = 0; i < j; ++i) {
                const double t = cs[i] * H[i][j] + sn[i] * H[i + 1][j];
                H[i + 1][j] = -sn[i] * H[i][j] + cs[i] * H[i + 1][j];
                H[i][j] = t;
            }
            const double denom = std::hypot(H[j][j], H[j + 1][j]);
            cs[j] = denom > 0.0 ? H[j][j] / denom : 1.0;
            sn[j] = denom > 0.0 ? H[j + 1][j] / denom : 0.0;
            H[j][j] = denom;
            H[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];

            if (std::fabs(g[j + 1]) <= tol || happy) { ++j; ++totalIters; break; }
        }

        // back substitution for y, then x += M^{-1} (V y)
        std::vector<double> y(j);
        for (int i = j - 1; i >= 0; --i) {
            double s = g[i];
            for (int q = i + 1; q < j; ++q) s -= H[i][q] * y[q];
            y[i] = s / H[i][i];
        }
        std::fill(w.begin(), w.end(), 0.0);
        for (int i = 0; i < j; ++i)
            for (std::size_t q = 0; q < N; ++q) w[q] += y[i] * V[i][q];
        ops.applyM(w.data(), z.data());
        for (std::size_t q = 0; q < N; ++q) x[q] += z[q];

        ops.applyA(x, r.data());
        for (std::size_t i = 0; i < N; ++i) r[i] = b[i] - r[i];
        beta = ops.norm(r.data());
        rep.iterations = totalIters;
        rep.finalResidual = beta;
        if (beta <= tol) { rep.converged = true; return rep; }
        if (happy) {
            // exact in the Krylov subspace but tolerance not met: restart
            // can make no progress only if beta stayed put
            if (beta <= tol * 1.0000001) { rep.converged = true; return rep; }
        }
    }
    rep.iterations = totalIters;
    rep.converged = rep.finalResidual <= tol;
    return rep;
}

SolveReport bicgstabSolve(const KrylovOps& kops, const double* b, double* x, const SolverConfig& cfg) {
    cfg.validate();
    const Ops ops{kops};
    const std::size_t N = kops.size;

    SolveReport rep;
    std::vector<double> r(N), rhat(N), p(N, 0.0), v(N, 0.0), s(N), t(N), phat(N), shat(N);

    ops.applyA(x, r.data());
    for (std::size_t i = 0; i < N; ++i) r[i] = b[i] - r[i];
    const double beta0 = ops.norm(r.data());
    rep.initialResidual = beta0;
    const double tol = std::max(cfg.relTol * beta0, cfg.absTol);
    if (beta0 <= tol) {
        rep.finalResidual = beta0;
        rep.converged = true;
        return rep;
    }
    rhat = r;

    double rhoPrev = 1.0, alpha = 1.0, omega = 1.0;
    for (int it = 0; it < cfg.maxIters; ++it) {
        const double rho = ops.dot(rhat.data(), r.data());
        if (std::fabs(rho) < 1e-30) { rep.breakdown = true; break; }
        if (it == 0) {
            p = r;
        } else {
            const double betaF = (rho / rhoPrev) * (alpha / omega);
            for (std::size_t i = 0; i < N; ++i) p[i] = r[i] + betaF * (p[i] - omega * v[i]);
        }
        ops.applyM(p.data(), phat.data());
        ops.applyA(phat.data(), v.data());
        const double rhatv = ops.dot(rhat.data(), v.data());
        if (std::fabs(rhatv) < 1e-300) { rep.breakdown = true; break; }
        alpha = rho / rhatv;
        for (std::size_t i = 0; i < N; ++i) s[i] = r[i] - alpha * v[i];
        if (ops.norm(s.data()) <= tol) {
            for (std::size_t i = 0; i < N; ++i) x[i] += alpha * phat[i];
            rep.iterations = it + 1;
            break;
        }
        ops.applyM(s.data(), shat.data());
        ops.applyA(shat.data(), t.data());
        const double tt = ops.dot(t.data(), t.data());
        omega = tt > 0.0 ? ops.dot(t.data(), s.data()) / tt : 0.0;
        for (std::size_t i = 0; i < N; ++i) x[i] += alpha * phat[i] + omega * shat[i];
        for (std::size_t i = 0; i < N; ++i) r[i] = s[i] - omega * t[i];
        rep.iterations = it + 1;
        if (std::fabs(omega) < 1e-30) { rep.breakdown = true; break; }
        rhoPrev = rho;
        if (ops.norm(r.data()) <= tol) break;
    }

    ops.applyA(x, r.data());
    for (std::size_t i = 0; i < N; ++i) r[i] = b[i] - r[i];
    rep.finalResidual = ops.norm(r.data());
    rep.converged = rep.finalResidual <= tol;
    if (rep.converged) rep.breakdown = false;
    if (rep.breakdown)
        throw std::runtime_error("BiCGStab breakdown at iteration " + std::to_string(rep.iterations) +
                                 ", residual " + std::to_string(rep.finalResidual));
    return rep;
}

SolveReport krylovSolve(const KrylovOps& ops, const double* b, double* x, const SolverConfig& cfg) {
    return cfg.method == KrylovMethod::GMRES ? gmresSolve(ops, b, x, cfg)
                                             : bicgstabSolve(ops, b, x, cfg);
}

} // namespace fvb
