// Microbenchmarks: block matvec in LDU vs CSR layout, format conversion,
// and full preconditioned solves on a coupled-size block system.

#include "blockfv/block_csr.hpp"
#include "blockfv/engine.hpp"
#include "blockfv/mesh.hpp"

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

using namespace fvb;

namespace {

// the matrix keeps a pointer to its mesh, so both live behind stable
// heap addresses
struct System {
    std::unique_ptr<Mesh> mesh;
    std::unique_ptr<BlockLduMatrix> A;
    BlockCsrMatrix csr;
    BlockVector x, y;
};

System makeSystem(int n, int blockSize) {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    System s;
    s.mesh = std::make_unique<Mesh>(generateStructured2d(n, n, {1, 1, 1}));
    const std::vector<VariableDescriptor> vars =
        blockSize == 4 ? std::vector<VariableDescriptor>{{"U", 3}, {"p", 1}}
                       : std::vector<VariableDescriptor>{{"U", 3}, {"rho", 1}, {"rhoE", 1}};
    s.A = std::make_unique<BlockLduMatrix>(*s.mesh, vars);

    const int bs = s.A->blockSize();
    for (int f = 0; f < s.A->nFaces(); ++f)
        for (int q = 0; q < bs * bs; ++q) {
            s.A->upper(f)[q] = u(rng);
            s.A->lower(f)[q] = u(rng);
        }
    for (int i = 0; i < s.A->nCells(); ++i)
        for (int r = 0; r < bs; ++r)
            for (int c = 0; c < bs; ++c)
                s.A->diag(i)[r * bs + c] = u(rng) + (r == c ? 8.0 * bs : 0.0);

    s.csr = lduToBlockCsr(*s.A);
    s.x = BlockVector(s.A->nCells(), bs);
    s.y = BlockVector(s.A->nCells(), bs);
    for (double& v : s.x.values) v = u(rng);
    return s;
}

void bmLduMatvec(benchmark::State& state) {
    System s = makeSystem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    for (auto _ : state) {
        blockMatvec(*s.A, s.x.values.data(), s.y.values.data());
        benchmark::DoNotOptimize(s.y.values.data());
    }
    state.SetItemsProcessed(state.iterations() * s.csr.nnz());
}

void bmCsrMatvec(benchmark::State& state) {
    System s = makeSystem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    for (auto _ : state) {
        csrMatvec(s.csr, s.x.values.data(), s.y.values.data());
        benchmark::DoNotOptimize(s.y.values.data());
    }
    state.SetItemsProcessed(state.iterations() * s.csr.nnz());
}

void bmConvert(benchmark::State& state) {
    System s = makeSystem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    for (auto _ : state) {
        BlockCsrMatrix csr = lduToBlockCsr(*s.A);
        benchmark::DoNotOptimize(csr.values.data());
    }
}

void bmReplaceValues(benchmark::State& state) {
    System s = makeSystem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    for (auto _ : state) {
        replaceValues(s.csr, *s.A);
        benchmark::DoNotOptimize(s.csr.values.data());
    }
}

void bmSolve(benchmark::State& state) {
    System s = makeSystem(static_cast<int>(state.range(0)), 4);
    SolverConfig cfg;
    cfg.relTol = 1e-8;
    cfg.preconditioner = static_cast<PrecondKind>(state.range(1));
    const BlockVector b = s.x;
    const BlockVector x0(s.A->nCells(), s.A->blockSize());
    for (auto _ : state) {
        auto [x, rep] = backendSolve(*s.A, b, x0, Backend::EngineCsr, cfg);
        benchmark::DoNotOptimize(x.values.data());
        if (!rep.converged) state.SkipWithError("solve did not converge");
    }
}

} // namespace

BENCHMARK(bmLduMatvec)->Args({32, 4})->Args({64, 4})->Args({128, 4})->Args({64, 5});
BENCHMARK(bmCsrMatvec)->Args({32, 4})->Args({64, 4})->Args({128, 4})->Args({64, 5});
BENCHMARK(bmConvert)->Args({64, 4})->Args({128, 4});
BENCHMARK(bmReplaceValues)->Args({64, 4})->Args({128, 4});
BENCHMARK(bmSolve)
    ->Args({32, static_cast<int>(PrecondKind::LUSGS)})
    ->Args({32, static_cast<int>(PrecondKind::DILU)})
    ->Args({32, static_cast<int>(PrecondKind::AMG)});

BENCHMARK_MAIN();
