#include <benchmark/benchmark.h>

#include "unobs/finite_embedding.hpp"
#include "unobs/linalg.hpp"
#include "unobs/sim_engine.hpp"
#include "unobs/special_functions.hpp"
#include "unobs/spectral_embedding.hpp"

using namespace unobs;

static void BM_BesselJ(benchmark::State& state) {
    const double r = static_cast<double>(state.range(0)) / 10.0;
    for (auto _ : state) {
        double acc = 0.0;
        for (int k = -10; k <= 10; ++k) acc += special::bessel_j(k, r);
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(BM_BesselJ)->Arg(5)->Arg(50)->Arg(200);

static void BM_TauSpec(benchmark::State& state) {
    Vector x(2);
    x << 3.0, -2.0;
    const int N = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(spectral::tau_spec(x, 0.1, N));
}
BENCHMARK(BM_TauSpec)->Arg(12)->Arg(24)->Arg(48);

static void BM_ExpmDense(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const CMatrix m = spectral::assemble_Aop(0.3, 0.1, 1.0, spectral::SpectralVec::unit(N, 0));
    for (auto _ : state) benchmark::DoNotOptimize(linalg::expm(m, 1e-3));
}
BENCHMARK(BM_ExpmDense)->Arg(12)->Arg(24);

static void BM_ExpAction(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const auto zeta = spectral::SpectralVec::unit(N, 0);
    const CVector v = spectral::tau_spec(Vector::Ones(2), 0.1, N).coeffs();
    for (auto _ : state) benchmark::DoNotOptimize(sim::exp_action(0.3, 0.1, 1.0, zeta, 1e-3, v));
}
BENCHMARK(BM_ExpAction)->Arg(12)->Arg(24);

static void BM_FiniteRhs(benchmark::State& state) {
    const auto plant = finite::rotation_plant();
    finite::FinParams p;
    p.K.K = RowVector(2);
    p.K.K << -1.0, -3.0;
    p.delta = 0.1;
    Vector s(5), ds;
    s << 0.3, -0.2, 0.1, 0.4, 0.2;
    for (auto _ : state) {
        finite::closed_loop_rhs_flat(plant, p, s, ds);
        benchmark::DoNotOptimize(ds.data());
    }
}
BENCHMARK(BM_FiniteRhs);

static void BM_SpectralLoop(benchmark::State& state) {
    spectral::SpectralParams p;
    p.K.K = RowVector(2);
    p.K.K << 0.0, -1.0;
    p.delta = 0.01;
    p.Delta = 0.004;
    const spectral::OutputSpec spec{spectral::OutputKind::NormSq, 0.1, {}};
    sim::IntegratorConfig cfg;
    cfg.horizon = 1.0;
    cfg.record_every = 1000;
    cfg.method = state.range(0) == 0 ? sim::Method::ExactLinear : sim::Method::Rk4Coupled;
    Vector x0(2), xh(2);
    x0 << 0.5, 0.2;
    xh << -0.3, 0.4;
    for (auto _ : state) benchmark::DoNotOptimize(sim::run_spectral_loop(spec, p, x0, xh, cfg));
}
BENCHMARK(BM_SpectralLoop)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
