#include <benchmark/benchmark.h>

#include <random>

#include "tlsgn/tlsgn.hpp"

using namespace tlsgn;

namespace {

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

constexpr Index kRows = 400;

void BM_FreshQr(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix a = gaussian(kRows, n, 1);
  const Vector u = gaussian(kRows, 1, 2);
  const Vector v = gaussian(n, 1, 3);
  for (auto _ : state) {
    Matrix updated = a + u * v.transpose();
    benchmark::DoNotOptimize(linalg::qr_factor(updated));
  }
}

void BM_RankOneUpdate(benchmark::State& state) {
  const Index n = state.range(0);
  const linalg::ThinQr qr = linalg::qr_factor(gaussian(kRows, n, 1));
  const Vector u = gaussian(kRows, 1, 2);
  const Vector v = gaussian(n, 1, 3);
  linalg::FlopCounter flops;
  for (auto _ : state) benchmark::DoNotOptimize(linalg::qr_rank_one_update(qr, u, v, &flops));
  state.counters["rotation_flops"] = benchmark::Counter(
      static_cast<double>(flops.flops) / static_cast<double>(state.iterations()));
}

void BM_GaussNewtonSolve(benchmark::State& state) {
  probgen::SpectrumSpec spec;
  spec.m = kRows;
  spec.n = state.range(0);
  spec.sigmas = probgen::gapped_spectrum(spec.n, 4.0);
  spec.seed = 7;
  const ProblemData problem = probgen::generate(spec);
  SolverConfig cfg;
  cfg.subproblem_mode = state.range(1) ? SubproblemMode::rank_one_update : SubproblemMode::fresh_qr;
  cfg.keep_residuals = false;
  for (auto _ : state) benchmark::DoNotOptimize(solve(problem, cfg));
  state.SetLabel(to_string(cfg.subproblem_mode));
}

void BM_SvdReference(benchmark::State& state) {
  probgen::SpectrumSpec spec;
  spec.m = kRows;
  spec.n = state.range(0);
  spec.sigmas = probgen::gapped_spectrum(spec.n, 4.0);
  spec.seed = 7;
  const ProblemData problem = probgen::generate(spec);
  for (auto _ : state) benchmark::DoNotOptimize(solve_tls_svd(problem));
}

}  // namespace

BENCHMARK(BM_FreshQr)->RangeMultiplier(2)->Range(10, 80);
BENCHMARK(BM_RankOneUpdate)->RangeMultiplier(2)->Range(10, 80);
BENCHMARK(BM_GaussNewtonSolve)->ArgsProduct({{10, 40}, {0, 1}});
BENCHMARK(BM_SvdReference)->Arg(10)->Arg(40);
BENCHMARK_MAIN();
