// OpenMP kernels against their serial references.
#include <benchmark/benchmark.h>

#include <random>

#include "mcesim/mfma_func.hpp"
#include "mcesim/microbench.hpp"
#include "mcesim/validate.hpp"

using namespace mcesim;

namespace {

BlockedMatrixOperand random_operand(NumericType t, int blocks, int rows, int cols, std::mt19937& rng) {
  std::uniform_int_distribution<int> d(-8, 8);
  std::vector<double> v(static_cast<std::size_t>(blocks) * rows * cols);
  for (auto& x : v) x = d(rng) / 4.0;
  return {t, blocks, rows, cols, std::move(v)};
}

void BM_Mfma(benchmark::State& state, bool parallel, const char* mnemonic) {
  const MfmaSpec s = parse_mfma_mnemonic(mnemonic);
  std::mt19937 rng(7);
  const auto a = random_operand(s.in_type, s.blocks, s.m, s.k, rng);
  const auto b = random_operand(s.in_type, s.blocks, s.k, s.n, rng);
  const auto c = random_operand(s.out_type, s.blocks, s.m, s.n, rng);
  for (auto _ : state) {
    auto d = parallel ? mfma_execute(s, a, b, c) : mfma_execute_serial(s, a, b, c);
    benchmark::DoNotOptimize(d);
  }
  state.SetItemsProcessed(state.iterations() * s.blocks * s.m * s.n * s.k);
}

void BM_Sweep(benchmark::State& state, bool parallel, GpuModel model) {
  CuConfig cfg;
  cfg.gpu_model = model;
  const auto specs = expected_table(model).specs();
  const NRange n{2, static_cast<int>(state.range(0))};
  for (auto _ : state) {
    auto cells = parallel ? run_sweep(model, specs, n, cfg) : run_sweep_serial(model, specs, n, cfg);
    benchmark::DoNotOptimize(cells);
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Mfma, f32_32x32x4bf16_omp, true, "v_mfma_f32_32x32x4bf16");
BENCHMARK_CAPTURE(BM_Mfma, f32_32x32x4bf16_serial, false, "v_mfma_f32_32x32x4bf16");
BENCHMARK_CAPTURE(BM_Mfma, f32_32x32x2f32_omp, true, "v_mfma_f32_32x32x2f32");
BENCHMARK_CAPTURE(BM_Mfma, f32_32x32x2f32_serial, false, "v_mfma_f32_32x32x2f32");
BENCHMARK_CAPTURE(BM_Sweep, mi200_omp, true, GpuModel::mi200)->Arg(5)->Arg(64);
BENCHMARK_CAPTURE(BM_Sweep, mi200_serial, false, GpuModel::mi200)->Arg(5)->Arg(64);
BENCHMARK_CAPTURE(BM_Sweep, mi300_omp, true, GpuModel::mi300)->Arg(5)->Arg(64);
BENCHMARK_CAPTURE(BM_Sweep, mi300_serial, false, GpuModel::mi300)->Arg(5)->Arg(64);

BENCHMARK_MAIN();
