#pragma once

// Timing kernels in the style of the s_memtime-bracketed MFMA chain:
//
//   s_nop x pad
//   s_waitcnt lgkmcnt(0) & vmcnt(0)
//   s_memtime s[0:1]            <- timed region begins
//   s_waitcnt lgkmcnt(0)
//   v_mfma ... D, A, B, D       (n times, each reading the previous D as C)
//   s_memtime s[2:3]            <- timed region ends
//   s_waitcnt lgkmcnt(0)
//   s_endpgm
//
// and per-MFMA latency recovery:
//   t_mfma = (t_total - t_memtime - t_inst) / (n - 1)

#include <cstdint>
#include <string>
#include <vector>

#include "mcesim/config.hpp"
#include "mcesim/isa.hpp"
#include "mcesim/rational.hpp"
#include "mcesim/timing.hpp"

namespace mcesim {

struct BenchSpec {
  MfmaSpec mfma;
  int n_mfma = 2;
  int pad_nops = 0;
  // Overrides pad_nops so the timed region starts on a fetch-line boundary.
  bool align_timed_region = false;
  std::uint64_t base_address = 0;
};

struct LatencyMeasurement {
  Cycle t_total = 0;
  int n_mfma = 0;
  Cycle t_memtime = 0;
  Cycle t_inst = 0;
  Rational t_mfma;
};

struct TimedRegion {
  std::size_t first;  // index of the opening s_memtime
  std::size_t last;   // index of the closing s_memtime
  std::uint64_t begin_byte;
  std::uint64_t end_byte;  // one past the closing s_memtime
};

// Input types whose benchmarks need cache-line padding on real parts (fp16, i8).
bool needs_padding(const MfmaSpec& spec) noexcept;

// Padding that puts the opening s_memtime on a line boundary.
int aligned_pad(const CuConfig& cfg, std::uint64_t base_address = 0);
// Padding that puts the second MFMA on a line boundary, so the timed region
// crosses into a line it has not touched before.
int misaligned_pad(const CuConfig& cfg, std::uint64_t base_address = 0);

Program generate_microbench(const BenchSpec& spec, const CuConfig& cfg = {});
TimedRegion timed_region(const Program& p);

// Throws MissingSamples unless wavefront `wf_id` recorded exactly two samples.
LatencyMeasurement extract_latency(const SimTrace& trace, int n_mfma, const CuConfig& cfg, int wf_id = 0);
LatencyMeasurement extract_latency(Cycle t_total, int n_mfma, Cycle t_memtime, Cycle t_inst);

struct BenchResult {
  BenchSpec spec;  // pad_nops resolved
  Program program;
  SimTrace trace;
  LatencyMeasurement measurement;
};

// Generate, simulate on one wavefront (SIMD 0) and extract.
BenchResult run_bench(const BenchSpec& spec, const CuConfig& cfg);

enum class AlignPolicy {
  padded_only,  // align fp16/i8-input benches, leave the rest unpadded
  all,
  none,
};

struct SweepOptions {
  AlignPolicy align = AlignPolicy::padded_only;
  // Force a line crossing into the timed region of fp16/i8-input benches.
  bool misalign_padded = false;
};

struct SweepCell {
  MfmaSpec spec;
  int n_mfma = 0;
  int pad_nops = 0;
  Cycle t_total = 0;
  Rational t_mfma;
  std::int64_t expected = 0;  // latency model value at the configured scale
};

struct NRange {
  int first = 2;
  int last = 5;
};

// One cell per (spec, n), ordered spec-major. Cells run in parallel.
std::vector<SweepCell> run_sweep(GpuModel model, const std::vector<MfmaSpec>& specs, NRange n,
                                 const CuConfig& cfg, const SweepOptions& opts = {});
std::vector<SweepCell> run_sweep_serial(GpuModel model, const std::vector<MfmaSpec>& specs, NRange n,
                                        const CuConfig& cfg, const SweepOptions& opts = {});

double abs_pct_err(const SweepCell& cell);

// gpu_model,mnemonic,n_mfma,pad_nops,t_total,t_mfma,expected,abs_pct_err
std::string sweep_csv(GpuModel model, const std::vector<SweepCell>& cells);

// Decimal for terminating fractions, otherwise six decimals.
std::string format_rational(const Rational& r);

}  // namespace mcesim
