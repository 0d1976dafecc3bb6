#include "mcesim/microbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mcesim/error.hpp"

namespace mcesim {

namespace {

std::uint32_t regs_for(long elements, int bits) {
  // 64 lanes x 32-bit VGPRs
  const long total_bits = elements * bits;
  return static_cast<std::uint32_t>(std::max(1L, (total_bits + 64 * 32 - 1) / (64 * 32)));
}

int type_bits(NumericType t) {
  switch (t) {
    case NumericType::fp64: return 64;
    case NumericType::fp32:
    case NumericType::i32: return 32;
    case NumericType::fp16:
    case NumericType::bf16: return 16;
    case NumericType::i8: return 8;
  }
  return 32;
}

RegRange vregs(std::uint32_t& next, std::uint32_t count) {
  RegRange r{RegFile::vector, next, next + count - 1};
  next += count;
  return r;
}

// Smallest pad such that base + pad * nop + lead lands on a line boundary.
int pad_to_boundary(const CuConfig& cfg, std::uint64_t base, std::uint64_t lead) {
  const std::uint64_t line = cfg.fetch_line_bytes;
  const std::uint64_t nop = cfg.encoding.nop;  // pad < line covers every residue
  for (std::uint64_t pad = 0; pad < line; ++pad) {
    if ((base + pad * nop + lead) % line == 0) return static_cast<int>(pad);
  }
  throw ConfigError("no s_nop padding reaches a fetch-line boundary with this encoding");
}

}  // namespace

bool needs_padding(const MfmaSpec& spec) noexcept {
  return spec.in_type == NumericType::fp16 || spec.in_type == NumericType::i8;
}

int aligned_pad(const CuConfig& cfg, std::uint64_t base_address) {
  return pad_to_boundary(cfg, base_address, cfg.encoding.waitcnt);
}

int misaligned_pad(const CuConfig& cfg, std::uint64_t base_address) {
  const auto& e = cfg.encoding;
  return pad_to_boundary(cfg, base_address, e.waitcnt + e.memtime + e.waitcnt + e.mfma);
}

Program generate_microbench(const BenchSpec& spec, const CuConfig& cfg) {
  if (spec.n_mfma < 2) throw ConfigError("a latency microbenchmark needs at least 2 MFMAs");
  if (spec.pad_nops < 0) throw ConfigError("pad_nops must be >= 0");
  const int pad = spec.align_timed_region ? aligned_pad(cfg, spec.base_address) : spec.pad_nops;

  const auto& m = spec.mfma;
  const long acc_elems = static_cast<long>(m.blocks) * m.m * m.n;
  std::uint32_t next = 0;
  const RegRange d = vregs(next, regs_for(acc_elems, type_bits(m.out_type)));
  const RegRange a = vregs(next, regs_for(static_cast<long>(m.blocks) * m.m * m.k, type_bits(m.in_type)));
  const RegRange b = vregs(next, regs_for(static_cast<long>(m.blocks) * m.k * m.n, type_bits(m.in_type)));

  std::vector<Instruction> body;
  body.reserve(static_cast<std::size_t>(pad + spec.n_mfma + 6));
  for (int i = 0; i < pad; ++i) body.push_back(Instruction::make_nop(0));
  WaitCounts all_zero;
  all_zero.lgkmcnt = 0;
  all_zero.vmcnt = 0;
  WaitCounts lgkm_zero;
  lgkm_zero.lgkmcnt = 0;
  body.push_back(Instruction::make_waitcnt(all_zero));
  body.push_back(Instruction::make_memtime({RegFile::scalar, 0, 1}));
  body.push_back(Instruction::make_waitcnt(lgkm_zero));
  for (int i = 0; i < spec.n_mfma; ++i) body.push_back(Instruction::make_mfma(m, d, a, b, d));
  body.push_back(Instruction::make_memtime({RegFile::scalar, 2, 3}));
  body.push_back(Instruction::make_waitcnt(lgkm_zero));
  body.push_back(Instruction::make_endpgm());
  for (std::size_t i = 0; i < body.size(); ++i) body[i].source_line = i + 1;
  return Program(std::move(body), spec.base_address, cfg.encoding);
}

TimedRegion timed_region(const Program& p) {
  std::vector<std::size_t> memtimes;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].opcode == Opcode::s_memtime) memtimes.push_back(i);
  }
  if (memtimes.size() < 2) throw MissingSamples("program has fewer than two s_memtime instructions");
  return {memtimes.front(), memtimes.back(), p.offset(memtimes.front()), p.offset(memtimes.back() + 1)};
}

LatencyMeasurement extract_latency(Cycle t_total, int n_mfma, Cycle t_memtime, Cycle t_inst) {
  if (n_mfma < 2) throw ConfigError("latency extraction needs n_mfma >= 2");
  LatencyMeasurement m{t_total, n_mfma, t_memtime, t_inst, {}};
  m.t_mfma = Rational{t_total - t_memtime - t_inst, n_mfma - 1};
  return m;
}

LatencyMeasurement extract_latency(const SimTrace& trace, int n_mfma, const CuConfig& cfg, int wf_id) {
  const auto samples = trace.samples_for(wf_id);
  if (samples.size() != 2) {
    throw MissingSamples("wavefront " + std::to_string(wf_id) + " recorded " + std::to_string(samples.size()) +
                         " s_memtime samples, expected 2");
  }
  return extract_latency(samples[1].value - samples[0].value, n_mfma, cfg.memtime_cycles, cfg.issue_cycles);
}

BenchResult run_bench(const BenchSpec& spec, const CuConfig& cfg) {
  BenchResult r;
  r.spec = spec;
  if (spec.align_timed_region) r.spec.pad_nops = aligned_pad(cfg, spec.base_address);
  r.program = generate_microbench(spec, cfg);
  const WavefrontLaunch launch{r.program, 0};
  r.trace = simulate(std::span(&launch, 1), cfg);
  r.measurement = extract_latency(r.trace, spec.n_mfma, cfg);
  return r;
}

namespace {

SweepCell run_cell(const MfmaSpec& spec, int n, const CuConfig& cfg, const LatencyModel& model,
                   const SweepOptions& opts) {
  BenchSpec b;
  b.mfma = spec;
  b.n_mfma = n;
  const bool padded = needs_padding(spec);
  if (padded && opts.misalign_padded) {
    b.pad_nops = misaligned_pad(cfg);
  } else if (opts.align == AlignPolicy::all || (opts.align == AlignPolicy::padded_only && padded)) {
    b.pad_nops = aligned_pad(cfg);
  }
  const Program p = generate_microbench(b, cfg);
  const WavefrontLaunch launch{p, 0};
  const SimTrace trace = simulate(std::span(&launch, 1), cfg, model);
  const LatencyMeasurement m = extract_latency(trace, n, cfg);
  return {spec, n, b.pad_nops, m.t_total, m.t_mfma, mce_latency(model, spec)};
}

std::vector<SweepCell> sweep(GpuModel gpu, const std::vector<MfmaSpec>& specs, NRange n, const CuConfig& base,
                             const SweepOptions& opts, bool parallel) {
  if (n.first < 2 || n.last < n.first) throw ConfigError("n range must satisfy 2 <= first <= last");
  CuConfig cfg = base;
  cfg.gpu_model = gpu;
  const LatencyModel model = make_latency_model(cfg);
  for (const auto& s : specs) (void)mce_latency(model, s);  // surface UnsupportedOnModel before forking

  const int per_spec = n.last - n.first + 1;
  const int total = static_cast<int>(specs.size()) * per_spec;
  std::vector<SweepCell> cells(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < total; ++i) {
    cells[static_cast<std::size_t>(i)] =
        run_cell(specs[static_cast<std::size_t>(i / per_spec)], n.first + i % per_spec, cfg, model, opts);
  }
  return cells;
}

}  // namespace

std::vector<SweepCell> run_sweep(GpuModel model, const std::vector<MfmaSpec>& specs, NRange n,
                                 const CuConfig& cfg, const SweepOptions& opts) {
  return sweep(model, specs, n, cfg, opts, true);
}

std::vector<SweepCell> run_sweep_serial(GpuModel model, const std::vector<MfmaSpec>& specs, NRange n,
                                        const CuConfig& cfg, const SweepOptions& opts) {
  return sweep(model, specs, n, cfg, opts, false);
}

double abs_pct_err(const SweepCell& cell) {
  const double e = static_cast<double>(cell.expected);
  return std::fabs(cell.t_mfma.to_double() - e) / e * 100.0;
}

std::string format_rational(const Rational& r) {
  std::string s = r.str();
  if (s.find('/') == std::string::npos) return s;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", r.to_double());
  return buf;
}

std::string sweep_csv(GpuModel model, const std::vector<SweepCell>& cells) {
  std::ostringstream os;
  os << "gpu_model,mnemonic,n_mfma,pad_nops,t_total,t_mfma,expected,abs_pct_err\n";
  char err[32];
  for (const auto& c : cells) {
    std::snprintf(err, sizeof err, "%.4f", abs_pct_err(c));
    os << gpu_model_name(model) << ',' << render_mnemonic(c.spec) << ',' << c.n_mfma << ',' << c.pad_nops << ','
       << c.t_total << ',' << format_rational(c.t_mfma) << ',' << c.expected << ',' << err << '\n';
  }
  return os.str();
}

}  // namespace mcesim
