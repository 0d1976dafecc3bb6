#include <gtest/gtest.h>

#include <random>

#include "mcesim/error.hpp"
#include "mcesim/microbench.hpp"
#include "mcesim/validate.hpp"

using namespace mcesim;

namespace {

CuConfig model_cfg(GpuModel m, Rational scale = Rational{1}) {
  CuConfig c;
  c.gpu_model = m;
  c.mfma_scale = scale;
  return c;
}

MfmaSpec spec(const char* m) { return parse_mfma_mnemonic(m); }

}  // namespace

TEST(Extract, WorkedExamples) {
  EXPECT_EQ(extract_latency(68, 4, 40, 4).t_mfma, Rational(8));
  EXPECT_EQ(extract_latency(76, 2, 40, 4).t_mfma, Rational(32));
  EXPECT_EQ(extract_latency(44, 2, 40, 4).t_mfma, Rational(0));
  EXPECT_EQ(extract_latency(69, 3, 40, 4).t_mfma, Rational(25, 2));
  EXPECT_THROW(extract_latency(68, 1, 40, 4), ConfigError);
}

TEST(Extract, NeedsExactlyTwoSamples) {
  SimTrace t;
  EXPECT_THROW(extract_latency(t, 2, CuConfig{}), MissingSamples);
  t.memtime_samples = {{0, {RegFile::scalar, 0, 1}, 10}};
  EXPECT_THROW(extract_latency(t, 2, CuConfig{}), MissingSamples);
  t.memtime_samples.push_back({1, {RegFile::scalar, 2, 3}, 90});
  EXPECT_THROW(extract_latency(t, 2, CuConfig{}), MissingSamples);
  t.memtime_samples.push_back({0, {RegFile::scalar, 2, 3}, 86});
  EXPECT_EQ(extract_latency(t, 2, CuConfig{}).t_mfma, Rational(32));
  t.memtime_samples.push_back({0, {RegFile::scalar, 4, 5}, 99});
  EXPECT_THROW(extract_latency(t, 2, CuConfig{}), MissingSamples);
}

TEST(Generator, StructureAndRoundTrip) {
  const CuConfig cfg;
  const Program p = generate_microbench({spec("fp32_16x16x16fp16"), 5, 3, false, 0}, cfg);
  ASSERT_EQ(p.size(), 3u + 3u + 5u + 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(p[i].opcode, Opcode::s_nop);
  EXPECT_EQ(p[3].opcode, Opcode::s_waitcnt);
  EXPECT_EQ(p[4].opcode, Opcode::s_memtime);
  EXPECT_EQ(p[5].opcode, Opcode::s_waitcnt);
  for (int i = 6; i < 11; ++i) {
    ASSERT_EQ(p[i].opcode, Opcode::mfma);
    EXPECT_EQ(*p[i].mfma, spec("fp32_16x16x16fp16"));
    // Chain: the accumulator is both C and D.
    EXPECT_EQ(p[i].src_regs[2], p[i].dst_regs[0]);
    EXPECT_FALSE(p[i].src_regs[0].overlaps(p[i].dst_regs[0]));
    EXPECT_FALSE(p[i].src_regs[1].overlaps(p[i].dst_regs[0]));
  }
  EXPECT_EQ(p[11].opcode, Opcode::s_memtime);
  EXPECT_EQ(p[12].opcode, Opcode::s_waitcnt);
  EXPECT_EQ(p[13].opcode, Opcode::s_endpgm);

  const Program q = parse_program(render_program(p));
  EXPECT_EQ(render_program(q), render_program(p));
  ASSERT_EQ(q.size(), p.size());
  for (std::size_t i = 0; i <= p.size(); ++i) EXPECT_EQ(q.offset(i), p.offset(i));

  const TimedRegion r = timed_region(p);
  EXPECT_EQ(r.first, 4u);
  EXPECT_EQ(r.last, 11u);
  EXPECT_EQ(r.begin_byte, 3u * 4 + 4);
  EXPECT_EQ(r.end_byte, r.begin_byte + 8 + 4 + 5 * 8 + 8);
}

TEST(Generator, RejectsShortChains) {
  EXPECT_THROW(generate_microbench({spec("fp32_4x4x1fp32"), 1, 0, false, 0}), ConfigError);
  EXPECT_THROW(generate_microbench({spec("fp32_4x4x1fp32"), 2, -1, false, 0}), ConfigError);
}

TEST(Padding, DefaultPadsAndClassification) {
  const CuConfig cfg;
  EXPECT_EQ(aligned_pad(cfg), 15);
  EXPECT_EQ(misaligned_pad(cfg), 10);
  EXPECT_TRUE(needs_padding(spec("fp32_16x16x16fp16")));
  EXPECT_TRUE(needs_padding(spec("i32_16x16x16i8")));
  EXPECT_TRUE(needs_padding(spec("fp32_4x4x4fp16")));
  EXPECT_FALSE(needs_padding(spec("fp32_4x4x1fp32")));
  EXPECT_FALSE(needs_padding(spec("fp64_16x16x4fp64")));
  EXPECT_FALSE(needs_padding(spec("v_mfma_f32_32x32x4bf16")));
}

TEST(Padding, AlignedTimedRegionStartsOnALine) {
  std::mt19937 rng(3);
  for (int iter = 0; iter < 500; ++iter) {
    CuConfig cfg;
    cfg.fetch_line_bytes = 16u << (rng() % 4);
    const std::uint64_t base = 4u * (rng() % 256);
    const Program p = generate_microbench({spec("fp32_4x4x4fp16"), 2 + static_cast<int>(rng() % 8), 0, true, base},
                                          cfg);
    EXPECT_EQ(timed_region(p).begin_byte % cfg.fetch_line_bytes, 0u);
    EXPECT_LT(aligned_pad(cfg, base), static_cast<int>(cfg.fetch_line_bytes / cfg.encoding.nop));
  }
}

TEST(Padding, MisalignmentAddsOneMiss) {
  for (GpuModel m : {GpuModel::mi200, GpuModel::mi300}) {
    const CuConfig cfg = model_cfg(m);
    for (const auto& s : expected_table(m).specs()) {
      for (int n = 2; n <= 5; ++n) {
        const auto aligned = run_bench({s, n, aligned_pad(cfg), false, 0}, cfg).measurement;
        const auto mis = run_bench({s, n, misaligned_pad(cfg), false, 0}, cfg).measurement;
        const auto bare = run_bench({s, n, 0, false, 0}, cfg).measurement;
        EXPECT_EQ(mis.t_total, aligned.t_total + cfg.l1i_miss_cycles) << render_mnemonic(s) << " n=" << n;
        EXPECT_EQ(bare.t_total, aligned.t_total);
      }
    }
  }
}

TEST(Sweep, Mi200ReproducesExpectedColumn) {
  const CuConfig cfg = model_cfg(GpuModel::mi200);
  const auto cells = run_sweep(GpuModel::mi200, expected_table(GpuModel::mi200).specs(), {}, cfg);
  ASSERT_EQ(cells.size(), 28u);
  for (const auto& c : cells) {
    EXPECT_EQ(c.t_mfma, Rational(c.expected)) << render_mnemonic(c.spec) << " n=" << c.n_mfma;
    EXPECT_EQ(c.pad_nops, needs_padding(c.spec) ? 15 : 0);
    EXPECT_EQ(abs_pct_err(c), 0.0);
  }
  EXPECT_EQ(cells[0].n_mfma, 2);
  EXPECT_EQ(cells[3].n_mfma, 5);
  EXPECT_EQ(cells[4].spec, cells[7].spec);
}

TEST(Sweep, Mi300ReproducesExpectedColumnAndScalesExactly) {
  const auto specs = expected_table(GpuModel::mi300).specs();
  const auto one = run_sweep(GpuModel::mi300, specs, {}, model_cfg(GpuModel::mi300));
  const auto two = run_sweep(GpuModel::mi300, specs, {}, model_cfg(GpuModel::mi300, Rational(2)));
  ASSERT_EQ(one.size(), 24u);
  ASSERT_EQ(two.size(), 24u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].t_mfma, Rational(one[i].expected));
    EXPECT_EQ(two[i].t_mfma, Rational(2) * one[i].t_mfma);
  }
}

TEST(Sweep, UnsupportedSpecIsRejectedUpFront) {
  EXPECT_THROW(run_sweep(GpuModel::mi300, {spec("i32_16x16x16i8")}, {}, CuConfig{}), UnsupportedOnModel);
  EXPECT_THROW(run_sweep(GpuModel::mi300, {spec("fp32_4x4x1fp32")}, {3, 2}, CuConfig{}), ConfigError);
}

TEST(Sweep, ParallelEqualsSerial) {
  for (GpuModel m : {GpuModel::mi200, GpuModel::mi300}) {
    const auto specs = expected_table(m).specs();
    for (const auto& opts : {SweepOptions{}, SweepOptions{AlignPolicy::none, false},
                             SweepOptions{AlignPolicy::all, false}, SweepOptions{AlignPolicy::padded_only, true}}) {
      const auto a = run_sweep(m, specs, {2, 16}, model_cfg(m), opts);
      const auto b = run_sweep_serial(m, specs, {2, 16}, model_cfg(m), opts);
      EXPECT_EQ(sweep_csv(m, a), sweep_csv(m, b));
    }
  }
}

TEST(Sweep, CsvLayout) {
  const auto cells = run_sweep(GpuModel::mi200, {spec("fp32_4x4x1fp32")}, {2, 2}, model_cfg(GpuModel::mi200));
  EXPECT_EQ(sweep_csv(GpuModel::mi200, cells),
            "gpu_model,mnemonic,n_mfma,pad_nops,t_total,t_mfma,expected,abs_pct_err\n"
            "mi200,v_mfma_f32_4x4x1f32,2,0,52,8,8,0.0000\n");
  EXPECT_EQ(format_rational(Rational(25, 2)), "12.5");
  EXPECT_EQ(format_rational(Rational(22, 3)), "7.333333");
}

TEST(Sweep, LongChainsStillRecoverLatency) {
  // Past one line the timed region takes extra misses, which shows up as
  // latency above the table value.
  const CuConfig cfg = model_cfg(GpuModel::mi200);
  const auto r = run_bench({spec("fp32_4x4x1fp32"), 6, 0, true, 0}, cfg).measurement;
  EXPECT_EQ(r.t_total, 40 + 4 + 5 * 8 + 40);
  EXPECT_EQ(r.t_mfma, Rational(8 * 5 + 40, 5));
}
