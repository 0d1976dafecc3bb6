// mcesim: command-line driver for the MFMA timing model.
//
//   mcesim sim kernel.s            simulate a mini-assembly program
//   mcesim bench --mnemonic ...    generate and time one microbenchmark
//   mcesim sweep                   grid over the validation specs and N_MFMA
//   mcesim validate                compare against the Expected latencies
//   mcesim whatif --mfma-scale 2   latency scaling sweep
//
// Exit codes: 0 pass, 1 validation failure, 2 usage or input error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "mcesim/config.hpp"
#include "mcesim/error.hpp"
#include "mcesim/isa.hpp"
#include "mcesim/microbench.hpp"
#include "mcesim/timing.hpp"
#include "mcesim/validate.hpp"

using namespace mcesim;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::string gpu_model;
  std::string mfma_scale;
  std::string config;
  std::string out;
  bool no_align = false;
};

CuConfig resolve_config(const Common& c) {
  CuConfig cfg = c.config.empty() ? CuConfig{} : load_config(c.config);
  if (!c.gpu_model.empty()) cfg.gpu_model = parse_gpu_model(c.gpu_model);
  if (!c.mfma_scale.empty()) cfg.mfma_scale = Rational::parse(c.mfma_scale);
  cfg.validate();
  return cfg;
}

void emit(const Common& c, const std::string& csv) {
  if (c.out.empty()) {
    std::cout << csv;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + c.out);
  f << csv;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepOptions sweep_options(const Common& c) {
  SweepOptions o;
  if (c.no_align) o.align = AlignPolicy::none;
  return o;
}

void warn_provisional(const CuConfig& cfg, const MfmaSpec& spec) {
  const auto model = make_latency_model(cfg);
  if (const auto* e = model.find(spec); e && e->provisional) {
    std::cerr << "warning: latency of " << render_mnemonic(spec) << " on " << gpu_model_name(cfg.gpu_model)
              << " is provisional (" << e->base_cycles << " cycles)\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix core (MFMA) timing model of one GPU compute unit"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--gpu-model", common.gpu_model, "mi200 or mi300")->check(CLI::IsMember({"mi200", "mi300"}, CLI::ignore_case));
  app.add_option("--mfma-scale", common.mfma_scale, "MFMA latency multiplier (e.g. 2, 0.5, 3/2)");
  app.add_option("--config", common.config, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", common.out, "write CSV output to this file instead of stdout");
  app.add_flag("--no-align", common.no_align, "do not pad benchmarks to a fetch-line boundary");

  auto* sim = app.add_subcommand("sim", "simulate a mini-assembly program");
  std::string sim_file;
  int sim_wavefronts = 1;
  bool sim_same_simd = false;
  sim->add_option("program", sim_file, "assembly file")->required()->check(CLI::ExistingFile);
  sim->add_option("--wavefronts", sim_wavefronts, "copies of the program to launch")->check(CLI::PositiveNumber);
  sim->add_flag("--same-simd", sim_same_simd, "place every wavefront on SIMD 0 instead of round-robin");

  auto* bench = app.add_subcommand("bench", "generate and time one MFMA microbenchmark");
  std::string bench_mnemonic;
  int bench_n = 4;
  std::optional<int> bench_pad;
  std::string bench_dump;
  std::string bench_trace;
  bench->add_option("--mnemonic", bench_mnemonic, "MFMA mnemonic, e.g. v_mfma_f32_4x4x1f32")->required();
  bench->add_option("--nmfma", bench_n, "dependent MFMAs in the timed region")->check(CLI::Range(2, 1 << 20));
  bench->add_option("--pad", bench_pad, "explicit s_nop padding (disables alignment)")->check(CLI::NonNegativeNumber);
  bench->add_option("--dump-asm", bench_dump, "write the generated program here");
  bench->add_option("--trace", bench_trace, "write the instruction trace CSV here");

  auto* sweep = app.add_subcommand("sweep", "time every validation spec over a range of N_MFMA");
  std::optional<int> sweep_n;
  int sweep_min = 2, sweep_max = 5;
  sweep->add_option("--nmfma", sweep_n, "single N_MFMA instead of a range")->check(CLI::Range(2, 1 << 20));
  sweep->add_option("--nmfma-min", sweep_min, "first N_MFMA")->check(CLI::Range(2, 1 << 20));
  sweep->add_option("--nmfma-max", sweep_max, "last N_MFMA")->check(CLI::Range(2, 1 << 20));

  auto* validate = app.add_subcommand("validate", "check measured latencies against the Expected column");
  bool misalign = false;
  validate->add_flag("--misalign-padded", misalign, "force a fetch-line crossing into fp16/i8 benches");

  auto* whatif = app.add_subcommand("whatif", "scale MFMA latency and compare with the scale-1 baseline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    CuConfig cfg = resolve_config(common);

    if (*sim) {
      const Program prog = parse_program(read_file(sim_file), 0, cfg.encoding);
      std::vector<WavefrontLaunch> launches;
      for (int i = 0; i < sim_wavefronts; ++i) launches.push_back({prog, sim_same_simd ? 0 : i % cfg.num_simd});
      const SimTrace trace = simulate(launches, cfg);
      emit(common, trace.to_csv());
      std::ostream& info = common.out.empty() ? std::cerr : std::cout;
      info << "total_cycles " << trace.total_cycles << '\n';
      for (int wf = 0; wf < sim_wavefronts; ++wf) {
        const auto s = trace.samples_for(wf);
        if (s.size() >= 2) info << "wf " << wf << " memtime window " << s.back().value - s.front().value << '\n';
      }
      return 0;
    }

    if (*bench) {
      BenchSpec spec;
      spec.mfma = parse_mfma_mnemonic(bench_mnemonic);
      spec.n_mfma = bench_n;
      if (bench_pad) {
        spec.pad_nops = *bench_pad;
      } else {
        spec.align_timed_region = !common.no_align && needs_padding(spec.mfma);
      }
      warn_provisional(cfg, spec.mfma);
      const BenchResult r = run_bench(spec, cfg);
      if (!bench_dump.empty()) {
        std::ofstream f(bench_dump, std::ios::binary);
        f << render_program(r.program);
      }
      if (!bench_trace.empty()) {
        std::ofstream f(bench_trace, std::ios::binary);
        f << r.trace.to_csv();
      }
      const LatencyModel model = make_latency_model(cfg);
      SweepCell cell{spec.mfma, spec.n_mfma, r.spec.pad_nops, r.measurement.t_total, r.measurement.t_mfma,
                     mce_latency(model, spec.mfma)};
      emit(common, sweep_csv(cfg.gpu_model, {cell}));
      return 0;
    }

    if (*sweep) {
      NRange n{sweep_min, sweep_max};
      if (sweep_n) n = {*sweep_n, *sweep_n};
      if (n.last < n.first) throw ConfigError("--nmfma-max must be >= --nmfma-min");
      const auto cells = run_sweep(cfg.gpu_model, expected_table(cfg.gpu_model).specs(), n, cfg, sweep_options(common));
      emit(common, sweep_csv(cfg.gpu_model, cells));
      return 0;
    }

    if (*validate) {
      SweepOptions opts = sweep_options(common);
      opts.misalign_padded = misalign;
      const ValidationReport rep = validate_model(cfg.gpu_model, cfg, opts);
      if (!common.out.empty()) emit(common, sweep_csv(cfg.gpu_model, rep.sweep));
      std::cout << format_report(rep);

      const FixtureStatistics st = fixture_statistics();
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "published tables: MI200 simulator vs hardware MAPE %.2f%% (n=2 %.2f%%, n=5 %.2f%%); "
                    "MI300 %.2f%% (n=2 %.2f%%, n=5 %.2f%%); MI300 scale-2 vs ideal doubling %.2f%%\n",
                    st.mi200_overall, st.mi200_n2, st.mi200_n5, st.mi300_overall, st.mi300_n2, st.mi300_n5,
                    st.mi300_scale_doubling);
      std::cout << buf;
      return rep.pass ? 0 : kExitFail;
    }

    if (*whatif) {
      std::set<Rational> scales{Rational{1}, cfg.mfma_scale};
      CuConfig base = cfg;
      const auto rows = whatif_sweep(cfg.gpu_model, {scales.begin(), scales.end()}, base, sweep_options(common));
      emit(common, whatif_csv(cfg.gpu_model, rows));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
