#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "mcesim/isa.hpp"
#include "mcesim/latency_model.hpp"
#include "mcesim/rational.hpp"

namespace mcesim {

// Compute-unit parameters. Defaults are the simulated baseline GPU.
struct CuConfig {
  int num_simd = 4;
  int max_wf_per_simd = 10;
  GpuModel gpu_model = GpuModel::mi200;
  Rational mfma_scale{1};
  // Accept a new MFMA every cycle instead of holding the MCE for the full latency.
  bool pipelined_mce = false;
  std::uint64_t fetch_line_bytes = 64;
  std::int64_t l1i_miss_cycles = 40;
  // Result latency of s_memtime (T_memtime).
  std::int64_t memtime_cycles = 40;
  // Cycles an issued instruction holds its wavefront's issue slot (T_inst).
  std::int64_t issue_cycles = 4;
  double clock_mhz = 1801.0;
  EncodingSizes encoding;
  // Canonical mnemonic -> base cycles, applied on top of the built-in table.
  std::map<std::string, std::int64_t> latency_overrides;
  // Parameters kept for reference but not used by the engine.
  std::map<std::string, std::string> documentation;

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

// INI text: sections [cu], [fetch], [timing], [encoding], [latency], [documentation].
CuConfig parse_config(std::string_view text);
CuConfig load_config(const std::filesystem::path& path);
std::string render_config(const CuConfig& cfg);

// Built-in table for cfg.gpu_model with overrides and cfg.mfma_scale applied.
LatencyModel make_latency_model(const CuConfig& cfg);

}  // namespace mcesim
