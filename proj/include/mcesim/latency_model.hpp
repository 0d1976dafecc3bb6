#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcesim/isa.hpp"
#include "mcesim/rational.hpp"

namespace mcesim {

enum class GpuModel { mi200, mi300 };

std::string_view gpu_model_name(GpuModel m) noexcept;  // "mi200"
GpuModel parse_gpu_model(std::string_view text);      // case-insensitive

struct LatencyEntry {
  MfmaSpec spec;
  std::int64_t base_cycles = 0;
  // Value not backed by the validation tables.
  bool provisional = false;
};

// Per-GPU lookup from MFMA shape to MCE execution cycles, with a what-if
// multiplier applied on lookup.
class LatencyModel {
 public:
  LatencyModel(GpuModel model, std::vector<LatencyEntry> entries, Rational scale = Rational{1});

  // Table shipped in data/<model>.latency.
  static LatencyModel builtin(GpuModel model, Rational scale = Rational{1});
  // One "<mnemonic> <cycles> [provisional]" per line; '#' starts a comment.
  static LatencyModel parse(GpuModel model, std::string_view text, Rational scale = Rational{1});

  GpuModel gpu_model() const noexcept { return model_; }
  const Rational& scale() const noexcept { return scale_; }
  const std::vector<LatencyEntry>& entries() const noexcept { return entries_; }

  const LatencyEntry* find(const MfmaSpec& spec) const noexcept;
  bool supports(const MfmaSpec& spec) const noexcept { return find(spec) != nullptr; }

  // Inserts or replaces the base latency of `spec`.
  void set_base(const MfmaSpec& spec, std::int64_t cycles);
  void set_scale(Rational scale);

 private:
  GpuModel model_;
  std::vector<LatencyEntry> entries_;
  Rational scale_;
};

// round_half_up(base * scale), floored at 1 cycle. Throws UnsupportedOnModel.
std::int64_t mce_latency(const LatencyModel& model, const MfmaSpec& spec);

}  // namespace mcesim
