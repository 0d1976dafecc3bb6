#include "mcesim/latency_model.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "mcesim/embedded_data.hpp"
#include "mcesim/error.hpp"

namespace mcesim {

std::string_view gpu_model_name(GpuModel m) noexcept { return m == GpuModel::mi200 ? "mi200" : "mi300"; }

GpuModel parse_gpu_model(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "mi200") return GpuModel::mi200;
  if (s == "mi300") return GpuModel::mi300;
  throw ConfigError("unknown GPU model '" + std::string(text) + "' (expected mi200 or mi300)");
}

LatencyModel::LatencyModel(GpuModel model, std::vector<LatencyEntry> entries, Rational scale)
    : model_(model), entries_(std::move(entries)) {
  set_scale(scale);
}

LatencyModel LatencyModel::builtin(GpuModel model, Rational scale) {
  const std::string name = std::string(gpu_model_name(model)) + ".latency";
  const auto text = embedded_file(name);
  if (!text) throw ConfigError("missing built-in latency table " + name);
  return parse(model, *text, scale);
}

LatencyModel LatencyModel::parse(GpuModel model, std::string_view text, Rational scale) {
  std::vector<LatencyEntry> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string mnemonic;
    if (!(fields >> mnemonic)) continue;
    LatencyEntry e;
    try {
      e.spec = parse_mfma_mnemonic(mnemonic);
    } catch (const Error& err) {
      throw ParseError(line_no, err.what());
    }
    if (!(fields >> e.base_cycles) || e.base_cycles < 1) {
      throw ParseError(line_no, "expected a positive cycle count after " + mnemonic);
    }
    std::string flag;
    if (fields >> flag) {
      if (flag != "provisional") throw ParseError(line_no, "unknown flag '" + flag + "'");
      e.provisional = true;
    }
    const auto dup = std::find_if(entries.begin(), entries.end(),
                                  [&](const LatencyEntry& x) { return x.spec == e.spec; });
    if (dup != entries.end()) throw ParseError(line_no, "duplicate entry for " + mnemonic);
    entries.push_back(e);
  }
  return LatencyModel(model, std::move(entries), scale);
}

const LatencyEntry* LatencyModel::find(const MfmaSpec& spec) const noexcept {
  const auto it = std::find_if(entries_.begin(), entries_.end(),
                               [&](const LatencyEntry& e) { return e.spec == spec; });
  return it == entries_.end() ? nullptr : &*it;
}

void LatencyModel::set_base(const MfmaSpec& spec, std::int64_t cycles) {
  if (cycles < 1) throw ConfigError("MFMA latency must be >= 1 cycle");
  for (auto& e : entries_) {
    if (e.spec == spec) {
      e.base_cycles = cycles;
      e.provisional = false;
      return;
    }
  }
  entries_.push_back({spec, cycles, false});
}

void LatencyModel::set_scale(Rational scale) {
  if (scale <= Rational{0}) throw ConfigError("mfma scale must be > 0, got " + scale.str());
  scale_ = scale;
}

std::int64_t mce_latency(const LatencyModel& model, const MfmaSpec& spec) {
  const LatencyEntry* e = model.find(spec);
  if (!e) {
    throw UnsupportedOnModel(render_mnemonic(spec) + " is not supported on " +
                             std::string(gpu_model_name(model.gpu_model())));
  }
  return std::max<std::int64_t>(1, (Rational{e->base_cycles} * model.scale()).round_half_up());
}

}  // namespace mcesim
