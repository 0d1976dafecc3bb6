#include "mcesim/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <sstream>

#include "mcesim/error.hpp"

namespace mcesim {

namespace pt = boost::property_tree;

namespace {

template <typename T>
T get_value(const pt::ptree& node, const std::string& key) {
  try {
    return node.get_value<T>();
  } catch (const pt::ptree_error&) {
    throw ConfigError("invalid value '" + node.data() + "' for " + key);
  }
}

bool get_bool(const pt::ptree& node, const std::string& key) {
  const std::string v = node.data();
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("invalid boolean '" + v + "' for " + key);
}

std::uint32_t get_size(const pt::ptree& node, const std::string& key) {
  const auto v = get_value<std::uint32_t>(node, key);
  if (v != 4 && v != 8) throw ConfigError(key + " must be 4 or 8 bytes");
  return v;
}

}  // namespace

void CuConfig::validate() const {
  if (num_simd < 1) throw ConfigError("num_simd must be >= 1");
  if (max_wf_per_simd < 1) throw ConfigError("max_wf_per_simd must be >= 1");
  if (mfma_scale <= Rational{0}) throw ConfigError("mfma_scale must be > 0");
  if (fetch_line_bytes == 0 || (fetch_line_bytes & (fetch_line_bytes - 1)) != 0) {
    throw ConfigError("fetch line size must be a power of two");
  }
  if (l1i_miss_cycles < 1) throw ConfigError("l1i_miss_cycles must be >= 1");
  if (memtime_cycles < 1) throw ConfigError("memtime_cycles must be >= 1");
  if (issue_cycles < 0) throw ConfigError("issue_cycles must be >= 0");
  for (const auto& [name, cycles] : latency_overrides) {
    if (cycles < 1) throw ConfigError("latency override for " + name + " must be >= 1");
  }
}

CuConfig parse_config(std::string_view text) {
  pt::ptree root;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }

  CuConfig cfg;
  for (const auto& [section, body] : root) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      if (section == "cu") {
        if (key == "gpu_model") cfg.gpu_model = parse_gpu_model(node.data());
        else if (key == "num_simd") cfg.num_simd = get_value<int>(node, full);
        else if (key == "max_wf_per_simd") cfg.max_wf_per_simd = get_value<int>(node, full);
        else if (key == "mfma_scale") cfg.mfma_scale = Rational::parse(node.data());
        else if (key == "pipelined_mce") cfg.pipelined_mce = get_bool(node, full);
        else if (key == "clock_mhz") cfg.clock_mhz = get_value<double>(node, full);
        else throw ConfigError("unknown key " + full);
      } else if (section == "fetch") {
        if (key == "line_bytes") cfg.fetch_line_bytes = get_value<std::uint64_t>(node, full);
        else if (key == "l1i_miss_cycles") cfg.l1i_miss_cycles = get_value<std::int64_t>(node, full);
        else throw ConfigError("unknown key " + full);
      } else if (section == "timing") {
        if (key == "memtime_cycles") cfg.memtime_cycles = get_value<std::int64_t>(node, full);
        else if (key == "issue_cycles") cfg.issue_cycles = get_value<std::int64_t>(node, full);
        else throw ConfigError("unknown key " + full);
      } else if (section == "encoding") {
        if (key == "mfma") cfg.encoding.mfma = get_size(node, full);
        else if (key == "memtime") cfg.encoding.memtime = get_size(node, full);
        else if (key == "nop") cfg.encoding.nop = get_size(node, full);
        else if (key == "waitcnt") cfg.encoding.waitcnt = get_size(node, full);
        else if (key == "endpgm") cfg.encoding.endpgm = get_size(node, full);
        else throw ConfigError("unknown key " + full);
      } else if (section == "latency") {
        const MfmaSpec spec = parse_mfma_mnemonic(key);
        cfg.latency_overrides[render_mnemonic(spec)] = get_value<std::int64_t>(node, full);
      } else if (section == "documentation") {
        cfg.documentation[key] = node.data();
      } else {
        throw ConfigError("unknown section [" + section + "]");
      }
    }
  }
  cfg.validate();
  return cfg;
}

CuConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string render_config(const CuConfig& cfg) {
  std::ostringstream os;
  os << "[cu]\n"
     << "gpu_model = " << gpu_model_name(cfg.gpu_model) << '\n'
     << "num_simd = " << cfg.num_simd << '\n'
     << "max_wf_per_simd = " << cfg.max_wf_per_simd << '\n'
     << "mfma_scale = " << cfg.mfma_scale.str() << '\n'
     << "pipelined_mce = " << (cfg.pipelined_mce ? "true" : "false") << '\n'
     << "clock_mhz = " << cfg.clock_mhz << "\n\n"
     << "[fetch]\n"
     << "line_bytes = " << cfg.fetch_line_bytes << '\n'
     << "l1i_miss_cycles = " << cfg.l1i_miss_cycles << "\n\n"
     << "[timing]\n"
     << "memtime_cycles = " << cfg.memtime_cycles << '\n'
     << "issue_cycles = " << cfg.issue_cycles << "\n\n"
     << "[encoding]\n"
     << "mfma = " << cfg.encoding.mfma << '\n'
     << "memtime = " << cfg.encoding.memtime << '\n'
     << "nop = " << cfg.encoding.nop << '\n'
     << "waitcnt = " << cfg.encoding.waitcnt << '\n'
     << "endpgm = " << cfg.encoding.endpgm << "\n\n"
     << "[latency]\n";
  for (const auto& [name, cycles] : cfg.latency_overrides) os << name << " = " << cycles << '\n';
  os << "\n[documentation]\n";
  for (const auto& [key, value] : cfg.documentation) os << key << " = " << value << '\n';
  return os.str();
}

LatencyModel make_latency_model(const CuConfig& cfg) {
  LatencyModel model = LatencyModel::builtin(cfg.gpu_model, cfg.mfma_scale);
  for (const auto& [name, cycles] : cfg.latency_overrides) model.set_base(parse_mfma_mnemonic(name), cycles);
  return model;
}

}  // namespace mcesim
