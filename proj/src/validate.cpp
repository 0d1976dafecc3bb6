#include "mcesim/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>

#include "mcesim/embedded_data.hpp"
#include "mcesim/error.hpp"

namespace mcesim {

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "invalid number '" + s + "'");
  }
}

}  // namespace

Grid ReferenceTable::grid() const {
  Grid g;
  for (const auto& r : rows) g.push_back(r.values);
  return g;
}

Grid ReferenceTable::expected_grid() const {
  if (!has_expected) throw ShapeMismatch("table '" + label + "' has no Expected column");
  Grid g;
  for (const auto& r : rows) g.emplace_back(columns.size(), r.expected);
  return g;
}

std::vector<MfmaSpec> ReferenceTable::specs() const {
  std::vector<MfmaSpec> out;
  for (const auto& r : rows) out.push_back(parse_mfma_mnemonic(r.mnemonic));
  return out;
}

std::size_t ReferenceTable::column_index(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ShapeMismatch("table '" + label + "' has no column " + std::string(name));
  return static_cast<std::size_t>(it - columns.begin());
}

ReferenceTable parse_reference_table(std::string_view text) {
  ReferenceTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto words = split_ws(line);
    if (words.empty()) continue;
    if (words[0][0] == '@') {
      const std::string key = words[0].substr(1);
      words.erase(words.begin());
      if (key == "label") {
        const auto at = line.find("@label");
        std::string rest = line.substr(at + 6);
        rest.erase(0, rest.find_first_not_of(" \t"));
        rest.erase(rest.find_last_not_of(" \t\r") + 1);
        t.label = rest;
      } else if (key == "columns") {
        t.columns = words;
      } else if (key == "expected") {
        if (words.size() != 1 || (words[0] != "yes" && words[0] != "no")) {
          throw ParseError(line_no, "@expected takes yes or no");
        }
        t.has_expected = words[0] == "yes";
      } else if (key == "padded") {
        t.padded = words;
      } else {
        throw ParseError(line_no, "unknown directive @" + key);
      }
      continue;
    }
    if (t.columns.empty()) throw ParseError(line_no, "@columns must precede data rows");
    const std::size_t want = t.columns.size() + (t.has_expected ? 1 : 0) + 1;
    if (words.size() != want) {
      throw ParseError(line_no, "expected " + std::to_string(want - 1) + " values for " + words[0]);
    }
    ReferenceRow row;
    row.mnemonic = words[0];
    for (std::size_t i = 0; i < t.columns.size(); ++i) row.values.push_back(parse_double(words[i + 1], line_no));
    if (t.has_expected) row.expected = parse_double(words.back(), line_no);
    t.rows.push_back(std::move(row));
  }
  return t;
}

const ReferenceTable& builtin_table(std::string_view name) {
  static const std::vector<std::string> kNames{"mi200_hardware", "mi200_gem5", "mi300_hardware", "mi300_gem5",
                                               "mi300_gem5_scale"};
  static std::once_flag once;
  static std::vector<ReferenceTable> tables;
  std::call_once(once, [] {
    for (const auto& n : kNames) {
      const auto text = embedded_file("fixtures/" + n + ".tbl");
      if (!text) throw ConfigError("missing built-in fixture " + n);
      tables.push_back(parse_reference_table(*text));
    }
  });
  const auto it = std::find(kNames.begin(), kNames.end(), name);
  if (it == kNames.end()) throw ConfigError("unknown reference table '" + std::string(name) + "'");
  return tables[static_cast<std::size_t>(it - kNames.begin())];
}

const ReferenceTable& expected_table(GpuModel model) {
  return builtin_table(model == GpuModel::mi200 ? "mi200_hardware" : "mi300_hardware");
}

namespace {

void check_shape(const Grid& m, const Grid& r) {
  if (m.size() != r.size()) throw ShapeMismatch("grids have different row counts");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].size() != r[i].size()) throw ShapeMismatch("grids differ in row " + std::to_string(i));
  }
}

double ape(double m, double r) {
  if (r <= 0.0) throw ZeroReference("reference value must be > 0");
  return std::fabs(m - r) / r * 100.0;
}

}  // namespace

double mape(const Grid& measured, const Grid& reference) {
  check_shape(measured, reference);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    for (std::size_t j = 0; j < measured[i].size(); ++j) {
      sum += ape(measured[i][j], reference[i][j]);
      ++count;
    }
  }
  if (count == 0) throw ShapeMismatch("empty grid");
  return sum / static_cast<double>(count);
}

std::vector<double> column_mape(const Grid& measured, const Grid& reference) {
  check_shape(measured, reference);
  if (measured.empty()) throw ShapeMismatch("empty grid");
  std::vector<double> out;
  for (std::size_t j = 0; j < measured.front().size(); ++j) {
    Grid m, r;
    for (std::size_t i = 0; i < measured.size(); ++i) {
      m.push_back({measured[i].at(j)});
      r.push_back({reference[i].at(j)});
    }
    out.push_back(mape(m, r));
  }
  return out;
}

ValidationReport validate_model(GpuModel model, const CuConfig& cfg, const SweepOptions& opts) {
  const ReferenceTable& ref = expected_table(model);
  ValidationReport rep;
  rep.model = model;
  NRange n{std::stoi(ref.columns.front()), std::stoi(ref.columns.back())};
  rep.sweep = run_sweep(model, ref.specs(), n, cfg, opts);

  const std::size_t per_spec = ref.columns.size();
  Grid measured(ref.rows.size(), std::vector<double>(per_spec));
  for (std::size_t i = 0; i < rep.sweep.size(); ++i) {
    const auto& c = rep.sweep[i];
    const auto& row = ref.rows[i / per_spec];
    const double m = c.t_mfma.to_double();
    measured[i / per_spec][i % per_spec] = m;
    rep.cells.push_back({row.mnemonic, c.n_mfma, c.pad_nops, c.t_mfma, row.expected, ape(m, row.expected)});
  }
  const Grid expected = ref.expected_grid();
  rep.overall_mape = mape(measured, expected);
  const auto cols = column_mape(measured, expected);
  for (std::size_t j = 0; j < cols.size(); ++j) rep.per_n_mape[n.first + static_cast<int>(j)] = cols[j];
  rep.pass = std::all_of(rep.cells.begin(), rep.cells.end(),
                         [](const ValidationCell& c) { return c.measured == Rational{static_cast<std::int64_t>(c.reference)}; });
  return rep;
}

std::vector<WhatIfRow> whatif_sweep(GpuModel model, const std::vector<Rational>& scales, const CuConfig& cfg,
                                    const SweepOptions& opts) {
  for (const auto& s : scales) {
    if (s <= Rational{0}) throw ConfigError("scale factors must be > 0");
  }
  const auto specs = expected_table(model).specs();
  CuConfig base = cfg;
  base.mfma_scale = Rational{1};
  const auto baseline = run_sweep(model, specs, {2, 2}, base, opts);

  std::vector<WhatIfRow> rows;
  for (const auto& s : scales) {
    CuConfig scaled = cfg;
    scaled.mfma_scale = s;
    const auto cells = s == Rational{1} ? baseline : run_sweep(model, specs, {2, 2}, scaled, opts);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      rows.push_back({specs[i], s, cells[i].t_mfma, baseline[i].t_mfma, cells[i].t_mfma / baseline[i].t_mfma});
    }
  }
  return rows;
}

std::string whatif_csv(GpuModel model, const std::vector<WhatIfRow>& rows) {
  std::ostringstream os;
  os << "gpu_model,mnemonic,scale,t_mfma,baseline_t_mfma,ratio\n";
  for (const auto& r : rows) {
    os << gpu_model_name(model) << ',' << render_mnemonic(r.spec) << ',' << format_rational(r.scale) << ','
       << format_rational(r.t_mfma) << ',' << format_rational(r.baseline) << ',' << format_rational(r.ratio)
       << '\n';
  }
  return os.str();
}

double ideal_scaling_mape(const ReferenceTable& table, std::string_view base, std::string_view scaled,
                          double factor) {
  const std::size_t b = table.column_index(base);
  const std::size_t s = table.column_index(scaled);
  Grid measured, ideal;
  for (const auto& r : table.rows) {
    measured.push_back({r.values[s]});
    ideal.push_back({factor * r.values[b]});
  }
  return mape(measured, ideal);
}

FixtureStatistics fixture_statistics() {
  FixtureStatistics st;
  const auto stats = [](const ReferenceTable& sim, const ReferenceTable& hw, double& all, double& n2, double& n5) {
    all = mape(sim.grid(), hw.grid());
    const auto cols = column_mape(sim.grid(), hw.grid());
    n2 = cols.at(sim.column_index("2"));
    n5 = cols.at(sim.column_index("5"));
  };
  stats(builtin_table("mi200_gem5"), builtin_table("mi200_hardware"), st.mi200_overall, st.mi200_n2, st.mi200_n5);
  stats(builtin_table("mi300_gem5"), builtin_table("mi300_hardware"), st.mi300_overall, st.mi300_n2, st.mi300_n5);
  st.mi300_scale_doubling = ideal_scaling_mape(builtin_table("mi300_gem5_scale"), "1", "2", 2.0);
  return st;
}

std::string format_report(const ValidationReport& report) {
  std::ostringstream os;
  char buf[160];
  os << "validation against " << expected_table(report.model).label << " (Expected column)\n";
  std::snprintf(buf, sizeof buf, "%-22s %3s %4s %10s %9s %8s\n", "mfma", "n", "pad", "measured", "expected",
                "err%");
  os << buf;
  for (const auto& c : report.cells) {
    std::snprintf(buf, sizeof buf, "%-22s %3d %4d %10s %9g %8.3f\n", c.mnemonic.c_str(), c.n_mfma, c.pad_nops,
                  format_rational(c.measured).c_str(), c.reference, c.abs_pct_err);
    os << buf;
  }
  for (const auto& [n, v] : report.per_n_mape) {
    std::snprintf(buf, sizeof buf, "MAPE n=%d: %.3f%%\n", n, v);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "MAPE overall: %.3f%%\n", report.overall_mape);
  os << buf << (report.pass ? "PASS" : "FAIL") << '\n';
  return os.str();
}

}  // namespace mcesim
