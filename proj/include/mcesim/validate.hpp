#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mcesim/config.hpp"
#include "mcesim/microbench.hpp"
#include "mcesim/rational.hpp"

namespace mcesim {

using Grid = std::vector<std::vector<double>>;

struct ReferenceRow {
  std::string mnemonic;  // as written in the table, e.g. "fp32_16x16x16fp16"
  std::vector<double> values;
  double expected = 0.0;  // 0 when the table has no Expected column
};

// Published latency table, transcribed as a plain-text fixture.
struct ReferenceTable {
  std::string label;
  std::vector<std::string> columns;  // N_MFMA values ("2".."5") or scale factors ("1", "2")
  bool has_expected = false;
  std::vector<std::string> padded;   // rows that needed cache-line padding
  std::vector<ReferenceRow> rows;

  Grid grid() const;
  Grid expected_grid() const;  // Expected broadcast across every column
  std::vector<MfmaSpec> specs() const;
  std::size_t column_index(std::string_view name) const;
};

// Format: "@label ...", "@columns ...", "@expected yes|no", "@padded ...",
// then one "<mnemonic> <value>... [expected]" row per line.
ReferenceTable parse_reference_table(std::string_view text);

// Names: mi200_hardware, mi200_gem5, mi300_hardware, mi300_gem5, mi300_gem5_scale.
const ReferenceTable& builtin_table(std::string_view name);
// Hardware table whose Expected column is the timing contract for `model`.
const ReferenceTable& expected_table(GpuModel model);

// Mean of |m - r| / r * 100 over every cell. Throws ShapeMismatch, ZeroReference.
double mape(const Grid& measured, const Grid& reference);
// One MAPE per column.
std::vector<double> column_mape(const Grid& measured, const Grid& reference);

struct ValidationCell {
  std::string mnemonic;
  int n_mfma = 0;
  int pad_nops = 0;
  Rational measured;
  double reference = 0.0;
  double abs_pct_err = 0.0;
};

struct ValidationReport {
  GpuModel model = GpuModel::mi200;
  std::vector<ValidationCell> cells;
  std::map<int, double> per_n_mape;
  double overall_mape = 0.0;
  bool pass = false;  // every cell exact
  std::vector<SweepCell> sweep;
};

ValidationReport validate_model(GpuModel model, const CuConfig& cfg, const SweepOptions& opts = {});

struct WhatIfRow {
  MfmaSpec spec;
  Rational scale;
  Rational t_mfma;
  Rational baseline;  // t_mfma at scale 1
  Rational ratio;
};

// n = 2 sweep per scale, rows ordered (scale, spec). Scale 1 is always run as baseline.
std::vector<WhatIfRow> whatif_sweep(GpuModel model, const std::vector<Rational>& scales, const CuConfig& cfg,
                                    const SweepOptions& opts = {});
// gpu_model,mnemonic,scale,t_mfma,baseline_t_mfma,ratio
std::string whatif_csv(GpuModel model, const std::vector<WhatIfRow>& rows);

// MAPE of the `scaled` column against `factor` times the `base` column.
double ideal_scaling_mape(const ReferenceTable& table, std::string_view base, std::string_view scaled,
                          double factor);

// Published statistics recomputed from the shipped fixtures.
struct FixtureStatistics {
  double mi200_overall = 0, mi200_n2 = 0, mi200_n5 = 0;
  double mi300_overall = 0, mi300_n2 = 0, mi300_n5 = 0;
  double mi300_scale_doubling = 0;
};
FixtureStatistics fixture_statistics();

// Human-readable summary.
std::string format_report(const ValidationReport& report);

}  // namespace mcesim
