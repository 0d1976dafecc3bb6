#include "mcesim/mfma_func.hpp"

#include <cassert>
#include <cstdint>
#include <limits>

#include "mcesim/error.hpp"
#include "mcesim/numeric.hpp"

namespace mcesim {

BlockedMatrixOperand::BlockedMatrixOperand(NumericType dtype, int blocks, int rows, int cols)
    : dtype_(dtype), blocks_(blocks), rows_(rows), cols_(cols) {
  if (blocks < 1 || rows < 1 || cols < 1) throw ShapeMismatch("operand dimensions must be >= 1");
  data_.assign(static_cast<std::size_t>(blocks) * rows * cols, 0.0);
}

BlockedMatrixOperand::BlockedMatrixOperand(NumericType dtype, int blocks, int rows, int cols,
                                           std::vector<double> values)
    : BlockedMatrixOperand(dtype, blocks, rows, cols) {
  if (values.size() != data_.size()) {
    throw ShapeMismatch("operand holds " + std::to_string(values.size()) + " values, expected " +
                        std::to_string(data_.size()));
  }
  for (auto& v : values) v = narrow(v, dtype);
  data_ = std::move(values);
}

void BlockedMatrixOperand::set(int block, int row, int col, double v) {
  data_.at(index(block, row, col)) = narrow(v, dtype_);
}

namespace {

void check_operands(const MfmaSpec& spec, const BlockedMatrixOperand& a, const BlockedMatrixOperand& b,
                    const BlockedMatrixOperand& c) {
  if (!is_supported_pair(spec.out_type, spec.in_type)) {
    throw UnsupportedPairError("unsupported MFMA pairing in " + render_mnemonic(spec));
  }
  if (a.dtype() != spec.in_type || b.dtype() != spec.in_type) {
    throw TypeMismatch("A and B must be " + std::string(isa_token(spec.in_type)) + " for " +
                       render_mnemonic(spec));
  }
  if (c.dtype() != spec.out_type) {
    throw TypeMismatch("C must be " + std::string(isa_token(spec.out_type)) + " for " + render_mnemonic(spec));
  }
  const auto shape_ok = [&](const BlockedMatrixOperand& x, int r, int cl) {
    return x.blocks() == spec.blocks && x.rows() == r && x.cols() == cl;
  };
  if (!shape_ok(a, spec.m, spec.k) || !shape_ok(b, spec.k, spec.n) || !shape_ok(c, spec.m, spec.n)) {
    throw ShapeMismatch("operand shapes do not match " + render_mnemonic(spec));
  }
}

template <typename Acc>
double element(const MfmaSpec& s, const BlockedMatrixOperand& a, const BlockedMatrixOperand& b,
               const BlockedMatrixOperand& c, int blk, int i, int j) {
  Acc acc = 0;
  for (int kk = 0; kk < s.k; ++kk) {
    const Acc prod = static_cast<Acc>(a.at(blk, i, kk)) * static_cast<Acc>(b.at(blk, kk, j));
    acc = acc + prod;
  }
  acc = acc + static_cast<Acc>(c.at(blk, i, j));
  if constexpr (std::is_same_v<Acc, std::int64_t>) {
    assert(acc >= std::numeric_limits<std::int32_t>::min() && acc <= std::numeric_limits<std::int32_t>::max());
    return static_cast<double>(static_cast<std::int32_t>(acc));
  } else {
    return static_cast<double>(acc);
  }
}

template <typename Acc>
void fill_rows(const MfmaSpec& s, const BlockedMatrixOperand& a, const BlockedMatrixOperand& b,
               const BlockedMatrixOperand& c, std::vector<double>& out, bool parallel) {
  const int rows = s.blocks * s.m;
#pragma omp parallel for schedule(static) if (parallel)
  for (int r = 0; r < rows; ++r) {
    const int blk = r / s.m;
    const int i = r % s.m;
    double* row = out.data() + static_cast<std::size_t>(r) * s.n;
    for (int j = 0; j < s.n; ++j) row[j] = element<Acc>(s, a, b, c, blk, i, j);
  }
}

BlockedMatrixOperand execute(const MfmaSpec& spec, const BlockedMatrixOperand& a, const BlockedMatrixOperand& b,
                             const BlockedMatrixOperand& c, bool parallel) {
  check_operands(spec, a, b, c);
  std::vector<double> out(static_cast<std::size_t>(spec.blocks) * spec.m * spec.n);
  // Thread start-up dominates below a few thousand MACs.
  parallel = parallel && static_cast<long>(spec.blocks) * spec.m * spec.n * spec.k >= 4096;
  switch (spec.out_type) {
    case NumericType::fp64: fill_rows<double>(spec, a, b, c, out, parallel); break;
    case NumericType::fp32: fill_rows<float>(spec, a, b, c, out, parallel); break;
    case NumericType::i32: fill_rows<std::int64_t>(spec, a, b, c, out, parallel); break;
    default: throw UnsupportedPairError("unsupported output type");
  }
  return {spec.out_type, spec.blocks, spec.m, spec.n, std::move(out)};
}

}  // namespace

BlockedMatrixOperand mfma_execute(const MfmaSpec& spec, const BlockedMatrixOperand& a,
                                  const BlockedMatrixOperand& b, const BlockedMatrixOperand& c) {
  return execute(spec, a, b, c, true);
}

BlockedMatrixOperand mfma_execute_serial(const MfmaSpec& spec, const BlockedMatrixOperand& a,
                                         const BlockedMatrixOperand& b, const BlockedMatrixOperand& c) {
  return execute(spec, a, b, c, false);
}

}  // namespace mcesim
