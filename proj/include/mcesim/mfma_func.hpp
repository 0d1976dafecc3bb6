#pragma once

// Value-level semantics of blocked MFMA operations: D_i = C_i + A_i * B_i.
//
// Evaluation order is fixed so floating results are reproducible: for every
// output element the K products are summed in ascending k starting from zero,
// in output precision, and C is added last. Products are rounded to the output
// precision before accumulation (no fused multiply-add).

#include <cstddef>
#include <span>
#include <vector>

#include "mcesim/isa.hpp"

namespace mcesim {

class BlockedMatrixOperand {
 public:
  BlockedMatrixOperand() = default;
  // Zero-filled.
  BlockedMatrixOperand(NumericType dtype, int blocks, int rows, int cols);
  // Narrows every float value to `dtype` (round to nearest even); integer
  // values must already be in range.
  BlockedMatrixOperand(NumericType dtype, int blocks, int rows, int cols, std::vector<double> values);

  NumericType dtype() const noexcept { return dtype_; }
  int blocks() const noexcept { return blocks_; }
  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  double at(int block, int row, int col) const { return data_[index(block, row, col)]; }
  void set(int block, int row, int col, double v);

  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const BlockedMatrixOperand&, const BlockedMatrixOperand&) = default;

 private:
  std::size_t index(int block, int row, int col) const noexcept {
    return (static_cast<std::size_t>(block) * rows_ + row) * cols_ + col;
  }

  NumericType dtype_ = NumericType::fp32;
  int blocks_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// OpenMP-parallel over (block, row).
BlockedMatrixOperand mfma_execute(const MfmaSpec& spec, const BlockedMatrixOperand& a,
                                  const BlockedMatrixOperand& b, const BlockedMatrixOperand& c);

// Single-threaded reference with the same per-element evaluation order.
BlockedMatrixOperand mfma_execute_serial(const MfmaSpec& spec, const BlockedMatrixOperand& a,
                                         const BlockedMatrixOperand& b, const BlockedMatrixOperand& c);

}  // namespace mcesim
