#pragma once

// Mini assembly dialect for MFMA timing kernels: mnemonic decoding, statement
// parsing, byte layout and instruction-cache line mapping.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mcesim {

enum class NumericType { fp64, fp32, fp16, bf16, i32, i8 };

// ISA spelling ("f32", "bf16", "i8").
std::string_view isa_token(NumericType t) noexcept;
// Table spelling ("fp32", "bf16", "i8").
std::string_view table_token(NumericType t) noexcept;
bool is_integer_type(NumericType t) noexcept;

// Output/input pairings with at least one known MFMA instruction:
// f64<-f64, f32<-f32, f32<-f16, f32<-bf16, i32<-i8.
bool is_supported_pair(NumericType out, NumericType in) noexcept;

// Shape of a V_MFMA_[out]_[M]X[N]X[K]_[B]B_[in] instruction.
struct MfmaSpec {
  NumericType out_type = NumericType::fp32;
  int m = 1;
  int n = 1;
  int k = 1;
  int blocks = 1;
  NumericType in_type = NumericType::fp32;

  friend bool operator==(const MfmaSpec&, const MfmaSpec&) = default;
};

// Accepts ISA style ("v_mfma_f32_32x32x4_2b_bf16", case-insensitive) and table
// style ("fp32_16x16x16fp16"); the block field is optional and the input type
// may be fused to K.
MfmaSpec parse_mfma_mnemonic(std::string_view text);

// Canonical lowercase form, e.g. "v_mfma_f32_16x16x4f32" or "v_mfma_f32_32x32x4_2b_bf16".
std::string render_mnemonic(const MfmaSpec& spec);

// Form used by the published tables, e.g. "fp32_16x16x16fp16".
std::string table_name(const MfmaSpec& spec);

enum class RegFile { scalar, vector, accum };

struct RegRange {
  RegFile file = RegFile::vector;
  std::uint32_t first = 0;
  std::uint32_t last = 0;

  std::uint32_t width() const noexcept { return last - first + 1; }
  bool overlaps(const RegRange& o) const noexcept {
    return file == o.file && first <= o.last && o.first <= last;
  }
  friend bool operator==(const RegRange&, const RegRange&) = default;
};

std::string render_reg(const RegRange& r);

enum class Opcode { mfma, s_memtime, s_nop, s_waitcnt, s_endpgm };

std::string_view opcode_name(Opcode op) noexcept;

// Byte size per opcode class. Hardware encodings are not modeled; only the
// relative layout matters for line-crossing effects.
struct EncodingSizes {
  std::uint32_t mfma = 8;
  std::uint32_t memtime = 8;
  std::uint32_t nop = 4;
  std::uint32_t waitcnt = 4;
  std::uint32_t endpgm = 4;

  std::uint32_t of(Opcode op) const noexcept;
  friend bool operator==(const EncodingSizes&, const EncodingSizes&) = default;
};

struct WaitCounts {
  std::optional<int> lgkmcnt;
  std::optional<int> vmcnt;
  std::optional<int> expcnt;
  std::optional<int> raw;  // bare immediate form: s_waitcnt 0

  friend bool operator==(const WaitCounts&, const WaitCounts&) = default;
};

struct Instruction {
  Opcode opcode = Opcode::s_nop;
  std::optional<MfmaSpec> mfma;
  std::vector<RegRange> dst_regs;
  std::vector<RegRange> src_regs;  // MFMA: A, B, C in that order
  std::uint32_t size_bytes = 4;
  std::size_t source_line = 0;
  int nop_count = 0;
  WaitCounts wait;

  static Instruction make_mfma(const MfmaSpec& spec, RegRange d, RegRange a, RegRange b, RegRange c);
  static Instruction make_memtime(RegRange dst);
  static Instruction make_nop(int count = 0);
  static Instruction make_waitcnt(WaitCounts w = {.lgkmcnt = 0});
  static Instruction make_endpgm();
};

std::uint32_t encode_size(const Instruction& instr, const EncodingSizes& sizes = {}) noexcept;

class Program {
 public:
  Program() = default;
  // Assigns sizes and appends S_ENDPGM when the list does not already end with one.
  explicit Program(std::vector<Instruction> instructions, std::uint64_t base_address = 0,
                   const EncodingSizes& sizes = {});

  const std::vector<Instruction>& instructions() const noexcept { return instructions_; }
  std::size_t size() const noexcept { return instructions_.size(); }
  const Instruction& operator[](std::size_t i) const { return instructions_[i]; }
  std::uint64_t base_address() const noexcept { return base_address_; }

  // Byte address of instruction i (prefix sum of sizes from base_address).
  std::uint64_t offset(std::size_t i) const { return offsets_.at(i); }
  std::uint64_t end_offset() const noexcept { return offsets_.back(); }

 private:
  std::vector<Instruction> instructions_;
  std::vector<std::uint64_t> offsets_{0};
  std::uint64_t base_address_ = 0;
};

Program parse_program(std::string_view text, std::uint64_t base_address = 0,
                      const EncodingSizes& sizes = {});

// Inverse of parse_program for everything it accepts (comments are dropped).
std::string render_program(const Program& p);
std::string render_instruction(const Instruction& instr);

struct LineEntry {
  std::size_t instruction;
  std::uint64_t line;
  friend bool operator==(const LineEntry&, const LineEntry&) = default;
};

// Lines touched by each instruction, in instruction order. An instruction that
// straddles a boundary contributes one entry per line.
std::vector<LineEntry> cacheline_layout(const Program& p, std::uint64_t line_size = 64);

// Lines spanned by [begin, end) bytes.
std::pair<std::uint64_t, std::uint64_t> line_span(std::uint64_t begin, std::uint64_t end,
                                                  std::uint64_t line_size);

}  // namespace mcesim
