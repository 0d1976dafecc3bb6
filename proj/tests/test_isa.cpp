#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "mcesim/error.hpp"
#include "mcesim/isa.hpp"

using namespace mcesim;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::vector<std::string> kTableMnemonics{
    "fp64_16x16x4fp64", "fp32_4x4x1fp32", "fp32_16x16x4fp32", "fp32_16x16x16fp16",
    "i32_16x16x16i8",   "fp64_4x4x4fp64", "fp32_4x4x4fp16",
};

}  // namespace

TEST(Mnemonic, DecodesChainInstruction) {
  const MfmaSpec s = parse_mfma_mnemonic("v_mfma_f32_4x4x1f32");
  EXPECT_EQ(s, (MfmaSpec{NumericType::fp32, 4, 4, 1, 1, NumericType::fp32}));
}

TEST(Mnemonic, DecodesTwoBlockBf16) {
  const MfmaSpec s = parse_mfma_mnemonic("v_mfma_f32_32x32x4_2b_bf16");
  EXPECT_EQ(s, (MfmaSpec{NumericType::fp32, 32, 32, 4, 2, NumericType::bf16}));
  EXPECT_EQ(render_mnemonic(s), "v_mfma_f32_32x32x4_2b_bf16");
}

TEST(Mnemonic, DecodesInt8) {
  EXPECT_EQ(parse_mfma_mnemonic("v_mfma_i32_16x16x16i8"),
            (MfmaSpec{NumericType::i32, 16, 16, 16, 1, NumericType::i8}));
}

TEST(Mnemonic, AcceptsTableStyleAndCase) {
  EXPECT_EQ(parse_mfma_mnemonic("fp32_16x16x16fp16"), parse_mfma_mnemonic("v_mfma_f32_16x16x16f16"));
  EXPECT_EQ(parse_mfma_mnemonic("V_MFMA_F32_16X16X16_F16"), parse_mfma_mnemonic("v_mfma_f32_16x16x16f16"));
  EXPECT_EQ(parse_mfma_mnemonic("v_mfma_f32_32x32x4_bf16"), parse_mfma_mnemonic("v_mfma_f32_32x32x4bf16"));
}

TEST(Mnemonic, ExplicitSingleBlockNormalizes) {
  const MfmaSpec s = parse_mfma_mnemonic("v_mfma_f64_16x16x4_1b_f64");
  EXPECT_EQ(s.blocks, 1);
  EXPECT_EQ(render_mnemonic(s), "v_mfma_f64_16x16x4f64");
}

TEST(Mnemonic, CanonicalRender) {
  EXPECT_EQ(render_mnemonic(parse_mfma_mnemonic("fp32_16x16x4fp32")), "v_mfma_f32_16x16x4f32");
  EXPECT_EQ(table_name(parse_mfma_mnemonic("v_mfma_f32_16x16x16f16")), "fp32_16x16x16fp16");
}

TEST(Mnemonic, GprIdxVariantsHaveTheirOwnError) {
  EXPECT_THROW(parse_mfma_mnemonic("v_mfma_fp32_32x32x1fp32"), GprIdxUnsupported);
  EXPECT_THROW(parse_mfma_mnemonic("v_mfma_fp32_32x32x8fp16"), GprIdxUnsupported);
  EXPECT_THROW(parse_mfma_mnemonic("v_mfma_f32_32x32x1_2b_f32"), GprIdxUnsupported);
}

TEST(Mnemonic, RejectsUnsupportedPairings) {
  EXPECT_THROW(parse_mfma_mnemonic("v_mfma_f64_4x4x4f32"), UnsupportedPairError);
  EXPECT_THROW(parse_mfma_mnemonic("v_mfma_i32_16x16x16f16"), UnsupportedPairError);
  EXPECT_THROW(parse_mfma_mnemonic("v_mfma_f32_16x16x16i8"), UnsupportedPairError);
}

TEST(Mnemonic, RejectsMalformedText) {
  for (const char* bad : {"v_mfma_", "v_mfma_f32", "v_mfma_f32_4x4f32", "v_mfma_f32_0x4x1f32",
                          "v_mfma_q32_4x4x1f32", "v_mfma_f32_4x4x1f32_extra", "v_mfma_f32_4x4x1_2f32",
                          "v_mfma_f32_4x4x1_0b_f32", "v_mfma_f32_4x4x1"}) {
    EXPECT_THROW(parse_mfma_mnemonic(bad), MnemonicError) << bad;
  }
}

TEST(Mnemonic, RoundTripsEveryTableSpec) {
  for (const auto& m : kTableMnemonics) {
    const MfmaSpec s = parse_mfma_mnemonic(m);
    EXPECT_EQ(parse_mfma_mnemonic(render_mnemonic(s)), s) << m;
    EXPECT_EQ(parse_mfma_mnemonic(table_name(s)), s) << m;
  }
}

TEST(Mnemonic, RoundTripPropertyOverRandomShapes) {
  std::mt19937 rng(7);
  const std::pair<NumericType, NumericType> pairs[] = {
      {NumericType::fp64, NumericType::fp64}, {NumericType::fp32, NumericType::fp32},
      {NumericType::fp32, NumericType::fp16}, {NumericType::fp32, NumericType::bf16},
      {NumericType::i32, NumericType::i8}};
  std::uniform_int_distribution<int> dim(1, 64), blk(1, 16), pick(0, 4);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto [out, in] = pairs[pick(rng)];
    MfmaSpec s{out, dim(rng), dim(rng), dim(rng), blk(rng), in};
    MfmaSpec parsed;
    try {
      parsed = parse_mfma_mnemonic(render_mnemonic(s));
    } catch (const GprIdxUnsupported&) {
      continue;
    }
    ASSERT_EQ(parsed, s) << render_mnemonic(s);
    ++checked;
  }
  EXPECT_GT(checked, 1900);
}

TEST(Program, SingleStatement) {
  const Program p = parse_program("s_memtime s[0:1]");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].opcode, Opcode::s_memtime);
  ASSERT_EQ(p[0].dst_regs.size(), 1u);
  EXPECT_EQ(p[0].dst_regs[0], (RegRange{RegFile::scalar, 0, 1}));
  EXPECT_EQ(p[0].source_line, 1u);
  EXPECT_EQ(p[1].opcode, Opcode::s_endpgm);
}

TEST(Program, ChainKernelBody) {
  const Program p = parse_program(read_text(MCESIM_TEST_DIR "/chain_4x4x1f32.s"));
  ASSERT_EQ(p.size(), 10u);  // 9 statements + appended s_endpgm
  int mfma = 0, memtime = 0, waitcnt = 0;
  for (const auto& i : p.instructions()) {
    mfma += i.opcode == Opcode::mfma;
    memtime += i.opcode == Opcode::s_memtime;
    waitcnt += i.opcode == Opcode::s_waitcnt;
  }
  EXPECT_EQ(mfma, 4);
  EXPECT_EQ(memtime, 2);
  EXPECT_EQ(waitcnt, 3);
  EXPECT_EQ(p.instructions().back().opcode, Opcode::s_endpgm);
  EXPECT_EQ(p[0].wait, (WaitCounts{.lgkmcnt = 0, .vmcnt = 0}));
  EXPECT_EQ(p[3].source_line, 5u);
  EXPECT_EQ(p[3].src_regs.at(2), p[3].dst_regs.at(0));
}

TEST(Program, RejectsUnknownOpcodeWithLine) {
  try {
    parse_program("v_bogus v0, v1");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(Program, ErrorsNameTheOffendingLine) {
  const std::pair<const char*, std::size_t> cases[] = {
      {"s_nop 0\n\ns_memtime v[0:1]\n", 3},                       // wrong register file
      {"s_nop 0\ns_memtime s[0:2]\n", 2},                          // not a 64-bit pair
      {"v_mfma_f32_4x4x1f32 v[0:3], v4, v5\n", 1},                 // missing operand
      {"v_mfma_f32_4x4x1f32 v[0:3], s4, v5, v[0:3]\n", 1},         // scalar MFMA operand
      {"# c\nv_mfma_f32_4x4x1f32 v[3:0], v4, v5, v[0:3]\n", 2},   // reversed range
      {"s_waitcnt foocnt(0)\n", 1},
      {"s_endpgm 3\n", 1},
      {"s_nop 0\ns_nop 0\nv_mfma_fp32_32x32x1fp32 v[0:15], v0, v1, v[0:15]\n", 3},
  };
  for (const auto& [text, line] : cases) {
    try {
      parse_program(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << text;
    }
  }
}

TEST(Program, CommentsAndBlankLinesAreNotStatements) {
  const Program p = parse_program("; header\n\n  s_nop 3 # pad\n// x\ns_endpgm\n");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].nop_count, 3);
  EXPECT_EQ(p[0].source_line, 3u);
  EXPECT_EQ(p[1].source_line, 5u);
}

TEST(Program, RenderRoundTrips) {
  const Program p = parse_program(read_text(MCESIM_TEST_DIR "/chain_4x4x1f32.s") + "s_nop 2\ns_waitcnt 0\n");
  const Program q = parse_program(render_program(p));
  ASSERT_EQ(q.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(render_instruction(q[i]), render_instruction(p[i]));
    EXPECT_EQ(q[i].mfma, p[i].mfma);
    EXPECT_EQ(q[i].dst_regs, p[i].dst_regs);
    EXPECT_EQ(q[i].src_regs, p[i].src_regs);
    EXPECT_EQ(q[i].wait, p[i].wait);
  }
}

TEST(Encoding, FixedSizes) {
  EXPECT_EQ(encode_size(Instruction::make_mfma({}, {}, {}, {}, {})), 8u);
  EXPECT_EQ(encode_size(Instruction::make_memtime({RegFile::scalar, 0, 1})), 8u);
  EXPECT_EQ(encode_size(Instruction::make_nop()), 4u);
  EXPECT_EQ(encode_size(Instruction::make_waitcnt()), 4u);
  EXPECT_EQ(encode_size(Instruction::make_endpgm()), 4u);
}

TEST(Encoding, OffsetsArePrefixSums) {
  const Program p = parse_program(read_text(MCESIM_TEST_DIR "/chain_4x4x1f32.s"), 100);
  std::uint64_t at = 100;
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(p.offset(i), at);
    at += p[i].size_bytes;
  }
  EXPECT_EQ(p.end_offset(), at);
}

namespace {

Program mfma_run(int count) {
  std::vector<Instruction> v;
  const MfmaSpec s = parse_mfma_mnemonic("v_mfma_f32_4x4x1f32");
  for (int i = 0; i < count; ++i) {
    v.push_back(Instruction::make_mfma(s, {RegFile::vector, 0, 3}, {RegFile::vector, 4, 4},
                                       {RegFile::vector, 5, 5}, {RegFile::vector, 0, 3}));
  }
  // Keep the appended s_endpgm out of the way: end with one explicitly on the next line.
  return Program(std::move(v));
}

// Independent prefix-sum layout: (index, line) for every line each instruction touches.
std::vector<LineEntry> oracle_layout(const std::vector<std::uint32_t>& sizes, std::uint64_t base,
                                     std::uint64_t line) {
  std::vector<LineEntry> out;
  std::uint64_t at = base;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::uint64_t first = at / line;
    const std::uint64_t last = (at + sizes[i] - 1) / line;
    for (std::uint64_t l = first; l <= last; ++l) out.push_back({i, l});
    at += sizes[i];
  }
  return out;
}

}  // namespace

TEST(CachelineLayout, ExactFit) {
  const auto layout = cacheline_layout(mfma_run(8), 64);
  for (const auto& e : layout) {
    if (e.instruction < 8) EXPECT_EQ(e.line, 0u);
  }
  EXPECT_EQ(layout.back(), (LineEntry{8, 1}));  // s_endpgm at byte 64
}

TEST(CachelineLayout, OverflowByOne) {
  const auto layout = cacheline_layout(mfma_run(9), 64);
  EXPECT_EQ(layout[7], (LineEntry{7, 0}));
  EXPECT_EQ(layout[8], (LineEntry{8, 1}));
}

TEST(CachelineLayout, PaddedChainKernelMatchesPrefixSumOracle) {
  std::string text;
  for (int i = 0; i < 6; ++i) text += "s_nop 0\n";
  text += read_text(MCESIM_TEST_DIR "/chain_4x4x1f32.s");
  const Program p = parse_program(text);
  std::vector<std::uint32_t> sizes(6, 4);
  for (std::uint32_t s : {4u, 8u, 4u, 8u, 8u, 8u, 8u, 8u, 4u, 4u}) sizes.push_back(s);
  EXPECT_EQ(cacheline_layout(p, 64), oracle_layout(sizes, 0, 64));
  // The opening s_memtime sits at byte 28 and the fourth MFMA opens line 1.
  EXPECT_EQ(p.offset(7), 28u);
  const auto layout = cacheline_layout(p, 64);
  EXPECT_EQ(layout[12], (LineEntry{12, 1}));
  EXPECT_EQ(layout[11], (LineEntry{11, 0}));
}

TEST(CachelineLayout, PropertyMonotoneAndMatchesOracle) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> len(1, 60), kind(0, 3), basep(0, 40);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Instruction> v;
    std::vector<std::uint32_t> sizes;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      switch (kind(rng)) {
        case 0: v.push_back(Instruction::make_nop()); sizes.push_back(4); break;
        case 1: v.push_back(Instruction::make_waitcnt()); sizes.push_back(4); break;
        case 2: v.push_back(Instruction::make_memtime({RegFile::scalar, 0, 1})); sizes.push_back(8); break;
        default:
          v.push_back(Instruction::make_mfma(parse_mfma_mnemonic("v_mfma_f32_4x4x1f32"), {}, {}, {}, {}));
          sizes.push_back(8);
      }
    }
    sizes.push_back(4);
    const std::uint64_t base = 4u * static_cast<std::uint64_t>(basep(rng));
    for (std::uint64_t line : {16u, 32u, 64u, 128u}) {
      const auto layout = cacheline_layout(Program(v, base), line);
      ASSERT_EQ(layout, oracle_layout(sizes, base, line));
      for (std::size_t i = 1; i < layout.size(); ++i) ASSERT_LE(layout[i - 1].line, layout[i].line);
    }
  }
}

TEST(CachelineLayout, RejectsNonPowerOfTwo) {
  EXPECT_THROW(cacheline_layout(mfma_run(2), 48), ConfigError);
}

TEST(CachelineLayout, StraddlingInstructionListedOnBothLines) {
  std::vector<Instruction> v{Instruction::make_mfma(parse_mfma_mnemonic("v_mfma_f32_4x4x1f32"), {}, {}, {}, {})};
  const auto layout = cacheline_layout(Program(v, 60), 64);
  ASSERT_GE(layout.size(), 2u);
  EXPECT_EQ(layout[0], (LineEntry{0, 0}));
  EXPECT_EQ(layout[1], (LineEntry{0, 1}));
}
