#include "mcesim/isa.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <sstream>

#include "mcesim/error.hpp"

namespace mcesim {

namespace {

struct TypeSpelling {
  std::string_view text;
  NumericType type;
};

// Longest spellings first so "fp16" wins over "f16" style prefixes.
constexpr std::array kTypeSpellings{
    TypeSpelling{"fp64", NumericType::fp64}, TypeSpelling{"fp32", NumericType::fp32},
    TypeSpelling{"fp16", NumericType::fp16}, TypeSpelling{"bf16", NumericType::bf16},
    TypeSpelling{"f64", NumericType::fp64},  TypeSpelling{"f32", NumericType::fp32},
    TypeSpelling{"f16", NumericType::fp16},  TypeSpelling{"i32", NumericType::i32},
    TypeSpelling{"i8", NumericType::i8},
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool eat(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) return false;
  s.remove_prefix(prefix.size());
  return true;
}

std::optional<NumericType> eat_type(std::string_view& s) {
  for (const auto& t : kTypeSpellings) {
    if (eat(s, t.text)) return t.type;
  }
  return std::nullopt;
}

std::optional<int> eat_uint(std::string_view& s) {
  std::size_t n = 0;
  while (n < s.size() && std::isdigit(static_cast<unsigned char>(s[n]))) ++n;
  if (n == 0 || n > 6) return std::nullopt;
  int v = 0;
  std::from_chars(s.data(), s.data() + n, v);
  s.remove_prefix(n);
  return v;
}

// s_set_gpr_idx-dependent variants; matched on shape, any block count.
bool needs_gpr_idx(const MfmaSpec& s) {
  const bool f32_32x32x1 = s.out_type == NumericType::fp32 && s.in_type == NumericType::fp32 &&
                           s.m == 32 && s.n == 32 && s.k == 1;
  const bool f16_32x32x8 = s.out_type == NumericType::fp32 && s.in_type == NumericType::fp16 &&
                           s.m == 32 && s.n == 32 && s.k == 8;
  return f32_32x32x1 || f16_32x32x8;
}

}  // namespace

std::string_view isa_token(NumericType t) noexcept {
  switch (t) {
    case NumericType::fp64: return "f64";
    case NumericType::fp32: return "f32";
    case NumericType::fp16: return "f16";
    case NumericType::bf16: return "bf16";
    case NumericType::i32: return "i32";
    case NumericType::i8: return "i8";
  }
  return "?";
}

std::string_view table_token(NumericType t) noexcept {
  switch (t) {
    case NumericType::fp64: return "fp64";
    case NumericType::fp32: return "fp32";
    case NumericType::fp16: return "fp16";
    default: return isa_token(t);
  }
}

bool is_integer_type(NumericType t) noexcept { return t == NumericType::i32 || t == NumericType::i8; }

bool is_supported_pair(NumericType out, NumericType in) noexcept {
  switch (out) {
    case NumericType::fp64: return in == NumericType::fp64;
    case NumericType::fp32:
      return in == NumericType::fp32 || in == NumericType::fp16 || in == NumericType::bf16;
    case NumericType::i32: return in == NumericType::i8;
    default: return false;
  }
}

MfmaSpec parse_mfma_mnemonic(std::string_view text) {
  const std::string owned = lower(trim(text));
  std::string_view s = owned;
  const auto fail = [&](std::string_view why) {
    return MnemonicError("malformed MFMA mnemonic '" + std::string(text) + "': " + std::string(why));
  };

  eat(s, "v_mfma_");
  MfmaSpec spec;
  const auto out = eat_type(s);
  if (!out) throw fail("unknown output type");
  spec.out_type = *out;
  if (!eat(s, "_")) throw fail("expected '_' after output type");

  const auto m = eat_uint(s);
  if (!m || !eat(s, "x")) throw fail("expected MxNxK");
  const auto n = eat_uint(s);
  if (!n || !eat(s, "x")) throw fail("expected MxNxK");
  const auto k = eat_uint(s);
  if (!k) throw fail("expected MxNxK");
  spec.m = *m;
  spec.n = *n;
  spec.k = *k;

  if (s.size() > 1 && s[0] == '_' && std::isdigit(static_cast<unsigned char>(s[1]))) {
    s.remove_prefix(1);
    const auto b = eat_uint(s);
    if (!b || !eat(s, "b")) throw fail("expected block field '_<B>b'");
    spec.blocks = *b;
  }
  eat(s, "_");
  const auto in = eat_type(s);
  if (!in) throw fail("unknown input type");
  spec.in_type = *in;
  if (!s.empty()) throw fail("trailing characters '" + std::string(s) + "'");

  if (spec.m < 1 || spec.n < 1 || spec.k < 1 || spec.blocks < 1) throw fail("dimensions must be >= 1");
  if (needs_gpr_idx(spec)) {
    throw GprIdxUnsupported("'" + std::string(text) +
                            "' requires the s_set_gpr_idx addressing mode, which is unsupported");
  }
  if (!is_supported_pair(spec.out_type, spec.in_type)) {
    throw UnsupportedPairError("unsupported type pairing " + std::string(isa_token(spec.out_type)) +
                               " <- " + std::string(isa_token(spec.in_type)) + " in '" +
                               std::string(text) + "'");
  }
  return spec;
}

std::string render_mnemonic(const MfmaSpec& spec) {
  std::ostringstream os;
  os << "v_mfma_" << isa_token(spec.out_type) << '_' << spec.m << 'x' << spec.n << 'x' << spec.k;
  if (spec.blocks != 1) os << '_' << spec.blocks << "b_";
  os << isa_token(spec.in_type);
  return os.str();
}

std::string table_name(const MfmaSpec& spec) {
  std::ostringstream os;
  os << table_token(spec.out_type) << '_' << spec.m << 'x' << spec.n << 'x' << spec.k;
  if (spec.blocks != 1) os << '_' << spec.blocks << "b_";
  os << table_token(spec.in_type);
  return os.str();
}

std::string render_reg(const RegRange& r) {
  const char f = r.file == RegFile::scalar ? 's' : r.file == RegFile::vector ? 'v' : 'a';
  if (r.first == r.last) return std::string(1, f) + std::to_string(r.first);
  return std::string(1, f) + "[" + std::to_string(r.first) + ":" + std::to_string(r.last) + "]";
}

std::string_view opcode_name(Opcode op) noexcept {
  switch (op) {
    case Opcode::mfma: return "v_mfma";
    case Opcode::s_memtime: return "s_memtime";
    case Opcode::s_nop: return "s_nop";
    case Opcode::s_waitcnt: return "s_waitcnt";
    case Opcode::s_endpgm: return "s_endpgm";
  }
  return "?";
}

std::uint32_t EncodingSizes::of(Opcode op) const noexcept {
  switch (op) {
    case Opcode::mfma: return mfma;
    case Opcode::s_memtime: return memtime;
    case Opcode::s_nop: return nop;
    case Opcode::s_waitcnt: return waitcnt;
    case Opcode::s_endpgm: return endpgm;
  }
  return 4;
}

std::uint32_t encode_size(const Instruction& instr, const EncodingSizes& sizes) noexcept {
  return sizes.of(instr.opcode);
}

Instruction Instruction::make_mfma(const MfmaSpec& spec, RegRange d, RegRange a, RegRange b, RegRange c) {
  Instruction i;
  i.opcode = Opcode::mfma;
  i.mfma = spec;
  i.dst_regs = {d};
  i.src_regs = {a, b, c};
  i.size_bytes = EncodingSizes{}.mfma;
  return i;
}

Instruction Instruction::make_memtime(RegRange dst) {
  Instruction i;
  i.opcode = Opcode::s_memtime;
  i.dst_regs = {dst};
  i.size_bytes = EncodingSizes{}.memtime;
  return i;
}

Instruction Instruction::make_nop(int count) {
  Instruction i;
  i.opcode = Opcode::s_nop;
  i.nop_count = count;
  return i;
}

Instruction Instruction::make_waitcnt(WaitCounts w) {
  Instruction i;
  i.opcode = Opcode::s_waitcnt;
  i.wait = w;
  return i;
}

Instruction Instruction::make_endpgm() {
  Instruction i;
  i.opcode = Opcode::s_endpgm;
  return i;
}

Program::Program(std::vector<Instruction> instructions, std::uint64_t base_address, const EncodingSizes& sizes)
    : instructions_(std::move(instructions)), base_address_(base_address) {
  if (instructions_.empty() || instructions_.back().opcode != Opcode::s_endpgm) {
    auto end = Instruction::make_endpgm();
    end.source_line = instructions_.empty() ? 0 : instructions_.back().source_line;
    instructions_.push_back(end);
  }
  offsets_.clear();
  offsets_.reserve(instructions_.size() + 1);
  std::uint64_t at = base_address_;
  for (auto& instr : instructions_) {
    instr.size_bytes = encode_size(instr, sizes);
    offsets_.push_back(at);
    at += instr.size_bytes;
  }
  offsets_.push_back(at);
}

namespace {

class LineParser {
 public:
  LineParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  [[noreturn]] void fail(const std::string& why) const { throw ParseError(line_, why); }

  void skip_ws() { s_ = trim(s_); }
  bool done() {
    skip_ws();
    return s_.empty();
  }

  std::string word() {
    skip_ws();
    std::size_t n = 0;
    while (n < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[n])) || s_[n] == '_')) ++n;
    std::string w = lower(s_.substr(0, n));
    s_.remove_prefix(n);
    return w;
  }

  void expect(char c) {
    skip_ws();
    if (s_.empty() || s_.front() != c) fail(std::string("expected '") + c + "'");
    s_.remove_prefix(1);
  }

  bool accept(char c) {
    skip_ws();
    if (s_.empty() || s_.front() != c) return false;
    s_.remove_prefix(1);
    return true;
  }

  std::uint32_t number() {
    skip_ws();
    auto v = eat_uint(s_);
    if (!v) fail("expected a number");
    return static_cast<std::uint32_t>(*v);
  }

  RegRange reg() {
    skip_ws();
    if (s_.empty()) fail("expected a register operand");
    RegRange r;
    switch (std::tolower(static_cast<unsigned char>(s_.front()))) {
      case 's': r.file = RegFile::scalar; break;
      case 'v': r.file = RegFile::vector; break;
      case 'a': r.file = RegFile::accum; break;
      default: fail("malformed register operand '" + std::string(s_) + "'");
    }
    s_.remove_prefix(1);
    if (accept('[')) {
      r.first = number();
      expect(':');
      r.last = number();
      expect(']');
      if (r.last < r.first) fail("register range is reversed");
    } else {
      if (s_.empty() || !std::isdigit(static_cast<unsigned char>(s_.front()))) {
        fail("malformed register operand");
      }
      r.first = r.last = number();
    }
    return r;
  }

  std::string_view rest() const { return s_; }

 private:
  std::string_view s_;
  std::size_t line_;
};

WaitCounts parse_wait(LineParser& p) {
  WaitCounts w;
  if (p.done()) {
    w.raw = 0;
    return w;
  }
  if (std::isdigit(static_cast<unsigned char>(p.rest().front()))) {
    w.raw = static_cast<int>(p.number());
    return w;
  }
  while (!p.done()) {
    const std::string name = p.word();
    p.expect('(');
    const int v = static_cast<int>(p.number());
    p.expect(')');
    if (name == "lgkmcnt") w.lgkmcnt = v;
    else if (name == "vmcnt") w.vmcnt = v;
    else if (name == "expcnt") w.expcnt = v;
    else p.fail("unknown wait counter '" + name + "'");
    if (!p.accept('&')) p.accept(',');
  }
  return w;
}

Instruction parse_statement(std::string_view stmt, std::size_t line) {
  LineParser p(stmt, line);
  const std::string op = p.word();
  Instruction instr;
  instr.source_line = line;

  if (op.rfind("v_mfma_", 0) == 0) {
    instr.opcode = Opcode::mfma;
    try {
      instr.mfma = parse_mfma_mnemonic(op);
    } catch (const Error& e) {
      p.fail(e.what());
    }
    std::array<RegRange, 4> ops{};
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (i) p.expect(',');
      ops[i] = p.reg();
      if (ops[i].file == RegFile::scalar) p.fail("MFMA operands must be vector or accumulator registers");
    }
    instr.dst_regs = {ops[0]};
    instr.src_regs = {ops[1], ops[2], ops[3]};
  } else if (op == "s_memtime") {
    instr.opcode = Opcode::s_memtime;
    const RegRange d = p.reg();
    if (d.file != RegFile::scalar || d.width() != 2) p.fail("s_memtime needs a 64-bit scalar pair s[n:n+1]");
    instr.dst_regs = {d};
  } else if (op == "s_nop") {
    instr.opcode = Opcode::s_nop;
    instr.nop_count = p.done() ? 0 : static_cast<int>(p.number());
  } else if (op == "s_waitcnt") {
    instr.opcode = Opcode::s_waitcnt;
    instr.wait = parse_wait(p);
  } else if (op == "s_endpgm") {
    instr.opcode = Opcode::s_endpgm;
  } else {
    p.fail("unknown opcode '" + (op.empty() ? std::string(trim(stmt)) : op) + "'");
  }
  if (!p.done()) p.fail("unexpected trailing text '" + std::string(p.rest()) + "'");
  return instr;
}

}  // namespace

Program parse_program(std::string_view text, std::uint64_t base_address, const EncodingSizes& sizes) {
  std::vector<Instruction> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    const auto cut = std::min({line.find('#'), line.find(';'), line.find("//")});
    line = trim(line.substr(0, cut));
    if (line.empty()) continue;
    out.push_back(parse_statement(line, line_no));
  }
  return Program(std::move(out), base_address, sizes);
}

std::string render_instruction(const Instruction& instr) {
  std::ostringstream os;
  switch (instr.opcode) {
    case Opcode::mfma:
      os << render_mnemonic(*instr.mfma) << ' ' << render_reg(instr.dst_regs.at(0));
      for (const auto& r : instr.src_regs) os << ", " << render_reg(r);
      break;
    case Opcode::s_memtime: os << "s_memtime " << render_reg(instr.dst_regs.at(0)); break;
    case Opcode::s_nop: os << "s_nop " << instr.nop_count; break;
    case Opcode::s_waitcnt: {
      os << "s_waitcnt";
      const auto& w = instr.wait;
      if (w.raw) {
        os << ' ' << *w.raw;
        break;
      }
      const char* sep = " ";
      const auto put = [&](const char* name, const std::optional<int>& v) {
        if (!v) return;
        os << sep << name << '(' << *v << ')';
        sep = " & ";
      };
      put("lgkmcnt", w.lgkmcnt);
      put("vmcnt", w.vmcnt);
      put("expcnt", w.expcnt);
      break;
    }
    case Opcode::s_endpgm: os << "s_endpgm"; break;
  }
  return os.str();
}

std::string render_program(const Program& p) {
  std::string out;
  for (const auto& instr : p.instructions()) {
    out += render_instruction(instr);
    out += '\n';
  }
  return out;
}

std::pair<std::uint64_t, std::uint64_t> line_span(std::uint64_t begin, std::uint64_t end,
                                                  std::uint64_t line_size) {
  return {begin / line_size, (end - 1) / line_size};
}

std::vector<LineEntry> cacheline_layout(const Program& p, std::uint64_t line_size) {
  if (line_size == 0 || (line_size & (line_size - 1)) != 0) {
    throw ConfigError("fetch line size must be a power of two");
  }
  std::vector<LineEntry> out;
  out.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto [first, last] = line_span(p.offset(i), p.offset(i + 1), line_size);
    for (auto l = first; l <= last; ++l) out.push_back({i, l});
  }
  return out;
}

}  // namespace mcesim
