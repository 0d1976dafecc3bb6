#include "mcesim/numeric.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "mcesim/error.hpp"

namespace mcesim {

namespace {

// Binary floating format with `mant` stored fraction bits and normal exponent
// range [emin, emax]. Rounds to nearest, ties to even, with gradual underflow.
double round_to_format(double x, int mant, int emin, int emax) {
  if (!std::isfinite(x) || x == 0.0) return x;
  int e = 0;
  std::frexp(x, &e);  // x = f * 2^e, 0.5 <= |f| < 1, so the leading bit has weight 2^(e-1)
  const int exp = std::max(e - 1, emin);
  const double quantum = std::ldexp(1.0, exp - mant);
  const double r = std::nearbyint(x / quantum) * quantum;  // default rounding mode: ties to even
  const double max_finite = std::ldexp(2.0 - std::ldexp(1.0, -mant), emax);
  if (std::fabs(r) > max_finite) return std::copysign(std::numeric_limits<double>::infinity(), x);
  return r;
}

bool is_float_type(NumericType t) { return !is_integer_type(t); }

}  // namespace

double narrow(double value, NumericType type) {
  switch (type) {
    case NumericType::fp64: return value;
    case NumericType::fp32: return static_cast<double>(static_cast<float>(value));
    case NumericType::fp16: return round_to_format(value, 10, -14, 15);
    case NumericType::bf16: return round_to_format(value, 7, -126, 127);
    case NumericType::i32:
    case NumericType::i8: {
      const double lo = type == NumericType::i8 ? -128.0 : -2147483648.0;
      const double hi = type == NumericType::i8 ? 127.0 : 2147483647.0;
      if (!(value >= lo && value <= hi) || std::trunc(value) != value) {
        throw TypeMismatch("value " + std::to_string(value) + " is not a valid " +
                           std::string(isa_token(type)));
      }
      return value;
    }
  }
  return value;
}

bool is_representable(double value, NumericType type) {
  try {
    const double n = narrow(value, type);
    return n == value || (std::isnan(n) && std::isnan(value));
  } catch (const TypeMismatch&) {
    return false;
  }
}

double widen(double value, NumericType from, NumericType to) {
  const bool ok = from == to || is_supported_pair(to, from) ||
                  (to == NumericType::fp64 && is_float_type(from));
  if (!ok) {
    throw UnsupportedPairError("cannot widen " + std::string(isa_token(from)) + " to " +
                               std::string(isa_token(to)));
  }
  return value;  // every narrower value is already exact in the wider type
}

std::uint16_t fp16_bits(double value) {
  const double v = narrow(value, NumericType::fp16);
  const std::uint16_t sign = std::signbit(v) ? 0x8000 : 0;
  if (std::isnan(v)) return 0x7e00;
  if (std::isinf(v)) return sign | 0x7c00;
  const double a = std::fabs(v);
  if (a == 0.0) return sign;
  int e = 0;
  std::frexp(a, &e);
  const int exp = e - 1;
  if (exp < -14) {
    return sign | static_cast<std::uint16_t>(std::ldexp(a, 24));
  }
  const auto frac = static_cast<std::uint16_t>(std::ldexp(a, 10 - exp) - 1024.0);
  return sign | static_cast<std::uint16_t>((exp + 15) << 10) | frac;
}

double fp16_from_bits(std::uint16_t bits) {
  const double sign = (bits & 0x8000) ? -1.0 : 1.0;
  const int exp = (bits >> 10) & 0x1f;
  const int frac = bits & 0x3ff;
  if (exp == 0x1f) return frac ? std::numeric_limits<double>::quiet_NaN() : sign * INFINITY;
  if (exp == 0) return sign * std::ldexp(frac, -24);
  return sign * std::ldexp(1024 + frac, exp - 25);
}

std::uint16_t bf16_bits(double value) {
  const auto f = static_cast<float>(narrow(value, NumericType::bf16));
  if (std::isnan(f)) return 0x7fc0;
  return static_cast<std::uint16_t>(std::bit_cast<std::uint32_t>(f) >> 16);
}

double bf16_from_bits(std::uint16_t bits) {
  return std::bit_cast<float>(static_cast<std::uint32_t>(bits) << 16);
}

}  // namespace mcesim
