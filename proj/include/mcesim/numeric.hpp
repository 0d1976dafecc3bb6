#pragma once

#include <cstdint>

#include "mcesim/isa.hpp"

namespace mcesim {

// Round `value` to the nearest value representable in `type` (ties to even for
// floating types). Integer types require an integral, in-range value and throw
// TypeMismatch otherwise.
double narrow(double value, NumericType type);

bool is_representable(double value, NumericType type);

// Exact widening of an element of `from` into `to`. Allowed: identity, every
// MFMA input->output pairing, and any floating type into fp64.
double widen(double value, NumericType from, NumericType to);

std::uint16_t fp16_bits(double value);
double fp16_from_bits(std::uint16_t bits);
std::uint16_t bf16_bits(double value);
double bf16_from_bits(std::uint16_t bits);

}  // namespace mcesim
