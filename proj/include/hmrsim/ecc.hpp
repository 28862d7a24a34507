#pragma once

#include <cstdint>

#include "hmrsim/types.hpp"

namespace hmr::ecc {

/// SEC-DED Hamming(39,32) codeword: 32 data bits, 6 Hamming parity bits and
/// one overall parity bit. Stored in the low 39 bits of a uint64_t, where
/// bit i holds codeword position i+1 (positions 1..38 form the Hamming(38,32)
/// layout, position 39 is the overall parity).
using Codeword = uint64_t;

constexpr int kCodewordBits = 39;

enum class Status : uint8_t { Ok, Corrected, Uncorrectable };

struct DecodeResult {
    Word data = 0;
    Status status = Status::Ok;
    int corrected_bit = -1; // 0-based index into the 39-bit codeword
};

Codeword encode(Word data);
DecodeResult decode(Codeword cw);

inline Codeword flip_bit(Codeword cw, int bit) { return cw ^ (1ull << bit); }

} // namespace hmr::ecc
