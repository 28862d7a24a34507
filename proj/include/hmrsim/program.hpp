#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmrsim/types.hpp"

namespace hmr {

/// Flat instruction image, loaded into the ideal single-cycle instruction
/// memory at the boot address.
struct Program {
    std::vector<Word> words;

    Word fetch(Word addr) const {
        Word idx = addr / 4;
        if ((addr & 3u) || idx >= words.size()) return 0; // decodes as illegal
        return words[idx];
    }
    size_t size_bytes() const { return words.size() * 4; }
};

/// Assembles a textual listing (one instruction per line, labels, `.word`,
/// `.org`, and the li/j/mv/nop pseudo-instructions) into RV32I machine code.
/// Throws std::runtime_error with a line diagnostic on malformed input.
Program assemble(const std::string& source);

/// Loads a flat little-endian binary image.
Program load_flat_binary(const std::vector<uint8_t>& bytes);

} // namespace hmr
