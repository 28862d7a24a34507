#include "hmrsim/ecc.hpp"

#include <bit>

namespace hmr::ecc {

namespace {

// Hamming positions 1..38: powers of two carry parity, the rest carry data
// bits in ascending order. Position 39 holds the overall parity.
constexpr bool is_power_of_two(unsigned v) { return v && !(v & (v - 1)); }

struct Layout {
    // data_pos[k] = codeword position (1-based) of data bit k
    int data_pos[32];
    constexpr Layout() : data_pos() {
        int k = 0;
        for (unsigned p = 1; p <= 38; ++p)
            if (!is_power_of_two(p)) data_pos[k++] = static_cast<int>(p);
    }
};
constexpr Layout kLayout{};

constexpr uint64_t bit(int pos1) { return 1ull << (pos1 - 1); }

// parity-group masks over positions 1..38 (parity positions included, they
// are zero when the groups are evaluated during encode)
struct Masks {
    uint64_t group[6];
    constexpr Masks() : group() {
        for (int s = 0; s < 6; ++s) {
            uint64_t m = 0;
            for (unsigned p = 1; p <= 38; ++p)
                if (p & (1u << s)) m |= bit(static_cast<int>(p));
            group[s] = m;
        }
    }
};
constexpr Masks kMasks{};
constexpr uint64_t kBody = (1ull << 38) - 1; // positions 1..38

// byte-wise data spreading tables, so encode is table lookups + popcounts
struct Spread {
    uint64_t tab[4][256];
    constexpr Spread() : tab() {
        for (int b = 0; b < 4; ++b)
            for (int v = 0; v < 256; ++v) {
                uint64_t cw = 0;
                for (int i = 0; i < 8; ++i)
                    if ((v >> i) & 1) cw |= bit(kLayout.data_pos[b * 8 + i]);
                tab[b][v] = cw;
            }
    }
};
constexpr Spread kSpread{};

uint64_t hamming_syndrome(uint64_t cw) {
    uint64_t syn = 0;
    for (int s = 0; s < 6; ++s)
        syn |= static_cast<uint64_t>(std::popcount(cw & kMasks.group[s]) & 1) << s;
    return syn;
}

} // namespace

Codeword encode(Word data) {
    uint64_t cw = kSpread.tab[0][data & 0xFF] | kSpread.tab[1][(data >> 8) & 0xFF] |
                  kSpread.tab[2][(data >> 16) & 0xFF] | kSpread.tab[3][(data >> 24) & 0xFF];
    uint64_t syn = hamming_syndrome(cw);
    for (int s = 0; s < 6; ++s)
        if ((syn >> s) & 1u) cw |= bit(1 << s);
    if (std::popcount(cw & kBody) & 1) cw |= bit(39);
    return cw;
}

DecodeResult decode(Codeword cw) {
    uint64_t syn = hamming_syndrome(cw);
    unsigned overall = std::popcount(cw & (kBody | bit(39))) & 1;

    DecodeResult r;
    uint64_t fixed = cw;
    if (syn == 0 && overall == 0) {
        r.status = Status::Ok;
    } else if (overall == 1) {
        // single-bit error: either at the Hamming position the syndrome
        // names, or in the overall parity bit itself
        int pos = syn == 0 ? 39 : static_cast<int>(syn);
        fixed ^= bit(pos);
        r.status = Status::Corrected;
        r.corrected_bit = pos - 1;
    } else {
        // syndrome set, overall parity even: double-bit error
        r.status = Status::Uncorrectable;
        return r;
    }
    Word data = 0;
    for (int k = 0; k < 32; ++k)
        if (fixed & bit(kLayout.data_pos[k])) data |= 1u << k;
    r.data = data;
    return r;
}

} // namespace hmr::ecc
