#pragma once

#include <array>
#include <cstdint>
#include <cstddef>

namespace hmr {

using Word = uint32_t;

/// CSR identifiers for the reduced machine-mode set kept per core.
enum class CsrId : uint8_t { Mepc = 0, Mcause = 1, Mtvec = 2, MstatusMie = 3 };
constexpr size_t kNumCsrs = 4;

struct Csrs {
    Word mepc = 0;
    Word mcause = 0;
    Word mtvec = 0;
    Word mstatus_mie = 0; // single bit, stored as a word

    Word read(CsrId id) const {
        switch (id) {
        case CsrId::Mepc: return mepc;
        case CsrId::Mcause: return mcause;
        case CsrId::Mtvec: return mtvec;
        case CsrId::MstatusMie: return mstatus_mie & 1u;
        }
        return 0;
    }
    void write(CsrId id, Word v) {
        switch (id) {
        case CsrId::Mepc: mepc = v; break;
        case CsrId::Mcause: mcause = v; break;
        case CsrId::Mtvec: mtvec = v; break;
        case CsrId::MstatusMie: mstatus_mie = v & 1u; break;
        }
    }
    bool operator==(const Csrs&) const = default;
};

/// One core's architectural state: the payload saved and restored by every
/// recovery path.
struct ArchState {
    Word pc = 0;
    std::array<Word, 32> rf{}; // rf[0] hardwired to zero
    Csrs csr;
    bool halted = false;

    void write_rf(unsigned idx, Word v) {
        if (idx != 0 && idx < 32) rf[idx] = v;
    }
    bool operator==(const ArchState&) const = default;
};

/// Architectural payload comparison (pc, rf, csrs); ignores halt/debug flags.
inline bool arch_payload_equal(const ArchState& a, const ArchState& b) {
    return a.pc == b.pc && a.rf == b.rf && a.csr == b.csr;
}

struct DataReq {
    Word valid = 0; // single bit
    Word addr = 0;
    Word wdata = 0;
    Word we = 0;       // single bit
    Word byte_en = 0;  // 4 bits
    bool operator==(const DataReq&) const = default;
};

/// Per-cycle core outputs compared bitwise by checkers and voters.
/// Canonical form: when valid == 0 all other request fields are zero.
struct OutputBundle {
    Word ifetch_addr = 0;
    DataReq req;

    void canonicalize() {
        if (!(req.valid & 1u)) req = DataReq{};
        req.valid &= 1u;
        req.we &= 1u;
        req.byte_en &= 0xFu;
    }
    bool operator==(const OutputBundle&) const = default;
};

struct RfWrite {
    uint8_t index = 0;
    Word value = 0;
    bool operator==(const RfWrite&) const = default;
};

struct CsrWrite {
    CsrId id = CsrId::Mepc;
    Word value = 0;
    bool operator==(const CsrWrite&) const = default;
};

/// Exposed state-write ports, mirrored into the recovery backup registers.
/// At most two RF writes per cycle (the core has two RF write ports).
struct BackupPorts {
    bool pc_valid = false;
    Word pc = 0;
    uint8_t n_rf = 0;
    std::array<RfWrite, 2> rf{};
    uint8_t n_csr = 0;
    std::array<CsrWrite, kNumCsrs> csr{};

    void add_rf(unsigned idx, Word v) {
        if (idx == 0) return; // x0 writes are dropped, no port activity
        rf[n_rf++] = RfWrite{static_cast<uint8_t>(idx), v};
    }
    void add_csr(CsrId id, Word v) { csr[n_csr++] = CsrWrite{id, v}; }
    void set_pc(Word v) {
        pc_valid = true;
        pc = v;
    }
    bool operator==(const BackupPorts&) const = default;
};

/// Response delivered to a core for the request it issued the previous cycle.
struct MemResponse {
    enum class Kind : uint8_t { None, Data, Stall, BusError };
    Kind kind = Kind::None;
    Word data = 0;
};

/// 64-bit FNV-1a, used for report digests and determinism hashes.
class Fnv1a {
public:
    void update(const void* data, size_t n) {
        auto* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ull;
        }
    }
    void update_u32(uint32_t v) { update(&v, sizeof v); }
    void update_u64(uint64_t v) { update(&v, sizeof v); }
    uint64_t digest() const { return h_; }

private:
    uint64_t h_ = 0xcbf29ce484222325ull;
};

/// splitmix64; used to derive independent per-run seeds from a master seed.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Deterministic RNG with an implementation-independent bounded draw, so
/// campaign reports reproduce bit-exactly across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : s_(seed) {}
    uint64_t next() { return splitmix64(s_); }
    /// uniform in [0, n)
    uint64_t below(uint64_t n) {
        // rejection sampling to avoid modulo bias
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }
    double uniform01() { return (next() >> 11) * 0x1.0p-53; }

private:
    uint64_t s_;
};

} // namespace hmr
