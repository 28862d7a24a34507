#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "hmrsim/types.hpp"

namespace hmr {

enum class Mode : uint8_t { Independent = 0, Dmr = 1, Tmr = 2 };

/// Interleaved grouping: core i (i < N/2) is paired with core i + N/2.
inline int dmr_partner(int i, int n_cores) {
    if (n_cores % 2 != 0) throw std::invalid_argument("DMR needs an even core count");
    if (i < 0 || i >= n_cores / 2) throw std::invalid_argument("not a main-core id");
    return i + n_cores / 2;
}

/// Interleaved grouping: core i (i < N/3) is grouped with i + N/3 and i + 2N/3.
inline std::pair<int, int> tmr_partners(int i, int n_cores) {
    if (n_cores % 3 != 0) throw std::invalid_argument("TMR needs a core count divisible by 3");
    if (i < 0 || i >= n_cores / 3) throw std::invalid_argument("not a main-core id");
    return {i + n_cores / 3, i + 2 * n_cores / 3};
}

struct CheckResult {
    OutputBundle output; // gated to canonical zero on error
    bool error = false;
};

struct VoteResult {
    OutputBundle output; // bitwise majority of the three inputs
    bool error = false;
    std::optional<int> dissenter; // slot 0..2, unset if all agree
    bool group_failure = false;   // no slot matches the bitwise majority
};

/// DMR checker: equal inputs pass the main core's bundle through; any
/// mismatch gates the output toward the system.
CheckResult check_pair(const OutputBundle& a, const OutputBundle& b);

/// TMR voter: bitwise per-field majority plus dissenter identification.
VoteResult vote_triple(const OutputBundle& a, const OutputBundle& b, const OutputBundle& c);

/// Redundancy options of the HMR unit's configuration registers.
struct HmrOptions {
    bool rapid_recovery_enabled = false;
    bool sync_clear_on_recovery = true;
    bool tmr_delayed_resync = false;
};

/// Memory-mapped register surface of the HMR unit. Offsets are relative to
/// the unit's peripheral base; the full map is listed in the README.
namespace hmr_reg {
constexpr Word kNumCores = 0x000;     // RO: physical core count
constexpr Word kModeReqBase = 0x010;  // +4*main_id, W: requested Mode, fires grouping IRQ
constexpr Word kModeStatBase = 0x080; // +4*main_id, RO: current Mode
constexpr Word kSpRegBase = 0x100;    // +4*virtual_id, RW: stack-pointer backup
constexpr Word kErrCountBase = 0x200; // +4*main_id, RO: mismatch counter
constexpr Word kWindowSize = 0x300;
} // namespace hmr_reg

} // namespace hmr
