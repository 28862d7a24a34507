#pragma once

#include <string>
#include <vector>

#include "hmrsim/hmr.hpp"
#include "hmrsim/types.hpp"

namespace hmr {

enum class SectionKind : uint8_t { MissionCritical, Performance };
enum class SectionDirection : uint8_t { Entry, Exit };
enum class Variant : uint8_t { Sw, Rapid };

struct SectionPhase {
    std::string name; // setup | unload | reload | hw_fill
    uint64_t cycles = 0;
};

struct SectionTrace {
    SectionKind kind = SectionKind::MissionCritical;
    SectionDirection direction = SectionDirection::Entry;
    std::string role = "main"; // main | helper
    int group = 0;
    uint64_t start_cycle = 0;
    std::vector<SectionPhase> phases;
    uint64_t total_cycles() const {
        uint64_t t = 0;
        for (const auto& p : phases) t += p.cycles;
        return t;
    }
};

/// Per-mode phase latencies. `sw`/`rapid` pick the software reload path or
/// the hardware fill from the recovery region.
struct SectionLatency {
    uint64_t setup = 0;
    uint64_t unload = 0;
    uint64_t reload = 0;  // software reload
    uint64_t hw_fill = 0; // rapid-recovery hardware fill
};

/// Calibrated phase latencies for the split-lock protocol and the software
/// recovery routine. Defaults reproduce the measured cycle breakdowns of
/// the reference cluster; the run configuration may override any entry.
struct CalibrationTable {
    // mission-critical entry
    SectionLatency mc_entry_sw_dmr{87, 321, 126, 0};  // 534 total
    SectionLatency mc_entry_sw_tmr{87, 195, 126, 0};  // 408 total
    SectionLatency mc_entry_rapid_dmr{86, 287, 0, 24}; // 397 total
    SectionLatency mc_entry_rapid_tmr{86, 198, 0, 24}; // 308 total
    // mission-critical exit
    uint64_t mc_exit_main_dmr = 22;
    uint64_t mc_exit_main_tmr = 23;
    uint64_t mc_exit_helper_sw_dmr = 147;
    uint64_t mc_exit_helper_sw_tmr = 165;
    uint64_t mc_exit_helper_rapid_dmr = 184;
    uint64_t mc_exit_helper_rapid_tmr = 182;
    // performance section
    uint64_t perf_entry_dmr = 134;
    uint64_t perf_entry_tmr = 82;
    uint64_t perf_entry_rapid_dmr = 125;
    SectionLatency perf_exit_sw_dmr{22, 162, 189, 0}; // 373 total
    SectionLatency perf_exit_sw_tmr{22, 162, 127, 0}; // 311 total
    SectionLatency perf_exit_rapid_dmr{159, 0, 0, 24}; // 183 total
    SectionLatency perf_exit_rapid_tmr{70, 0, 0, 24};  // 94 total
    // TCLS software recovery routine
    uint64_t tcls_unload = 247;
    uint64_t tcls_reload = 116;

    const SectionLatency& mc_entry(Mode m, Variant v) const {
        if (v == Variant::Rapid) return m == Mode::Dmr ? mc_entry_rapid_dmr : mc_entry_rapid_tmr;
        return m == Mode::Dmr ? mc_entry_sw_dmr : mc_entry_sw_tmr;
    }
};

/// Reference cycle counts from the evaluated hardware, reported side by
/// side with the calibrated sums (they disagree with the per-phase
/// breakdown by a couple of cycles for some entries).
struct ReferenceCounts {
    uint64_t mc_entry_dmr = 534, mc_entry_tmr = 410;
    uint64_t mc_entry_rapid_dmr = 397, mc_entry_rapid_tmr = 310;
    uint64_t mc_exit_main_dmr = 22, mc_exit_main_tmr = 23;
    uint64_t mc_exit_helper_dmr = 147, mc_exit_helper_tmr = 165;
    uint64_t mc_exit_helper_rapid_dmr = 184, mc_exit_helper_rapid_tmr = 182;
    uint64_t perf_entry_dmr = 134, perf_entry_tmr = 82;
    uint64_t perf_entry_rapid_dmr = 125, perf_entry_rapid_tmr = 82;
    uint64_t perf_exit_dmr = 373, perf_exit_tmr = 311;
    uint64_t perf_exit_rapid_dmr = 183, perf_exit_rapid_tmr = 94;
    uint64_t recovery_tcls_sw = 363, recovery_rapid = 24;
};

} // namespace hmr
