#pragma once

#include <array>
#include <string>
#include <vector>

#include "hmrsim/ecc.hpp"
#include "hmrsim/types.hpp"

namespace hmr {

/// Cycle budgets of the rapid-recovery FSM. A full Idle -> Clear -> Halt ->
/// Restore -> Idle traversal takes setup_clear + halt_ack + restore cycles.
struct RapidBudgets {
    int setup_clear = 4;
    int halt_ack = 4;
    int restore = 16; // 31 registers over two write ports, PC/CSRs in parallel
    int total() const { return setup_clear + halt_ack + restore; }
};

enum class RapidPhase : uint8_t { Idle, Clear, Halt, Restore };
enum class TclsState : uint8_t { Run, Unload, Reload };

struct RecoveryPhase {
    std::string name;
    uint64_t cycles = 0;
};

struct RecoveryTrace {
    std::string kind; // "rapid" | "tcls_sw" | "restart"
    int group = 0;
    uint64_t start_cycle = 0;
    std::vector<RecoveryPhase> phases;
    int ecc_corrections = 0;
    bool ecc_uncorrectable = false;
    bool escalated = false; // rapid path aborted to the software/restart path
    uint64_t total_cycles() const {
        uint64_t t = 0;
        for (const auto& p : phases) t += p.cycles;
        return t;
    }
};

/// ECC-protected shadow copy of one group's main-core state. Write-blocked
/// while the group error signal is asserted so a faulty cycle can never
/// corrupt the backup.
class RecoveryRegion {
public:
    void seed_from(const ArchState& s);

    /// Commits one cycle of exposed write-port traffic. With the error
    /// signal asserted the region is left bit-identical.
    void commit(const BackupPorts& ports, bool error);

    struct Decoded {
        ArchState state;
        int corrections = 0;
        bool uncorrectable = false;
    };
    Decoded decode() const;

    uint64_t hash() const;

    bool write_blocked = false;

    // raw codeword access, for ECC-fault tests
    ecc::Codeword& pc_codeword() { return pc_; }
    ecc::Codeword& rf_codeword(int reg) { return rf_.at(reg - 1); }
    ecc::Codeword& csr_codeword(CsrId id) { return csr_[static_cast<size_t>(id)]; }

private:
    ecc::Codeword pc_ = ecc::encode(0);
    std::array<ecc::Codeword, 31> rf_{}; // x1..x31
    std::array<ecc::Codeword, kNumCsrs> csr_{};
};

/// Functional form of the commit: returns the updated region (identity when
/// the error signal is asserted).
inline RecoveryRegion backup_commit(RecoveryRegion region, const BackupPorts& ports, bool error) {
    region.commit(ports, error);
    return region;
}

} // namespace hmr
