#pragma once

#include <optional>
#include <span>

#include "hmrsim/program.hpp"
#include "hmrsim/types.hpp"

namespace hmr {

struct CoreParams {
    Word boot_addr = 0x0;
    Word mtvec = 0x80;
    int debug_halt_latency = 4; // request to halt-acknowledge, cycles
};

/// Machine-cause codes used by the core model.
namespace cause {
constexpr Word kIllegalInstruction = 2;
constexpr Word kIrqBase = 0x80000000u;
constexpr Word kResyncIrq = kIrqBase | 30; // resynchronization interrupt id
} // namespace cause

/// Minimal in-order 32-bit RISC core: one instruction per cycle, except
/// loads/stores which issue in one cycle and retire with the memory response
/// in a later cycle. No pipeline model; lockstep semantics only need
/// determinism.
class Core {
public:
    explicit Core(int hart_id, const CoreParams& p = {});

    struct StepResult {
        OutputBundle out;
        BackupPorts ports;
        bool irq_taken = false;
    };

    /// Advances one cycle. `resp` answers the request emitted the previous
    /// cycle (Kind::None when no request was outstanding); `irq` is the
    /// pending-interrupt line from the event unit.
    StepResult step(const MemResponse& resp, bool irq, Word irq_cause, const Program& imem);

    /// Resets all architectural state to the cleared default (pc = boot
    /// address) without touching memory. Idempotent.
    void synchronous_clear();

    void debug_halt_request();
    /// Forces the halted state immediately (the engine accounts for the
    /// request/acknowledge latency itself).
    void debug_halt_ack();
    bool halted() const { return state_.halted; }
    bool halt_pending() const { return halt_countdown_ > 0; }

    /// One debug-write invocation models one cycle of restore traffic:
    /// at most two RF writes, with PC and CSR writes in parallel.
    void debug_write_state(std::optional<Word> pc, std::span<const RfWrite> rf,
                           std::span<const CsrWrite> csrs);
    void debug_resume();

    /// True while the core is blocked on an outstanding memory request.
    bool waiting_mem() const { return waiting_mem_; }
    /// Cancels an outstanding request (used when an interrupt wakes a core
    /// sleeping on a barrier read; the access is re-executed after mret).
    void cancel_pending_request();

    ArchState& state() { return state_; }
    const ArchState& state() const { return state_; }

    int hart_id() const { return hart_id_; }
    // restore-traffic instrumentation
    int max_debug_rf_writes = 0;
    uint64_t debug_write_calls = 0;
    // Values returned by the mhartid / nworkers CSRs; owned by the HMR unit.
    int virtual_id = 0;
    int n_workers = 1;

private:
    StepResult execute(Word instr, const Program& imem);
    void take_trap(Word cause_code, BackupPorts& ports);

    int hart_id_;
    CoreParams params_;
    ArchState state_;
    int halt_countdown_ = 0;

    bool waiting_mem_ = false;
    DataReq pending_req_{};
    uint8_t pending_rd_ = 0;
    bool pending_is_load_ = false;
};

/// Replays one cycle of BackupPorts into a shadow state. Together with a
/// seed copy this reconstructs the core state exactly (backup completeness).
void replay_ports(ArchState& shadow, const BackupPorts& ports);

} // namespace hmr
