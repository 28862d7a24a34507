#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hmrsim/core.hpp"
#include "hmrsim/hmr.hpp"
#include "hmrsim/interconnect.hpp"
#include "hmrsim/program.hpp"
#include "hmrsim/recovery.hpp"
#include "hmrsim/splitlock.hpp"

namespace hmr {

struct ClusterConfig {
    int n_cores = 12;
    int banking_factor = 2; // banks = banking_factor * n_cores
    size_t tcdm_size = 256 * 1024;
    Word tcdm_base = 0x10000000;
    Word periph_base = 0x20000000;
    Word boot_addr = 0x0;
    Word mtvec = 0x80;
    HmrOptions options;
    bool calibrated = false; // phase latencies from the calibration table
    CalibrationTable calib;
    size_t stack_bytes_per_core = 0x800; // descending stacks below TCDM top
};

/// Peripheral window layout (cluster-absolute = periph_base + offset).
namespace periph {
constexpr Word kHmrOffset = 0x00000;     // HMR unit registers (hmr_reg map)
constexpr Word kEventOffset = 0x10000;   // +0x0: synchronization barrier
constexpr Word kSimCtrlOffset = 0x20000; // +0x0: store = virtual core exit
constexpr Word kWindow = 0x30000;
} // namespace periph

/// Single-bit fault descriptor.
struct FaultEvent {
    enum class Kind : uint8_t { Seu, Set };
    enum class Loc : uint8_t { RfBit, PcBit, CsrBit, InterfaceBit };
    // Interface fields, in OutputBundle order.
    enum class Field : uint8_t { IfetchAddr, Valid, Addr, Wdata, We, ByteEn };

    uint64_t cycle = 0;
    int target_core = 0;
    Loc loc = Loc::RfBit;
    Kind kind = Kind::Seu;
    int reg = 1;                // RfBit: 1..31
    CsrId csr = CsrId::Mepc;    // CsrBit
    Field field = Field::Wdata; // InterfaceBit
    int bit = 0;                // 0..31
};

/// One redundancy group (independent cores are singleton groups). The
/// virtual-core id is the lowest member id.
struct Group {
    Mode mode = Mode::Independent;
    std::vector<int> members; // members[0] is the main core
    int vid = 0;
    bool gated = false;         // DMR output gating until recovery completes
    bool engine_active = false; // a protocol/recovery engine owns the cores
    RecoveryRegion region;
    uint64_t error_count = 0;
    bool tmr_first_error_pending = false; // delayed-resync bookkeeping
    TclsState tcls_state = TclsState::Run;
    Variant entry_variant = Variant::Sw; // variant used when the group locked
};

/// Deterministic cycle-level model of the redundant cluster. Single
/// threaded; independent instances may run in parallel.
class Cluster {
public:
    explicit Cluster(const ClusterConfig& cfg);

    void load_program(const Program& p) { program_ = p; }
    const Program& program() const { return program_; }

    /// Locks the whole cluster into `m` before boot (groups, virtual ids,
    /// worker count, barrier participants, recovery-region seeds).
    void set_mode_all(Mode m);

    // --- simulation control -------------------------------------------
    void cycle();
    struct RunResult {
        uint64_t cycles = 0;
        bool completed = false;
        bool hung = false;
    };
    /// Runs until every virtual core signalled exit and all engines are
    /// idle, or until max_cycles.
    RunResult run(uint64_t max_cycles);
    uint64_t now() const { return cycle_; }
    bool idle() const;

    // --- faults --------------------------------------------------------
    void schedule_fault(const FaultEvent& e); // validates location ranges

    // --- split-lock protocol (block until the protocol completes) ------
    SectionTrace enter_mission_critical(int main_id, Mode mode, Variant variant);
    std::pair<SectionTrace, std::vector<SectionTrace>> exit_mission_critical(int main_id);
    SectionTrace enter_performance(int main_id);
    SectionTrace exit_performance(int main_id, Variant variant);

    /// Boot-path SP-register check: non-zero SP register means the cleared
    /// core reloads its state from the stack instead of a normal boot.
    bool boot_sp_check(int vid) const { return sp_reg(vid) != 0; }

    // --- HMR configuration-register surface ----------------------------
    struct ConfigAccess {
        bool bus_error = false;
        Word rdata = 0;
    };
    ConfigAccess config_access(Word offset, bool write, Word value = 0);
    Word sp_reg(int vid) const;
    void set_sp_reg(int vid, Word v);

    // --- observability --------------------------------------------------
    Core& core(int i) { return *cores_[i]; }
    const Core& core(int i) const { return *cores_[i]; }
    int n_cores() const { return static_cast<int>(cores_.size()); }
    Tcdm& tcdm() { return tcdm_; }
    const Tcdm& tcdm() const { return tcdm_; }
    EventUnit& event_unit() { return event_unit_; }
    Group& group_of(int vid);
    const std::vector<Group>& groups() const { return groups_; }
    std::vector<int> active_vids() const;
    bool vcore_exited(int vid) const { return exited_.count(vid) != 0; }
    bool all_exited() const;

    uint64_t total_errors() const;
    int restart_count() const { return restarts_; }
    const std::vector<RecoveryTrace>& recovery_traces() const { return recovery_traces_; }
    const std::vector<SectionTrace>& section_traces() const { return section_traces_; }
    /// FNV-1a over the OutputBundle stream of every core (determinism probe).
    uint64_t output_trace_hash() const { return trace_hash_.digest(); }

    const ClusterConfig& config() const { return cfg_; }
    Word stack_top(int core_id) const;
    Word perf_stack_top(int core_id) const;

    /// Forces the error/recovery policy for a group (test hook, equivalent
    /// to a checker/voter mismatch in the current cycle).
    void force_group_error(int vid);

private:
    struct Engine;
    struct EngineOp {
        std::string phase;
        uint64_t cycles = 1;
        std::function<void(Cluster&, Engine&)> at_start;
        std::function<void(Cluster&, Engine&)> at_end;
        bool count_in_trace = true;
    };
    struct Engine {
        std::deque<EngineOp> ops;
        uint64_t remaining = 0;
        bool started = false;
        bool finished = false;
        bool abort_requested = false;
        int group_vid = 0;
        uint64_t start_cycle = 0;
        std::vector<RecoveryPhase> phases; // accumulated phase cycles
        std::function<void(Cluster&, Engine&)> on_complete;
        bool is_recovery = false;
        RecoveryTrace rtrace;
        void add_phase(const std::string& name, uint64_t cycles);
    };
    struct PerfSection {
        Mode mode = Mode::Dmr;
        std::vector<int> members;
        Variant entry_variant = Variant::Sw;
    };

    void step_group(Group& g, std::vector<Tcdm::Request>& mem_reqs);
    void route_request(int vid, const OutputBundle& out, std::vector<Tcdm::Request>& mem_reqs);
    void handle_group_error(Group& g, bool group_failure);
    void apply_due_faults();
    void apply_set_flip(const FaultEvent& e, OutputBundle& out) const;
    void tick_engine(Engine& e);

    void start_rapid_recovery(Group& g);
    void start_tcls_recovery(Group& g);
    void start_cluster_restart(Group& g);
    void push_restore_ops(Engine& e, int vid, std::shared_ptr<RecoveryRegion::Decoded> dec);
    void push_tcls_reload_op(Engine& e, int vid, uint64_t cycles);

    // protocol helpers
    ArchState voted_state(const Group& g) const;
    void write_frame(Word addr, const ArchState& s, bool include_sp);
    ArchState read_frame(Word addr, bool include_sp) const;
    Word frame_words(bool include_sp) const;
    void apply_state_to_group(Group& g, const ArchState& s);
    bool members_consistent(const Group& g) const;
    void claim_group(int vid);
    void release_group(int vid);
    Group& form_group(int main_id, Mode mode);
    void dissolve_group(int vid);
    void refresh_worker_view();
    void run_engines_to_completion();
    uint64_t functional_phase_cycles(uint64_t words) const;

    Engine& new_engine(int vid);

    ClusterConfig cfg_;
    std::vector<std::unique_ptr<Core>> cores_;
    Tcdm tcdm_;
    EventUnit event_unit_;
    Program program_;

    std::vector<Group> groups_;
    std::map<int, MemResponse> resp_;
    std::map<int, Word> sp_regs_;
    std::map<int, Word> mode_req_;
    std::map<int, PerfSection> perf_sections_;
    std::set<int> exited_;
    uint64_t cycle_ = 0;
    int restarts_ = 0;

    std::vector<FaultEvent> pending_faults_;
    std::vector<FaultEvent> set_flips_now_;

    std::vector<std::unique_ptr<Engine>> engines_;
    std::vector<RecoveryTrace> recovery_traces_;
    std::vector<SectionTrace> section_traces_;
    Fnv1a trace_hash_;
};

} // namespace hmr
