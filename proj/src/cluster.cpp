#include "hmrsim/cluster.hpp"

#include <algorithm>
#include <stdexcept>

namespace hmr {

void Cluster::Engine::add_phase(const std::string& name, uint64_t cycles) {
    if (!phases.empty() && phases.back().name == name)
        phases.back().cycles += cycles;
    else
        phases.push_back({name, cycles});
}

Cluster::Cluster(const ClusterConfig& cfg)
    : cfg_(cfg), tcdm_(cfg.tcdm_size, cfg.banking_factor * cfg.n_cores) {
    if (cfg.n_cores <= 0) throw std::invalid_argument("n_cores must be positive");
    CoreParams cp{cfg.boot_addr, cfg.mtvec, 4};
    for (int i = 0; i < cfg.n_cores; ++i) cores_.push_back(std::make_unique<Core>(i, cp));
    for (int i = 0; i < cfg.n_cores; ++i) {
        Group g;
        g.members = {i};
        g.vid = i;
        g.region.seed_from(cores_[i]->state());
        groups_.push_back(std::move(g));
    }
    refresh_worker_view();
}

void Cluster::refresh_worker_view() {
    std::vector<int> vids;
    vids.reserve(groups_.size());
    for (const auto& g : groups_) vids.push_back(g.vid);
    std::sort(vids.begin(), vids.end());
    int nw = static_cast<int>(vids.size());
    for (auto& g : groups_)
        for (int m : g.members) {
            cores_[m]->virtual_id = g.vid;
            cores_[m]->n_workers = nw;
        }
    event_unit_.set_participants(vids);
}

void Cluster::set_mode_all(Mode m) {
    if (!engines_.empty()) throw std::logic_error("cannot regroup while engines are active");
    groups_.clear();
    auto add_group = [this](Mode mode, std::vector<int> members) {
        Group g;
        g.mode = mode;
        g.vid = members.front();
        g.members = std::move(members);
        g.region.seed_from(cores_[g.members[0]]->state());
        groups_.push_back(std::move(g));
    };
    const int n = n_cores();
    if (m == Mode::Independent) {
        for (int i = 0; i < n; ++i) add_group(m, {i});
    } else if (m == Mode::Dmr) {
        for (int i = 0; i < n / 2; ++i) add_group(m, {i, dmr_partner(i, n)});
    } else {
        for (int i = 0; i < n / 3; ++i) {
            auto [a, b] = tmr_partners(i, n);
            add_group(m, {i, a, b});
        }
    }
    exited_.clear();
    resp_.clear();
    refresh_worker_view();
}

Group& Cluster::group_of(int vid) {
    for (auto& g : groups_)
        if (g.vid == vid) return g;
    throw std::out_of_range("no group with virtual id " + std::to_string(vid));
}

std::vector<int> Cluster::active_vids() const {
    std::vector<int> vids;
    for (const auto& g : groups_) vids.push_back(g.vid);
    std::sort(vids.begin(), vids.end());
    return vids;
}

bool Cluster::all_exited() const {
    for (const auto& g : groups_)
        if (exited_.count(g.vid) == 0) return false;
    return true;
}

uint64_t Cluster::total_errors() const {
    uint64_t t = 0;
    for (const auto& g : groups_) t += g.error_count;
    return t;
}

Word Cluster::stack_top(int core_id) const {
    return cfg_.tcdm_base + static_cast<Word>(cfg_.tcdm_size) -
           static_cast<Word>(core_id) * static_cast<Word>(cfg_.stack_bytes_per_core);
}

Word Cluster::perf_stack_top(int core_id) const {
    return stack_top(cfg_.n_cores + core_id);
}

Word Cluster::sp_reg(int vid) const {
    auto it = sp_regs_.find(vid);
    return it == sp_regs_.end() ? 0 : it->second;
}

void Cluster::set_sp_reg(int vid, Word v) { sp_regs_[vid] = v; }

bool Cluster::idle() const {
    if (!engines_.empty()) return false;
    return all_exited();
}

Cluster::RunResult Cluster::run(uint64_t max_cycles) {
    while (cycle_ < max_cycles && !idle()) cycle();
    RunResult r;
    r.cycles = cycle_;
    r.completed = idle();
    r.hung = !r.completed;
    return r;
}

// ---------------------------------------------------------------- faults

void Cluster::schedule_fault(const FaultEvent& e) {
    if (e.target_core < 0 || e.target_core >= n_cores())
        throw std::invalid_argument("fault target out of range");
    if (e.bit < 0) throw std::invalid_argument("negative bit index");
    switch (e.loc) {
    case FaultEvent::Loc::RfBit:
        if (e.kind != FaultEvent::Kind::Seu) throw std::invalid_argument("state faults are SEUs");
        if (e.reg < 1 || e.reg > 31) throw std::invalid_argument("RF fault register must be 1..31");
        if (e.bit > 31) throw std::invalid_argument("RF fault bit out of range");
        break;
    case FaultEvent::Loc::PcBit:
        if (e.kind != FaultEvent::Kind::Seu) throw std::invalid_argument("state faults are SEUs");
        if (e.bit > 31) throw std::invalid_argument("PC fault bit out of range");
        break;
    case FaultEvent::Loc::CsrBit:
        if (e.kind != FaultEvent::Kind::Seu) throw std::invalid_argument("state faults are SEUs");
        if (e.csr == CsrId::MstatusMie ? e.bit != 0 : e.bit > 31)
            throw std::invalid_argument("CSR fault bit out of range");
        break;
    case FaultEvent::Loc::InterfaceBit:
        if (e.kind != FaultEvent::Kind::Set)
            throw std::invalid_argument("interface faults are SETs");
        switch (e.field) {
        case FaultEvent::Field::Valid:
        case FaultEvent::Field::We:
            if (e.bit != 0) throw std::invalid_argument("single-bit field");
            break;
        case FaultEvent::Field::ByteEn:
            if (e.bit > 3) throw std::invalid_argument("byte-enable fault bit out of range");
            break;
        default:
            if (e.bit > 31) throw std::invalid_argument("interface fault bit out of range");
        }
        break;
    }
    pending_faults_.push_back(e);
}

void Cluster::apply_due_faults() {
    for (auto it = pending_faults_.begin(); it != pending_faults_.end();) {
        if (it->cycle > cycle_) {
            ++it;
            continue;
        }
        const FaultEvent f = *it;
        it = pending_faults_.erase(it);
        if (f.kind == FaultEvent::Kind::Set) {
            set_flips_now_.push_back(f);
            continue;
        }
        ArchState& s = cores_[f.target_core]->state();
        const Word m = 1u << f.bit;
        switch (f.loc) {
        case FaultEvent::Loc::RfBit: s.rf[f.reg] ^= m; break;
        case FaultEvent::Loc::PcBit: s.pc ^= m; break;
        case FaultEvent::Loc::CsrBit: s.csr.write(f.csr, s.csr.read(f.csr) ^ m); break;
        default: break;
        }
    }
}

void Cluster::apply_set_flip(const FaultEvent& e, OutputBundle& out) const {
    const Word m = 1u << e.bit;
    switch (e.field) {
    case FaultEvent::Field::IfetchAddr: out.ifetch_addr ^= m; break;
    case FaultEvent::Field::Valid: out.req.valid ^= 1u; break;
    case FaultEvent::Field::Addr: out.req.addr ^= m; break;
    case FaultEvent::Field::Wdata: out.req.wdata ^= m; break;
    case FaultEvent::Field::We: out.req.we ^= 1u; break;
    case FaultEvent::Field::ByteEn: out.req.byte_en ^= m; break;
    }
}

// ------------------------------------------------------------ cycle loop

void Cluster::cycle() {
    ++cycle_;
    apply_due_faults();
    for (size_t i = 0; i < engines_.size(); ++i) tick_engine(*engines_[i]);
    std::erase_if(engines_, [](const auto& e) { return e->finished; });

    std::vector<Tcdm::Request> reqs;
    for (auto& g : groups_)
        if (!g.engine_active) step_group(g, reqs);

    for (const auto& res : tcdm_.cycle(reqs)) {
        switch (res.status) {
        case Tcdm::Result::Status::Grant:
            resp_[res.requester] = MemResponse{MemResponse::Kind::Data, res.rdata};
            break;
        case Tcdm::Result::Status::Stall:
            resp_[res.requester] = MemResponse{MemResponse::Kind::Stall, 0};
            break;
        case Tcdm::Result::Status::BusError:
            resp_[res.requester] = MemResponse{MemResponse::Kind::BusError, 0};
            break;
        }
    }

    if (event_unit_.barrier_complete()) {
        for (int w : event_unit_.waiters()) resp_[w] = MemResponse{MemResponse::Kind::Data, 0};
        event_unit_.clear_waiters();
    }
    set_flips_now_.clear();
}

void Cluster::step_group(Group& g, std::vector<Tcdm::Request>& mem_reqs) {
    MemResponse resp{};
    if (auto it = resp_.find(g.vid); it != resp_.end()) {
        resp = it->second;
        resp_.erase(it);
    }
    const bool irq = event_unit_.irq_pending(g.vid);
    const Word irq_cause = event_unit_.irq_cause(g.vid);

    const int n = static_cast<int>(g.members.size());
    std::array<Core::StepResult, 3> sr;
    for (int i = 0; i < n; ++i)
        sr[i] = cores_[g.members[i]]->step(resp, irq, irq_cause, program_);

    for (const auto& f : set_flips_now_)
        for (int i = 0; i < n; ++i)
            if (g.members[i] == f.target_core) apply_set_flip(f, sr[i].out);

    int taken = 0;
    for (int i = 0; i < n; ++i) taken += sr[i].irq_taken ? 1 : 0;
    if (2 * taken > n) event_unit_.clear_irq(g.vid);

    const bool rapid = cfg_.options.rapid_recovery_enabled;
    OutputBundle vout;
    bool error = false;
    bool gfail = false;
    if (n == 1) {
        vout = sr[0].out;
    } else if (n == 2) {
        auto cr = check_pair(sr[0].out, sr[1].out);
        error = cr.error || (rapid && !(sr[0].ports == sr[1].ports));
        vout = error ? OutputBundle{} : cr.output;
    } else {
        auto vr = vote_triple(sr[0].out, sr[1].out, sr[2].out);
        const bool port_err =
            rapid && !(sr[0].ports == sr[1].ports && sr[1].ports == sr[2].ports);
        error = vr.error || port_err;
        gfail = vr.group_failure;
        vout = vr.output;
    }

    for (int i = 0; i < n; ++i) {
        const OutputBundle& o = sr[i].out;
        trace_hash_.update_u32(o.ifetch_addr);
        trace_hash_.update_u32(o.req.valid);
        trace_hash_.update_u32(o.req.addr);
        trace_hash_.update_u32(o.req.wdata);
        trace_hash_.update_u32(o.req.we);
        trace_hash_.update_u32(o.req.byte_en);
    }

    if (rapid) g.region.commit(sr[0].ports, error);

    if (error) {
        ++g.error_count;
        handle_group_error(g, gfail);
    }
    if (g.gated || g.engine_active) return; // output toward the system dropped
    if (vout.req.valid) route_request(g.vid, vout, mem_reqs);
}

void Cluster::route_request(int vid, const OutputBundle& out, std::vector<Tcdm::Request>& mem_reqs) {
    const DataReq& q = out.req;
    const Word a = q.addr;
    if (a >= cfg_.periph_base && a < cfg_.periph_base + periph::kWindow) {
        const Word off = a - cfg_.periph_base;
        if (off < hmr_reg::kWindowSize) {
            auto ca = config_access(off, q.we != 0, q.wdata);
            resp_[vid] = ca.bus_error ? MemResponse{MemResponse::Kind::BusError, 0}
                                      : MemResponse{MemResponse::Kind::Data, ca.rdata};
        } else if (off == periph::kEventOffset) {
            if (q.we)
                resp_[vid] = MemResponse{MemResponse::Kind::Data, 0};
            else
                event_unit_.arrive(vid); // blocking; answered on completion
        } else if (off == periph::kSimCtrlOffset && q.we) {
            exited_.insert(vid);
            resp_[vid] = MemResponse{MemResponse::Kind::Data, 0};
        } else {
            resp_[vid] = MemResponse{MemResponse::Kind::BusError, 0};
        }
        return;
    }
    if (a >= cfg_.tcdm_base && a < cfg_.tcdm_base + cfg_.tcdm_size) {
        DataReq rel = q;
        rel.addr = a - cfg_.tcdm_base;
        mem_reqs.push_back({vid, rel});
        return;
    }
    resp_[vid] = MemResponse{MemResponse::Kind::BusError, 0};
}

void Cluster::handle_group_error(Group& g, bool group_failure) {
    const bool rapid = cfg_.options.rapid_recovery_enabled;
    if (g.mode == Mode::Dmr) {
        g.gated = true; // no majority: never let a mismatching cycle out
        if (rapid)
            start_rapid_recovery(g);
        else
            start_cluster_restart(g);
        return;
    }
    if (g.mode != Mode::Tmr) return; // independent cores have no checker
    if (rapid) {
        g.gated = true;
        start_rapid_recovery(g);
        return;
    }
    if (group_failure) {
        // no slot matches the majority: state voting is unreliable too
        g.tmr_first_error_pending = false;
        start_cluster_restart(g);
        return;
    }
    if (cfg_.options.tmr_delayed_resync && !g.tmr_first_error_pending) {
        g.tmr_first_error_pending = true; // resync deferred to the next error
        return;
    }
    g.tmr_first_error_pending = false;
    start_tcls_recovery(g);
}

// ------------------------------------------------------- register surface

Cluster::ConfigAccess Cluster::config_access(Word offset, bool write, Word value) {
    ConfigAccess r;
    auto index_in = [offset](Word base, int count) -> int {
        if (offset < base || offset >= base + 4u * static_cast<Word>(count)) return -1;
        if ((offset - base) % 4 != 0) return -1;
        return static_cast<int>((offset - base) / 4);
    };
    if (offset == hmr_reg::kNumCores) {
        if (write) {
            r.bus_error = true;
            return r;
        }
        r.rdata = static_cast<Word>(n_cores());
        return r;
    }
    if (int i = index_in(hmr_reg::kModeReqBase, n_cores()); i >= 0) {
        if (write) {
            if (value > 2) {
                r.bus_error = true;
                return r;
            }
            const Mode m = static_cast<Mode>(value);
            try {
                std::vector<int> parts{i};
                if (m == Mode::Dmr) parts.push_back(dmr_partner(i, n_cores()));
                if (m == Mode::Tmr) {
                    auto [a, b] = tmr_partners(i, n_cores());
                    parts.push_back(a);
                    parts.push_back(b);
                }
                mode_req_[i] = value;
                for (int p : parts) event_unit_.raise_irq(p, cause::kResyncIrq);
            } catch (const std::invalid_argument&) {
                r.bus_error = true;
            }
            return r;
        }
        auto it = mode_req_.find(i);
        r.rdata = it == mode_req_.end() ? 0 : it->second;
        return r;
    }
    if (int i = index_in(hmr_reg::kModeStatBase, n_cores()); i >= 0) {
        if (write) {
            r.bus_error = true;
            return r;
        }
        for (const auto& g : groups_)
            if (g.vid == i) r.rdata = static_cast<Word>(g.mode);
        return r;
    }
    if (int i = index_in(hmr_reg::kSpRegBase, n_cores()); i >= 0) {
        if (write)
            sp_regs_[i] = value;
        else
            r.rdata = sp_reg(i);
        return r;
    }
    if (int i = index_in(hmr_reg::kErrCountBase, n_cores()); i >= 0) {
        if (write) {
            r.bus_error = true;
            return r;
        }
        for (const auto& g : groups_)
            if (g.vid == i) r.rdata = static_cast<Word>(g.error_count);
        return r;
    }
    r.bus_error = true;
    return r;
}

// ---------------------------------------------------------------- engines

Cluster::Engine& Cluster::new_engine(int vid) {
    engines_.push_back(std::make_unique<Engine>());
    Engine& e = *engines_.back();
    e.group_vid = vid;
    e.start_cycle = cycle_;
    return e;
}

void Cluster::tick_engine(Engine& e) {
    if (e.finished) return;
    if (e.ops.empty()) {
        e.finished = true;
        return;
    }
    {
        EngineOp& op = e.ops.front();
        if (!e.started) {
            e.remaining = op.cycles == 0 ? 1 : op.cycles;
            e.started = true;
            if (op.at_start) op.at_start(*this, e);
            if (e.abort_requested) {
                e.ops.clear();
                e.finished = true;
                if (e.on_complete) e.on_complete(*this, e);
                return;
            }
        }
    }
    if (--e.remaining > 0) return;
    EngineOp done = std::move(e.ops.front());
    e.ops.pop_front();
    e.started = false;
    if (done.at_end) done.at_end(*this, e);
    if (done.count_in_trace) e.add_phase(done.phase, done.cycles);
    if (e.abort_requested || e.ops.empty()) {
        e.ops.clear();
        e.finished = true;
        if (e.on_complete) e.on_complete(*this, e);
    }
}

void Cluster::run_engines_to_completion() {
    uint64_t guard = 0;
    while (!engines_.empty()) {
        cycle();
        if (++guard > 10'000'000ull) throw std::runtime_error("engine failed to converge");
    }
}

void Cluster::claim_group(int vid) {
    Group& g = group_of(vid);
    g.engine_active = true;
    event_unit_.remove_waiter(vid);
    resp_.erase(vid);
}

void Cluster::release_group(int vid) { group_of(vid).engine_active = false; }

// ------------------------------------------------------- recovery engines

void Cluster::start_rapid_recovery(Group& g) {
    g.region.write_blocked = true;
    g.gated = true;
    claim_group(g.vid);
    const int vid = g.vid;
    Engine& e = new_engine(vid);
    e.is_recovery = true;
    e.rtrace.kind = "rapid";
    e.rtrace.group = vid;
    e.rtrace.start_cycle = cycle_;
    auto dec = std::make_shared<RecoveryRegion::Decoded>();
    const RapidBudgets b;
    e.ops.push_back(
        {"clear", static_cast<uint64_t>(b.setup_clear),
         [vid, dec](Cluster& c, Engine& en) {
             Group& g = c.group_of(vid);
             *dec = g.region.decode();
             en.rtrace.ecc_corrections = dec->corrections;
             en.rtrace.ecc_uncorrectable = dec->uncorrectable;
             // an uncorrectable backup word aborts before state is destroyed
             if (dec->uncorrectable) en.abort_requested = true;
             else
                 for (int m : g.members) c.core(m).synchronous_clear();
         },
         {}});
    e.ops.push_back({"halt", static_cast<uint64_t>(b.halt_ack),
                     [vid](Cluster& c, Engine&) {
                         for (int m : c.group_of(vid).members) c.core(m).debug_halt_request();
                     },
                     [vid](Cluster& c, Engine&) {
                         for (int m : c.group_of(vid).members) c.core(m).debug_halt_ack();
                     }});
    push_restore_ops(e, vid, dec);
    e.on_complete = [vid](Cluster& c, Engine& en) {
        Group& g = c.group_of(vid);
        en.rtrace.phases = en.phases;
        if (en.rtrace.ecc_uncorrectable) {
            en.rtrace.escalated = true;
            c.recovery_traces_.push_back(en.rtrace);
            g.gated = false;
            g.region.write_blocked = false;
            g.engine_active = false;
            if (g.mode == Mode::Tmr)
                c.start_tcls_recovery(g);
            else
                c.start_cluster_restart(g);
            return;
        }
        for (int m : g.members) {
            c.core(m).debug_resume();
            c.core(m).cancel_pending_request();
        }
        g.gated = false;
        g.region.write_blocked = false;
        g.engine_active = false;
        c.resp_.erase(vid);
        c.recovery_traces_.push_back(en.rtrace);
    };
}

void Cluster::push_restore_ops(Engine& e, int vid, std::shared_ptr<RecoveryRegion::Decoded> dec) {
    // 31 registers over two write ports: 16 single-cycle transfers, with
    // the PC and CSRs riding along on the first one.
    for (int k = 0; k < 16; ++k) {
        e.ops.push_back({"restore", 1, {},
                         [vid, dec, k](Cluster& c, Engine& en) {
                             Group& g = c.group_of(vid);
                             const ArchState& s = dec->state;
                             std::optional<Word> pc;
                             std::vector<RfWrite> rf;
                             std::vector<CsrWrite> csrs;
                             if (k == 0) {
                                 pc = s.pc;
                                 csrs = {{CsrId::Mepc, s.csr.mepc},
                                         {CsrId::Mcause, s.csr.mcause},
                                         {CsrId::Mtvec, s.csr.mtvec},
                                         {CsrId::MstatusMie, s.csr.mstatus_mie}};
                                 rf = {{1, s.rf[1]}, {2, s.rf[2]}};
                             } else {
                                 const int r0 = 2 * k + 1, r1 = 2 * k + 2;
                                 rf.push_back({static_cast<uint8_t>(r0), s.rf[r0]});
                                 if (r1 < 32) rf.push_back({static_cast<uint8_t>(r1), s.rf[r1]});
                             }
                             for (int m : g.members) c.core(m).debug_write_state(pc, rf, csrs);
                             // a fault inside the restore window forces a redo
                             if (k == 15 && !c.members_consistent(g))
                                 c.push_restore_ops(en, vid, dec);
                         }});
    }
}

void Cluster::start_tcls_recovery(Group& g) {
    claim_group(g.vid);
    g.tcls_state = TclsState::Unload;
    const int vid = g.vid;
    Engine& e = new_engine(vid);
    e.is_recovery = true;
    e.rtrace.kind = "tcls_sw";
    e.rtrace.group = vid;
    e.rtrace.start_cycle = cycle_;
    auto saved = std::make_shared<ArchState>();
    const uint64_t unload_c =
        cfg_.calibrated ? cfg_.calib.tcls_unload : functional_phase_cycles(frame_words(false));
    const uint64_t reload_c =
        cfg_.calibrated ? cfg_.calib.tcls_reload : functional_phase_cycles(frame_words(false));
    e.ops.push_back({"unload", unload_c,
                     [vid, saved](Cluster& c, Engine&) { *saved = c.voted_state(c.group_of(vid)); },
                     [vid, saved](Cluster& c, Engine&) {
                         Group& g = c.group_of(vid);
                         saved->csr.mepc = saved->pc;
                         Word sp = saved->rf[2];
                         const Word need = 4 * c.frame_words(false);
                         if (sp < c.cfg_.tcdm_base + need ||
                             sp > c.cfg_.tcdm_base + static_cast<Word>(c.cfg_.tcdm_size)) {
                             sp = c.stack_top(vid); // corrupted SP: dedicated stack
                             saved->rf[2] = sp;
                         }
                         const Word frame = sp - need;
                         c.write_frame(frame, *saved, false);
                         c.sp_regs_[vid] = frame;
                         if (c.cfg_.options.sync_clear_on_recovery)
                             for (int m : g.members) c.core(m).synchronous_clear();
                         g.tcls_state = TclsState::Reload;
                     }});
    push_tcls_reload_op(e, vid, reload_c);
    e.on_complete = [vid](Cluster& c, Engine& en) {
        Group& g = c.group_of(vid);
        en.rtrace.phases = en.phases;
        for (int m : g.members) {
            c.core(m).debug_resume();
            c.core(m).cancel_pending_request();
        }
        g.engine_active = false;
        g.gated = false;
        g.tcls_state = TclsState::Run;
        c.resp_.erase(vid);
        if (c.cfg_.options.rapid_recovery_enabled) {
            g.region.seed_from(c.core(g.members[0]).state());
            g.region.write_blocked = false;
        }
        c.recovery_traces_.push_back(en.rtrace);
    };
}

void Cluster::push_tcls_reload_op(Engine& e, int vid, uint64_t cycles) {
    e.ops.push_back({"reload", cycles,
                     [vid](Cluster& c, Engine&) {
                         Group& g = c.group_of(vid);
                         c.apply_state_to_group(g, c.read_frame(c.sp_regs_[vid], false));
                     },
                     [vid, cycles](Cluster& c, Engine& en) {
                         Group& g = c.group_of(vid);
                         if (!c.members_consistent(g)) {
                             // a fault landed inside the reload window: clear
                             // and redo the reload (the frame is intact)
                             if (c.cfg_.options.sync_clear_on_recovery)
                                 for (int m : g.members) c.core(m).synchronous_clear();
                             c.push_tcls_reload_op(en, vid, cycles);
                             return;
                         }
                         c.sp_regs_[vid] = 0;
                         g.tcls_state = TclsState::Run;
                     }});
}

void Cluster::start_cluster_restart(Group& trigger) {
    for (auto& g : groups_) {
        g.gated = true;
        g.engine_active = true;
    }
    Engine& e = new_engine(trigger.vid);
    e.is_recovery = true;
    e.rtrace.kind = "restart";
    e.rtrace.group = trigger.vid;
    e.rtrace.start_cycle = cycle_;
    e.ops.push_back({"restart", 1, {}, [](Cluster& c, Engine& en) {
                         for (auto& other : c.engines_)
                             if (other.get() != &en) other->finished = true;
                         for (int i = 0; i < c.n_cores(); ++i) c.core(i).synchronous_clear();
                         c.exited_.clear();
                         c.resp_.clear();
                         c.event_unit_.clear_waiters();
                         c.sp_regs_.clear();
                         for (auto& g : c.groups_) {
                             c.event_unit_.clear_irq(g.vid);
                             g.gated = false;
                             g.engine_active = false;
                             g.tmr_first_error_pending = false;
                             g.tcls_state = TclsState::Run;
                             g.region.seed_from(c.core(g.members[0]).state());
                             g.region.write_blocked = false;
                         }
                         ++c.restarts_;
                     }});
    e.on_complete = [](Cluster& c, Engine& en) {
        en.rtrace.phases = en.phases;
        c.recovery_traces_.push_back(en.rtrace);
    };
}

// ------------------------------------------------------- protocol helpers

ArchState Cluster::voted_state(const Group& g) const {
    if (g.members.size() < 3) return cores_[g.members[0]]->state();
    auto maj = [](Word a, Word b, Word c) { return (a & b) | (b & c) | (a & c); };
    const ArchState& a = cores_[g.members[0]]->state();
    const ArchState& b = cores_[g.members[1]]->state();
    const ArchState& c = cores_[g.members[2]]->state();
    ArchState s;
    s.pc = maj(a.pc, b.pc, c.pc);
    for (int i = 1; i < 32; ++i) s.rf[i] = maj(a.rf[i], b.rf[i], c.rf[i]);
    s.csr.mepc = maj(a.csr.mepc, b.csr.mepc, c.csr.mepc);
    s.csr.mcause = maj(a.csr.mcause, b.csr.mcause, c.csr.mcause);
    s.csr.mtvec = maj(a.csr.mtvec, b.csr.mtvec, c.csr.mtvec);
    s.csr.mstatus_mie = maj(a.csr.mstatus_mie, b.csr.mstatus_mie, c.csr.mstatus_mie);
    return s;
}

Word Cluster::frame_words(bool include_sp) const { return include_sp ? 36 : 35; }

void Cluster::write_frame(Word addr, const ArchState& s, bool include_sp) {
    const Word words = frame_words(include_sp);
    if (addr < cfg_.tcdm_base || addr + 4 * words > cfg_.tcdm_base + cfg_.tcdm_size) return;
    Word rel = addr - cfg_.tcdm_base;
    auto put = [&](Word v) {
        tcdm_.store_word(rel, v);
        rel += 4;
    };
    put(s.pc);
    put(s.csr.mepc);
    put(s.csr.mcause);
    put(s.csr.mtvec);
    put(s.csr.mstatus_mie);
    for (int i = 1; i < 32; ++i)
        if (include_sp || i != 2) put(s.rf[i]);
}

ArchState Cluster::read_frame(Word addr, bool include_sp) const {
    ArchState s;
    const Word words = frame_words(include_sp);
    if (addr < cfg_.tcdm_base || addr + 4 * words > cfg_.tcdm_base + cfg_.tcdm_size) return s;
    Word rel = addr - cfg_.tcdm_base;
    auto get = [&]() {
        Word v = tcdm_.load_word(rel);
        rel += 4;
        return v;
    };
    s.pc = get();
    s.csr.mepc = get();
    s.csr.mcause = get();
    s.csr.mtvec = get();
    s.csr.mstatus_mie = get() & 1u;
    for (int i = 1; i < 32; ++i)
        if (include_sp || i != 2) s.rf[i] = get();
    if (!include_sp) s.rf[2] = addr + 4 * words; // SP reconstructed from the frame base
    return s;
}

void Cluster::apply_state_to_group(Group& g, const ArchState& s) {
    for (int m : g.members) {
        Core& c = *cores_[m];
        c.debug_resume();
        c.cancel_pending_request();
        ArchState ns = s;
        ns.halted = false;
        c.state() = ns;
    }
}

bool Cluster::members_consistent(const Group& g) const {
    const ArchState& ref = cores_[g.members[0]]->state();
    for (size_t i = 1; i < g.members.size(); ++i)
        if (!arch_payload_equal(ref, cores_[g.members[i]]->state())) return false;
    return true;
}

Group& Cluster::form_group(int main_id, Mode mode) {
    std::vector<int> members{main_id};
    if (mode == Mode::Dmr) {
        members.push_back(dmr_partner(main_id, n_cores()));
    } else if (mode == Mode::Tmr) {
        auto [a, b] = tmr_partners(main_id, n_cores());
        members.push_back(a);
        members.push_back(b);
    } else {
        throw std::invalid_argument("cannot form an independent group");
    }
    RecoveryRegion region = group_of(main_id).region;
    const uint64_t errs = group_of(main_id).error_count;
    std::erase_if(groups_, [&members](const Group& g) {
        return std::find(members.begin(), members.end(), g.vid) != members.end();
    });
    Group g;
    g.mode = mode;
    g.members = members;
    g.vid = main_id;
    g.engine_active = true;
    g.region = region;
    g.error_count = errs;
    groups_.push_back(std::move(g));
    for (int m : members) exited_.erase(m);
    refresh_worker_view();
    return groups_.back();
}

void Cluster::dissolve_group(int vid) {
    const Group old = group_of(vid);
    std::erase_if(groups_, [vid](const Group& g) { return g.vid == vid; });
    for (int m : old.members) {
        Group s;
        s.members = {m};
        s.vid = m;
        s.error_count = m == vid ? old.error_count : 0;
        s.region.seed_from(cores_[m]->state());
        groups_.push_back(std::move(s));
    }
    refresh_worker_view();
}

void Cluster::force_group_error(int vid) {
    Group& g = group_of(vid);
    if (g.mode == Mode::Independent)
        throw std::invalid_argument("independent cores have no checker");
    ++g.error_count;
    handle_group_error(g, false);
}

// --------------------------------------------------- split-lock protocol

SectionTrace Cluster::enter_mission_critical(int main_id, Mode mode, Variant variant) {
    if (mode == Mode::Independent) throw std::invalid_argument("lock mode must be DMR or TMR");
    if (variant == Variant::Rapid && !cfg_.options.rapid_recovery_enabled)
        throw std::invalid_argument("rapid split-lock requires rapid recovery");
    std::vector<int> members{main_id};
    if (mode == Mode::Dmr) {
        members.push_back(dmr_partner(main_id, n_cores()));
    } else {
        auto [a, b] = tmr_partners(main_id, n_cores());
        members.push_back(a);
        members.push_back(b);
    }
    for (int m : members) {
        const Group& g = group_of(m); // throws if m is grouped as a helper
        if (g.mode != Mode::Independent || g.engine_active)
            throw std::invalid_argument("participants must be free independent cores");
    }

    SectionLatency lat;
    if (cfg_.calibrated) {
        lat = cfg_.calib.mc_entry(mode, variant);
    } else {
        lat.setup = 10;
        lat.unload = functional_phase_cycles(frame_words(false));
        lat.reload = functional_phase_cycles(frame_words(false));
        lat.hw_fill = RapidBudgets{}.total();
    }

    const size_t base = section_traces_.size();
    const int vid = main_id;
    const bool sw = variant == Variant::Sw;
    Engine& e = new_engine(vid);
    auto saved = std::make_shared<std::map<int, ArchState>>();

    e.ops.push_back(
        {"setup", lat.setup, [vid](Cluster& c, Engine&) { c.claim_group(vid); },
         [vid, members, saved](Cluster& c, Engine&) {
             // resynchronization interrupt: every participant's context is
             // captured with mepc pointing at the interrupted instruction
             for (int m : members) {
                 if (m != vid) c.claim_group(m);
                 ArchState st = c.core(m).state();
                 st.csr.mepc = st.pc;
                 (*saved)[m] = st;
             }
         }});
    e.ops.push_back({"unload", lat.unload, {},
                     [vid, members, saved, sw](Cluster& c, Engine&) {
                         for (int m : members) {
                             if (m == vid && !sw) continue; // backup region holds the main context
                             const ArchState& st = (*saved)[m];
                             Word sp = st.rf[2];
                             const Word need = 4 * c.frame_words(false);
                             if (sp < c.cfg_.tcdm_base + need ||
                                 sp > c.cfg_.tcdm_base + static_cast<Word>(c.cfg_.tcdm_size))
                                 sp = c.stack_top(m);
                             c.write_frame(sp - need, st, false);
                             c.sp_regs_[m] = sp - need;
                         }
                     }});
    e.ops.push_back(
        {sw ? "reload" : "hw_fill", sw ? lat.reload : lat.hw_fill,
         [vid, mode](Cluster& c, Engine&) { c.form_group(vid, mode); },
         [vid, sw, variant, saved](Cluster& c, Engine&) {
             Group& g = c.group_of(vid);
             ArchState s = sw ? c.read_frame(c.sp_regs_[vid], false) : (*saved)[vid];
             c.apply_state_to_group(g, s);
             c.sp_regs_[vid] = 0;
             g.entry_variant = variant;
             if (c.cfg_.options.rapid_recovery_enabled) {
                 g.region.seed_from(s);
                 g.region.write_blocked = false;
             }
         }});
    e.on_complete = [vid](Cluster& c, Engine& en) {
        Group& g = c.group_of(vid);
        g.engine_active = false;
        SectionTrace t;
        t.kind = SectionKind::MissionCritical;
        t.direction = SectionDirection::Entry;
        t.role = "main";
        t.group = vid;
        t.start_cycle = en.start_cycle;
        for (const auto& p : en.phases) t.phases.push_back({p.name, p.cycles});
        c.section_traces_.push_back(std::move(t));
    };
    run_engines_to_completion();
    for (size_t i = base; i < section_traces_.size(); ++i)
        if (section_traces_[i].group == vid &&
            section_traces_[i].direction == SectionDirection::Entry)
            return section_traces_[i];
    throw std::logic_error("entry trace missing");
}

std::pair<SectionTrace, std::vector<SectionTrace>> Cluster::exit_mission_critical(int main_id) {
    Group& g = group_of(main_id);
    if (g.mode == Mode::Independent) throw std::invalid_argument("group is not locked");
    const Mode mode = g.mode;
    const Variant var = g.entry_variant;
    uint64_t main_lat, helper_lat;
    if (cfg_.calibrated) {
        main_lat = mode == Mode::Dmr ? cfg_.calib.mc_exit_main_dmr : cfg_.calib.mc_exit_main_tmr;
        if (var == Variant::Rapid)
            helper_lat = mode == Mode::Dmr ? cfg_.calib.mc_exit_helper_rapid_dmr
                                           : cfg_.calib.mc_exit_helper_rapid_tmr;
        else
            helper_lat = mode == Mode::Dmr ? cfg_.calib.mc_exit_helper_sw_dmr
                                           : cfg_.calib.mc_exit_helper_sw_tmr;
    } else {
        main_lat = 6;
        helper_lat = functional_phase_cycles(frame_words(false)) + 10;
    }

    const size_t base = section_traces_.size();
    const int vid = main_id;
    Engine& e = new_engine(vid);
    e.ops.push_back(
        {"setup", main_lat, [vid](Cluster& c, Engine&) { c.claim_group(vid); },
         [vid, helper_lat](Cluster& c, Engine&) {
             const Group snap = c.group_of(vid);
             c.dissolve_group(vid); // the main core resumes immediately
             for (size_t i = 1; i < snap.members.size(); ++i) {
                 const int h = snap.members[i];
                 c.claim_group(h);
                 Engine& eh = c.new_engine(h);
                 eh.ops.push_back(
                     {"reload", helper_lat,
                      [h](Cluster& c2, Engine&) { c2.core(h).synchronous_clear(); },
                      [h](Cluster& c2, Engine&) {
                          // boot-path SP check: a non-zero SP register routes
                          // the cleared core into the context-restore path
                          const Word sp = c2.sp_reg(h);
                          if (sp != 0) {
                              ArchState s = c2.read_frame(sp, false);
                              s.halted = false;
                              c2.core(h).state() = s;
                              c2.core(h).cancel_pending_request();
                              c2.sp_regs_[h] = 0;
                          }
                          c2.group_of(h).region.seed_from(c2.core(h).state());
                      }});
                 eh.on_complete = [h](Cluster& c2, Engine& en) {
                     c2.group_of(h).engine_active = false;
                     SectionTrace t;
                     t.kind = SectionKind::MissionCritical;
                     t.direction = SectionDirection::Exit;
                     t.role = "helper";
                     t.group = h;
                     t.start_cycle = en.start_cycle;
                     for (const auto& p : en.phases) t.phases.push_back({p.name, p.cycles});
                     c2.section_traces_.push_back(std::move(t));
                 };
             }
         }});
    e.on_complete = [vid](Cluster& c, Engine& en) {
        SectionTrace t;
        t.kind = SectionKind::MissionCritical;
        t.direction = SectionDirection::Exit;
        t.role = "main";
        t.group = vid;
        t.start_cycle = en.start_cycle;
        for (const auto& p : en.phases) t.phases.push_back({p.name, p.cycles});
        c.section_traces_.push_back(std::move(t));
    };
    run_engines_to_completion();

    std::pair<SectionTrace, std::vector<SectionTrace>> out;
    bool have_main = false;
    for (size_t i = base; i < section_traces_.size(); ++i) {
        const SectionTrace& t = section_traces_[i];
        if (t.direction != SectionDirection::Exit) continue;
        if (t.role == "main" && t.group == vid) {
            out.first = t;
            have_main = true;
        } else if (t.role == "helper") {
            out.second.push_back(t);
        }
    }
    if (!have_main) throw std::logic_error("exit trace missing");
    return out;
}

SectionTrace Cluster::enter_performance(int main_id) {
    Group& g = group_of(main_id);
    if (g.mode == Mode::Independent) throw std::invalid_argument("group is not locked");
    const Mode mode = g.mode;
    uint64_t lat;
    if (cfg_.calibrated) {
        if (mode == Mode::Dmr)
            lat = g.entry_variant == Variant::Rapid ? cfg_.calib.perf_entry_rapid_dmr
                                                    : cfg_.calib.perf_entry_dmr;
        else
            lat = cfg_.calib.perf_entry_tmr;
    } else {
        lat = 8;
    }

    const size_t base = section_traces_.size();
    const int vid = main_id;
    Engine& e = new_engine(vid);
    e.ops.push_back({"setup", lat, [vid](Cluster& c, Engine&) { c.claim_group(vid); },
                     [vid](Cluster& c, Engine&) {
                         const Group snap = c.group_of(vid);
                         PerfSection ps;
                         ps.mode = snap.mode;
                         ps.members = snap.members;
                         ps.entry_variant = snap.entry_variant;
                         c.perf_sections_[vid] = ps;
                         const ArchState fork = c.core(vid).state();
                         c.dissolve_group(vid);
                         for (size_t i = 1; i < snap.members.size(); ++i) {
                             const int h = snap.members[i];
                             Core& hc = c.core(h);
                             ArchState s = fork;
                             s.halted = false;
                             s.rf[2] = c.perf_stack_top(h); // private stack for the forked worker
                             hc.state() = s;
                             hc.cancel_pending_request();
                             hc.debug_resume();
                             c.group_of(h).region.seed_from(hc.state());
                         }
                     }});
    e.on_complete = [vid](Cluster& c, Engine& en) {
        SectionTrace t;
        t.kind = SectionKind::Performance;
        t.direction = SectionDirection::Entry;
        t.role = "main";
        t.group = vid;
        t.start_cycle = en.start_cycle;
        for (const auto& p : en.phases) t.phases.push_back({p.name, p.cycles});
        c.section_traces_.push_back(std::move(t));
    };
    run_engines_to_completion();
    for (size_t i = base; i < section_traces_.size(); ++i)
        if (section_traces_[i].group == vid && section_traces_[i].kind == SectionKind::Performance)
            return section_traces_[i];
    throw std::logic_error("entry trace missing");
}

SectionTrace Cluster::exit_performance(int main_id, Variant variant) {
    auto it = perf_sections_.find(main_id);
    if (it == perf_sections_.end()) throw std::invalid_argument("no open performance section");
    const PerfSection ps = it->second;
    if (variant == Variant::Rapid && !cfg_.options.rapid_recovery_enabled)
        throw std::invalid_argument("rapid split-lock requires rapid recovery");
    {
        const Group& g = group_of(main_id);
        if (g.mode != Mode::Independent || g.engine_active)
            throw std::invalid_argument("main core is not running independently");
    }

    const bool sw = variant == Variant::Sw;
    SectionLatency lat;
    if (cfg_.calibrated) {
        if (sw)
            lat = ps.mode == Mode::Dmr ? cfg_.calib.perf_exit_sw_dmr : cfg_.calib.perf_exit_sw_tmr;
        else
            lat = ps.mode == Mode::Dmr ? cfg_.calib.perf_exit_rapid_dmr
                                       : cfg_.calib.perf_exit_rapid_tmr;
    } else {
        lat.setup = 6;
        lat.unload = functional_phase_cycles(frame_words(false));
        lat.reload = functional_phase_cycles(frame_words(false));
        lat.hw_fill = RapidBudgets{}.total();
    }

    const size_t base = section_traces_.size();
    const int vid = main_id;
    Engine& e = new_engine(vid);
    auto saved = std::make_shared<ArchState>();
    e.ops.push_back({"setup", lat.setup, [vid](Cluster& c, Engine&) { c.claim_group(vid); },
                     [vid, ps, saved](Cluster& c, Engine&) {
                         *saved = c.core(vid).state();
                         // helper contexts are discarded when the lock re-forms
                         for (size_t i = 1; i < ps.members.size(); ++i) c.claim_group(ps.members[i]);
                     }});
    if (sw)
        e.ops.push_back({"unload", lat.unload, {},
                         [vid, saved](Cluster& c, Engine&) {
                             saved->csr.mepc = saved->pc;
                             Word sp = saved->rf[2];
                             const Word need = 4 * c.frame_words(false);
                             if (sp < c.cfg_.tcdm_base + need ||
                                 sp > c.cfg_.tcdm_base + static_cast<Word>(c.cfg_.tcdm_size)) {
                                 sp = c.stack_top(vid);
                                 saved->rf[2] = sp;
                             }
                             c.write_frame(sp - need, *saved, false);
                             c.sp_regs_[vid] = sp - need;
                         }});
    e.ops.push_back(
        {sw ? "reload" : "hw_fill", sw ? lat.reload : lat.hw_fill,
         [vid, ps](Cluster& c, Engine&) { c.form_group(vid, ps.mode); },
         [vid, sw, ps, saved](Cluster& c, Engine&) {
             Group& g = c.group_of(vid);
             ArchState s = sw ? c.read_frame(c.sp_regs_[vid], false) : *saved;
             c.apply_state_to_group(g, s);
             c.sp_regs_[vid] = 0;
             g.entry_variant = ps.entry_variant;
             if (c.cfg_.options.rapid_recovery_enabled) {
                 g.region.seed_from(s);
                 g.region.write_blocked = false;
             }
         }});
    e.on_complete = [vid](Cluster& c, Engine& en) {
        c.group_of(vid).engine_active = false;
        c.perf_sections_.erase(vid);
        SectionTrace t;
        t.kind = SectionKind::Performance;
        t.direction = SectionDirection::Exit;
        t.role = "main";
        t.group = vid;
        t.start_cycle = en.start_cycle;
        for (const auto& p : en.phases) t.phases.push_back({p.name, p.cycles});
        c.section_traces_.push_back(std::move(t));
    };
    run_engines_to_completion();
    for (size_t i = base; i < section_traces_.size(); ++i)
        if (section_traces_[i].group == vid &&
            section_traces_[i].direction == SectionDirection::Exit)
            return section_traces_[i];
    throw std::logic_error("exit trace missing");
}

uint64_t Cluster::functional_phase_cycles(uint64_t words) const { return words + 8; }

} // namespace hmr
