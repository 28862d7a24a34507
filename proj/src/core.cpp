#include "hmrsim/core.hpp"

#include <algorithm>
#include <stdexcept>

namespace hmr {

namespace {
constexpr Word kCauseLoadFault = 5;
constexpr Word kCauseStoreFault = 7;

int32_t sign(Word w) { return static_cast<int32_t>(w); }
} // namespace

Core::Core(int hart_id, const CoreParams& p) : hart_id_(hart_id), params_(p) {
    virtual_id = hart_id;
    synchronous_clear();
}

void Core::synchronous_clear() {
    state_ = ArchState{};
    state_.pc = params_.boot_addr;
    state_.csr.mtvec = params_.mtvec;
    halt_countdown_ = 0;
    waiting_mem_ = false;
    pending_req_ = DataReq{};
}

void Core::debug_halt_request() {
    if (!state_.halted && halt_countdown_ == 0) halt_countdown_ = params_.debug_halt_latency;
}

void Core::debug_halt_ack() {
    halt_countdown_ = 0;
    state_.halted = true;
}

void Core::debug_resume() {
    state_.halted = false;
    halt_countdown_ = 0;
}

void Core::debug_write_state(std::optional<Word> pc, std::span<const RfWrite> rf,
                             std::span<const CsrWrite> csrs) {
    if (!state_.halted) throw std::logic_error("debug_write_state: core not halted");
    if (rf.size() > 2) throw std::invalid_argument("debug_write_state: more than 2 RF writes");
    ++debug_write_calls;
    max_debug_rf_writes = std::max(max_debug_rf_writes, static_cast<int>(rf.size()));
    if (pc) state_.pc = *pc;
    for (const RfWrite& w : rf) state_.write_rf(w.index, w.value);
    for (const CsrWrite& w : csrs) state_.csr.write(w.id, w.value);
}

void Core::cancel_pending_request() {
    waiting_mem_ = false;
    pending_req_ = DataReq{};
}

void Core::take_trap(Word cause_code, BackupPorts& ports) {
    state_.csr.mepc = state_.pc;
    state_.csr.mcause = cause_code;
    state_.pc = state_.csr.mtvec;
    ports.add_csr(CsrId::Mepc, state_.csr.mepc);
    ports.add_csr(CsrId::Mcause, state_.csr.mcause);
    ports.set_pc(state_.pc);
}

Core::StepResult Core::step(const MemResponse& resp, bool irq, Word irq_cause,
                            const Program& imem) {
    StepResult r;
    if (state_.halted) return r;
    if (halt_countdown_ > 0) {
        if (--halt_countdown_ == 0) state_.halted = true;
        return r;
    }

    r.out.ifetch_addr = state_.pc;

    if (waiting_mem_) {
        if (resp.kind == MemResponse::Kind::Data) {
            if (pending_is_load_) {
                state_.write_rf(pending_rd_, resp.data);
                r.ports.add_rf(pending_rd_, resp.data);
            }
            waiting_mem_ = false;
            state_.pc += 4;
            r.ports.set_pc(state_.pc);
            return r;
        }
        if (resp.kind == MemResponse::Kind::BusError) {
            waiting_mem_ = false;
            take_trap(pending_is_load_ ? kCauseLoadFault : kCauseStoreFault, r.ports);
            return r;
        }
        if (irq && state_.csr.mstatus_mie) {
            // wake from a blocked (barrier) access; re-executed after mret
            cancel_pending_request();
            state_.csr.mstatus_mie = 0;
            take_trap(irq_cause, r.ports);
            r.ports.add_csr(CsrId::MstatusMie, 0);
            r.irq_taken = true;
            return r;
        }
        r.out.req = pending_req_; // retry
        return r;
    }

    if (irq && state_.csr.mstatus_mie) {
        state_.csr.mstatus_mie = 0;
        take_trap(irq_cause, r.ports);
        r.ports.add_csr(CsrId::MstatusMie, 0);
        r.irq_taken = true;
        return r;
    }

    return execute(imem.fetch(state_.pc), imem);
}

Core::StepResult Core::execute(Word instr, const Program&) {
    StepResult r;
    r.out.ifetch_addr = state_.pc;

    const Word opcode = instr & 0x7F;
    const unsigned rd = (instr >> 7) & 0x1F;
    const unsigned f3 = (instr >> 12) & 0x7;
    const unsigned rs1 = (instr >> 15) & 0x1F;
    const unsigned rs2 = (instr >> 20) & 0x1F;
    const unsigned f7 = (instr >> 25) & 0x7F;
    const Word a = state_.rf[rs1];
    const Word b = state_.rf[rs2];
    const int32_t imm_i = static_cast<int32_t>(instr) >> 20;
    const int32_t imm_s =
        (static_cast<int32_t>(instr & 0xFE000000) >> 20) | static_cast<int32_t>((instr >> 7) & 0x1F);
    const int32_t imm_b = (static_cast<int32_t>(instr & 0x80000000) >> 19) |
                          static_cast<int32_t>(((instr >> 7) & 1) << 11) |
                          static_cast<int32_t>(((instr >> 25) & 0x3F) << 5) |
                          static_cast<int32_t>(((instr >> 8) & 0xF) << 1);
    const int32_t imm_j = (static_cast<int32_t>(instr & 0x80000000) >> 11) |
                          static_cast<int32_t>(instr & 0x000FF000) |
                          static_cast<int32_t>(((instr >> 20) & 1) << 11) |
                          static_cast<int32_t>(((instr >> 21) & 0x3FF) << 1);

    auto retire = [&](Word next_pc) {
        state_.pc = next_pc;
        r.ports.set_pc(next_pc);
    };
    auto write_rd = [&](Word v) {
        if (rd != 0) {
            state_.rf[rd] = v;
            r.ports.add_rf(rd, v);
        }
    };

    switch (opcode) {
    case 0x37: // LUI
        write_rd(instr & 0xFFFFF000);
        retire(state_.pc + 4);
        return r;
    case 0x17: // AUIPC
        write_rd(state_.pc + (instr & 0xFFFFF000));
        retire(state_.pc + 4);
        return r;
    case 0x6F: // JAL
        write_rd(state_.pc + 4);
        retire(state_.pc + static_cast<Word>(imm_j));
        return r;
    case 0x67: { // JALR
        if (f3 != 0) break;
        Word target = (a + static_cast<Word>(imm_i)) & ~1u;
        write_rd(state_.pc + 4);
        retire(target);
        return r;
    }
    case 0x63: { // branches
        bool taken;
        switch (f3) {
        case 0: taken = a == b; break;
        case 1: taken = a != b; break;
        case 4: taken = sign(a) < sign(b); break;
        case 5: taken = sign(a) >= sign(b); break;
        case 6: taken = a < b; break;
        case 7: taken = a >= b; break;
        default: goto illegal;
        }
        retire(taken ? state_.pc + static_cast<Word>(imm_b) : state_.pc + 4);
        return r;
    }
    case 0x03: { // LW
        if (f3 != 2) break;
        Word addr = a + static_cast<Word>(imm_i);
        if (addr & 3u) {
            take_trap(kCauseLoadFault, r.ports);
            return r;
        }
        pending_req_ = DataReq{1, addr, 0, 0, 0xF};
        pending_rd_ = static_cast<uint8_t>(rd);
        pending_is_load_ = true;
        waiting_mem_ = true;
        r.out.req = pending_req_;
        return r;
    }
    case 0x23: { // SW
        if (f3 != 2) break;
        Word addr = a + static_cast<Word>(imm_s);
        if (addr & 3u) {
            take_trap(kCauseStoreFault, r.ports);
            return r;
        }
        pending_req_ = DataReq{1, addr, b, 1, 0xF};
        pending_is_load_ = false;
        waiting_mem_ = true;
        r.out.req = pending_req_;
        return r;
    }
    case 0x13: { // OP-IMM
        Word v;
        Word immu = static_cast<Word>(imm_i);
        unsigned sh = rs2;
        switch (f3) {
        case 0: v = a + immu; break;
        case 2: v = sign(a) < imm_i ? 1 : 0; break;
        case 3: v = a < immu ? 1 : 0; break;
        case 4: v = a ^ immu; break;
        case 6: v = a | immu; break;
        case 7: v = a & immu; break;
        case 1:
            if (f7 != 0) goto illegal;
            v = a << sh;
            break;
        case 5:
            if (f7 == 0)
                v = a >> sh;
            else if (f7 == 0x20)
                v = static_cast<Word>(sign(a) >> sh);
            else
                goto illegal;
            break;
        default: goto illegal;
        }
        write_rd(v);
        retire(state_.pc + 4);
        return r;
    }
    case 0x33: { // OP
        Word v;
        if (f7 == 1) {
            if (f3 != 0) goto illegal; // only MUL from the M extension
            v = a * b;
        } else if (f7 == 0 || f7 == 0x20) {
            switch (f3) {
            case 0: v = f7 == 0x20 ? a - b : a + b; break;
            case 1: v = a << (b & 31); break;
            case 2: v = sign(a) < sign(b) ? 1 : 0; break;
            case 3: v = a < b ? 1 : 0; break;
            case 4: v = a ^ b; break;
            case 5: v = f7 == 0x20 ? static_cast<Word>(sign(a) >> (b & 31)) : a >> (b & 31); break;
            case 6: v = a | b; break;
            case 7: v = a & b; break;
            default: goto illegal;
            }
            if ((f3 != 0 && f3 != 5) && f7 == 0x20) goto illegal;
        } else {
            goto illegal;
        }
        write_rd(v);
        retire(state_.pc + 4);
        return r;
    }
    case 0x73: { // SYSTEM
        if (instr == 0x30200073) { // MRET
            state_.csr.mstatus_mie = 1;
            r.ports.add_csr(CsrId::MstatusMie, 1);
            retire(state_.csr.mepc);
            return r;
        }
        if (f3 != 1 && f3 != 2) goto illegal; // CSRRW / CSRRS only
        Word csr_addr = static_cast<Word>(instr) >> 20;
        Word old;
        bool writable = true;
        CsrId id{};
        switch (csr_addr) {
        case 0x300: id = CsrId::MstatusMie; old = state_.csr.mstatus_mie << 3; break;
        case 0x305: id = CsrId::Mtvec; old = state_.csr.mtvec; break;
        case 0x341: id = CsrId::Mepc; old = state_.csr.mepc; break;
        case 0x342: id = CsrId::Mcause; old = state_.csr.mcause; break;
        case 0xF14: old = static_cast<Word>(virtual_id); writable = false; break;
        case 0xCC1: old = static_cast<Word>(n_workers); writable = false; break;
        default: goto illegal;
        }
        bool writes = (f3 == 1) || rs1 != 0; // CSRRS with x0 is a pure read
        if (writes && writable) {
            Word nv = f3 == 1 ? a : (old | a);
            if (csr_addr == 0x300) nv = (nv >> 3) & 1u;
            state_.csr.write(id, nv);
            r.ports.add_csr(id, state_.csr.read(id));
        }
        write_rd(old);
        retire(state_.pc + 4);
        return r;
    }
    default: break;
    }

illegal:
    take_trap(cause::kIllegalInstruction, r.ports);
    return r;
}

void replay_ports(ArchState& shadow, const BackupPorts& ports) {
    for (uint8_t i = 0; i < ports.n_rf; ++i) shadow.write_rf(ports.rf[i].index, ports.rf[i].value);
    for (uint8_t i = 0; i < ports.n_csr; ++i) shadow.csr.write(ports.csr[i].id, ports.csr[i].value);
    if (ports.pc_valid) shadow.pc = ports.pc;
}

} // namespace hmr
