#include "hmrsim/recovery.hpp"

namespace hmr {

void RecoveryRegion::seed_from(const ArchState& s) {
    pc_ = ecc::encode(s.pc);
    for (int i = 1; i < 32; ++i) rf_[i - 1] = ecc::encode(s.rf[i]);
    csr_[0] = ecc::encode(s.csr.mepc);
    csr_[1] = ecc::encode(s.csr.mcause);
    csr_[2] = ecc::encode(s.csr.mtvec);
    csr_[3] = ecc::encode(s.csr.mstatus_mie);
}

void RecoveryRegion::commit(const BackupPorts& ports, bool error) {
    if (error || write_blocked) return;
    if (ports.pc_valid) pc_ = ecc::encode(ports.pc);
    for (uint8_t i = 0; i < ports.n_rf; ++i) {
        const RfWrite& w = ports.rf[i];
        if (w.index >= 1 && w.index < 32) rf_[w.index - 1] = ecc::encode(w.value);
    }
    for (uint8_t i = 0; i < ports.n_csr; ++i)
        csr_[static_cast<size_t>(ports.csr[i].id)] = ecc::encode(ports.csr[i].value);
}

RecoveryRegion::Decoded RecoveryRegion::decode() const {
    Decoded d;
    auto take = [&d](ecc::Codeword cw) -> Word {
        auto r = ecc::decode(cw);
        if (r.status == ecc::Status::Corrected) ++d.corrections;
        if (r.status == ecc::Status::Uncorrectable) d.uncorrectable = true;
        return r.data;
    };
    d.state.pc = take(pc_);
    for (int i = 1; i < 32; ++i) d.state.rf[i] = take(rf_[i - 1]);
    d.state.csr.mepc = take(csr_[0]);
    d.state.csr.mcause = take(csr_[1]);
    d.state.csr.mtvec = take(csr_[2]);
    d.state.csr.mstatus_mie = take(csr_[3]);
    return d;
}

uint64_t RecoveryRegion::hash() const {
    Fnv1a h;
    h.update_u64(pc_);
    for (auto cw : rf_) h.update_u64(cw);
    for (auto cw : csr_) h.update_u64(cw);
    return h.digest();
}

} // namespace hmr
