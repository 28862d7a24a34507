#include <doctest.h>

#include "hmrsim/recovery.hpp"

using namespace hmr;

namespace {
ArchState random_state(Rng& rng) {
    ArchState s;
    s.pc = static_cast<Word>(rng.next()) & ~3u;
    for (unsigned i = 1; i < 32; ++i) s.rf[i] = static_cast<Word>(rng.next());
    s.csr.mepc = static_cast<Word>(rng.next());
    s.csr.mcause = static_cast<Word>(rng.next());
    s.csr.mtvec = static_cast<Word>(rng.next());
    s.csr.mstatus_mie = rng.next() & 1u;
    return s;
}
} // namespace

TEST_CASE("seed and decode round-trip") {
    Rng rng(0x71);
    for (int i = 0; i < 50; ++i) {
        ArchState s = random_state(rng);
        RecoveryRegion reg;
        reg.seed_from(s);
        auto d = reg.decode();
        CHECK(d.corrections == 0);
        CHECK(!d.uncorrectable);
        CHECK(arch_payload_equal(d.state, s));
    }
}

TEST_CASE("commit tracks the write ports") {
    RecoveryRegion reg;
    ArchState s;
    s.pc = 0x100;
    reg.seed_from(s);

    BackupPorts p;
    p.set_pc(0x104);
    p.add_rf(5, 55);
    p.add_rf(6, 66);
    p.add_csr(CsrId::Mepc, 0x80);
    reg.commit(p, false);

    auto d = reg.decode();
    CHECK(d.state.pc == 0x104);
    CHECK(d.state.rf[5] == 55);
    CHECK(d.state.rf[6] == 66);
    CHECK(d.state.csr.mepc == 0x80);
}

TEST_CASE("error signal blocks the commit bit-identically") {
    RecoveryRegion reg;
    ArchState s;
    s.pc = 0x100;
    s.rf[7] = 7;
    reg.seed_from(s);
    const uint64_t before = reg.hash();

    BackupPorts p;
    p.set_pc(0xBAD0);
    p.add_rf(7, 0xBAD);
    CHECK(backup_commit(reg, p, true).hash() == before);
    reg.commit(p, true);
    CHECK(reg.hash() == before);
    CHECK(arch_payload_equal(reg.decode().state, s));
}

TEST_CASE("write_blocked freezes the region") {
    RecoveryRegion reg;
    reg.seed_from(ArchState{});
    const uint64_t before = reg.hash();
    reg.write_blocked = true;
    BackupPorts p;
    p.set_pc(0x40);
    reg.commit(p, false);
    CHECK(reg.hash() == before);
}

TEST_CASE("single upsets in the backup are corrected, doubles flagged") {
    Rng rng(0x72);
    ArchState s = random_state(rng);
    RecoveryRegion reg;
    reg.seed_from(s);

    reg.rf_codeword(12) = ecc::flip_bit(reg.rf_codeword(12), 3);
    reg.pc_codeword() = ecc::flip_bit(reg.pc_codeword(), 38);
    auto d = reg.decode();
    CHECK(d.corrections == 2);
    CHECK(!d.uncorrectable);
    CHECK(arch_payload_equal(d.state, s));

    reg.csr_codeword(CsrId::Mtvec) = ecc::flip_bit(ecc::flip_bit(reg.csr_codeword(CsrId::Mtvec), 1), 2);
    auto d2 = reg.decode();
    CHECK(d2.uncorrectable);
}

TEST_CASE("rapid budgets sum to 24") {
    RapidBudgets b;
    CHECK(b.setup_clear == 4);
    CHECK(b.halt_ack == 4);
    CHECK(b.restore == 16);
    CHECK(b.total() == 24);
}
