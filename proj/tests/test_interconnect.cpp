#include <doctest.h>

#include "hmrsim/interconnect.hpp"

using namespace hmr;

namespace {
Tcdm::Request rd(int who, Word addr) { return {who, DataReq{1, addr, 0, 0, 0xF}}; }
Tcdm::Request wr(int who, Word addr, Word v) { return {who, DataReq{1, addr, v, 1, 0xF}}; }
} // namespace

TEST_CASE("word interleaving across banks") {
    Tcdm t(0x1000, 4);
    CHECK(t.n_banks() == 4);
    CHECK(t.bank_index(0x0) == 0);
    CHECK(t.bank_index(0x4) == 1);
    CHECK(t.bank_index(0x8) == 2);
    CHECK(t.bank_index(0xC) == 3);
    CHECK(t.bank_index(0x10) == 0);
}

TEST_CASE("independent banks grant in the same cycle") {
    Tcdm t(0x1000, 4);
    auto res = t.cycle({wr(0, 0x0, 11), wr(1, 0x4, 22), wr(2, 0x8, 33)});
    for (const auto& r : res) CHECK(r.status == Tcdm::Result::Status::Grant);
    CHECK(t.load_word(0x0) == 11);
    CHECK(t.load_word(0x4) == 22);
    CHECK(t.load_word(0x8) == 33);
}

TEST_CASE("bank conflict stalls the loser and round-robins") {
    Tcdm t(0x1000, 2);
    // both requesters hit bank 0
    auto r1 = t.cycle({wr(0, 0x0, 1), wr(1, 0x8, 2)});
    int winner = r1[0].status == Tcdm::Result::Status::Grant ? 0 : 1;
    int loser = 1 - winner;
    CHECK(r1[loser].status == Tcdm::Result::Status::Stall);
    // next cycle the arbiter favors the loser
    auto r2 = t.cycle({wr(0, 0x0, 1), wr(1, 0x8, 2)});
    CHECK(r2[loser].status == Tcdm::Result::Status::Grant);
    CHECK(r2[winner].status == Tcdm::Result::Status::Stall);
}

TEST_CASE("reads return stored data") {
    Tcdm t(0x1000, 2);
    t.store_word(0x40, 0xDEAD);
    auto res = t.cycle({rd(3, 0x40)});
    CHECK(res[0].status == Tcdm::Result::Status::Grant);
    CHECK(res[0].rdata == 0xDEAD);
}

TEST_CASE("out-of-range access is a bus error") {
    Tcdm t(0x100, 2);
    auto res = t.cycle({rd(0, 0x100)});
    CHECK(res[0].status == Tcdm::Result::Status::BusError);
}

TEST_CASE("digest changes with contents") {
    Tcdm t(0x100, 2);
    auto d0 = t.digest(0, 0x100);
    t.store_word(0x10, 1);
    CHECK(t.digest(0, 0x100) != d0);
    t.store_word(0x10, 0);
    CHECK(t.digest(0, 0x100) == d0);
}

TEST_CASE("barrier releases once every participant arrived") {
    EventUnit ev;
    ev.set_participants({0, 1, 2});
    CHECK(!ev.arrive(0));
    CHECK(!ev.arrive(1));
    CHECK(!ev.arrive(1)); // re-arrival is idempotent
    CHECK(ev.arrive(2));
    CHECK(ev.waiters().size() == 3); // release is explicit: broadcast, then clear
    ev.clear_waiters();
    // barrier re-arms
    CHECK(!ev.arrive(0));
    ev.remove_waiter(0);
    CHECK(ev.waiters().empty());
}

TEST_CASE("irq lines are per core and sticky until cleared") {
    EventUnit ev;
    ev.raise_irq(4, 31);
    CHECK(ev.irq_pending(4));
    CHECK(!ev.irq_pending(5));
    CHECK(ev.irq_cause(4) == 31);
    ev.clear_irq(4);
    CHECK(!ev.irq_pending(4));
}
