#include <doctest.h>

#include "hmrsim/hmr.hpp"
#include "hmrsim/types.hpp"

using namespace hmr;

namespace {

OutputBundle random_bundle(Rng& rng) {
    OutputBundle o;
    o.ifetch_addr = static_cast<Word>(rng.next());
    o.req.valid = rng.next() & 1u;
    if (o.req.valid) {
        o.req.addr = static_cast<Word>(rng.next());
        o.req.wdata = static_cast<Word>(rng.next());
        o.req.we = rng.next() & 1u;
        o.req.byte_en = rng.next() & 0xFu;
    }
    return o;
}

// field-wise serialization used to cross-check bitwise majority per bit
std::array<Word, 6> words_of(const OutputBundle& o) {
    return {o.ifetch_addr, o.req.valid, o.req.addr, o.req.wdata, o.req.we, o.req.byte_en};
}

} // namespace

TEST_CASE("partner maps are interleaved") {
    CHECK(dmr_partner(0, 12) == 6);
    CHECK(dmr_partner(5, 12) == 11);
    CHECK(tmr_partners(0, 12) == std::pair<int, int>{4, 8});
    CHECK(tmr_partners(3, 12) == std::pair<int, int>{7, 11});
    CHECK_THROWS_AS(dmr_partner(6, 12), std::invalid_argument);
    CHECK_THROWS_AS(dmr_partner(-1, 12), std::invalid_argument);
    CHECK_THROWS_AS(dmr_partner(0, 11), std::invalid_argument);
    CHECK_THROWS_AS(tmr_partners(4, 12), std::invalid_argument);
    CHECK_THROWS_AS(tmr_partners(0, 10), std::invalid_argument);
}

TEST_CASE("checker passes equal bundles and gates mismatches") {
    Rng rng(0x11);
    for (int i = 0; i < 2000; ++i) {
        OutputBundle a = random_bundle(rng);
        auto eq = check_pair(a, a);
        CHECK(!eq.error);
        CHECK(eq.output == a);

        OutputBundle b = a;
        b.req.valid = 1;
        b.req.addr ^= 1u << (rng.next() % 32);
        auto ne = check_pair(a, b);
        CHECK(ne.error);
        CHECK(ne.output == OutputBundle{}); // gated to canonical zero
    }
}

TEST_CASE("voter output is the per-bit majority") {
    Rng rng(0x22);
    for (int i = 0; i < 2000; ++i) {
        OutputBundle a = random_bundle(rng);
        OutputBundle b = random_bundle(rng);
        OutputBundle c = random_bundle(rng);
        auto v = vote_triple(a, b, c);
        auto wa = words_of(a), wb = words_of(b), wc = words_of(c);
        auto wv = words_of(v.output);
        for (size_t f = 0; f < wa.size(); ++f) {
            Word maj = (wa[f] & wb[f]) | (wa[f] & wc[f]) | (wb[f] & wc[f]);
            CHECK(wv[f] == maj);
        }
    }
}

TEST_CASE("voter flags the dissenter") {
    Rng rng(0x33);
    for (int i = 0; i < 500; ++i) {
        OutputBundle good = random_bundle(rng);
        auto all = vote_triple(good, good, good);
        CHECK(!all.error);
        CHECK(!all.dissenter.has_value());
        CHECK(!all.group_failure);

        int slot = static_cast<int>(rng.next() % 3);
        OutputBundle bad = good;
        bad.ifetch_addr ^= 1u << (rng.next() % 32);
        auto v = slot == 0   ? vote_triple(bad, good, good)
                 : slot == 1 ? vote_triple(good, bad, good)
                             : vote_triple(good, good, bad);
        CHECK(v.error);
        CHECK(v.dissenter == slot);
        CHECK(!v.group_failure);
        CHECK(v.output == good);
    }
}

TEST_CASE("three-way disagreement is a group failure") {
    OutputBundle a, b, c;
    a.ifetch_addr = 0b001;
    b.ifetch_addr = 0b010;
    c.ifetch_addr = 0b100;
    auto v = vote_triple(a, b, c);
    CHECK(v.error);
    CHECK(v.group_failure);
    CHECK(v.output.ifetch_addr == 0); // majority of one-hot bits is zero
}
