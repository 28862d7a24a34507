#include <doctest.h>

#include "hmrsim/ecc.hpp"
#include "hmrsim/types.hpp"

using namespace hmr;

TEST_CASE("ecc round-trips clean words") {
    Rng rng(0xE1);
    for (int i = 0; i < 2000; ++i) {
        const Word w = static_cast<Word>(rng.next());
        auto r = ecc::decode(ecc::encode(w));
        CHECK(r.status == ecc::Status::Ok);
        CHECK(r.data == w);
    }
    CHECK(ecc::decode(ecc::encode(0)).data == 0);
    CHECK(ecc::decode(ecc::encode(0xFFFFFFFF)).data == 0xFFFFFFFF);
}

TEST_CASE("every single-bit flip is corrected") {
    Rng rng(0xE2);
    for (int i = 0; i < 200; ++i) {
        const Word w = static_cast<Word>(rng.next());
        const ecc::Codeword cw = ecc::encode(w);
        for (int b = 0; b < 39; ++b) {
            auto r = ecc::decode(ecc::flip_bit(cw, b));
            CHECK(r.status == ecc::Status::Corrected);
            CHECK(r.data == w);
            CHECK(r.corrected_bit == b);
        }
    }
}

TEST_CASE("every double-bit flip is flagged uncorrectable") {
    Rng rng(0xE3);
    for (int i = 0; i < 20; ++i) {
        const Word w = static_cast<Word>(rng.next());
        const ecc::Codeword cw = ecc::encode(w);
        for (int a = 0; a < 39; ++a)
            for (int b = a + 1; b < 39; ++b) {
                auto r = ecc::decode(ecc::flip_bit(ecc::flip_bit(cw, a), b));
                CHECK(r.status == ecc::Status::Uncorrectable);
            }
    }
}

TEST_CASE("codeword is 39 bits") {
    CHECK((ecc::encode(0xFFFFFFFF) >> 39) == 0);
    CHECK((ecc::encode(0) >> 39) == 0);
}
