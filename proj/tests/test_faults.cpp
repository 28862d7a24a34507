#include <doctest.h>

#include <string>

#include "hmrsim/faults.hpp"

using namespace hmr;

TEST_CASE("random faults are deterministic and in range") {
    Rng a(42), b(42);
    for (int i = 0; i < 5000; ++i) {
        FaultEvent x = random_fault(a, 12, 10'000);
        FaultEvent y = random_fault(b, 12, 10'000);
        CHECK(x.cycle == y.cycle);
        CHECK(x.target_core == y.target_core);
        CHECK(x.loc == y.loc);
        CHECK(x.bit == y.bit);

        CHECK(x.cycle < 10'000);
        CHECK(x.target_core >= 0);
        CHECK(x.target_core < 12);
        switch (x.loc) {
        case FaultEvent::Loc::RfBit:
            CHECK(x.reg >= 1);
            CHECK(x.reg <= 31);
            CHECK(x.bit < 32);
            break;
        case FaultEvent::Loc::PcBit: CHECK(x.bit < 32); break;
        case FaultEvent::Loc::CsrBit: break;
        case FaultEvent::Loc::InterfaceBit:
            if (x.field == FaultEvent::Field::Valid || x.field == FaultEvent::Field::We)
                CHECK(x.bit == 0);
            break;
        }
    }
}

TEST_CASE("every fault location class is drawn") {
    Rng rng(7);
    bool seen[4] = {false, false, false, false};
    for (int i = 0; i < 2000; ++i) seen[static_cast<int>(random_fault(rng, 12, 1000).loc)] = true;
    for (bool s : seen) CHECK(s);
}

TEST_CASE("a fault after completion is masked") {
    ClusterConfig cfg;
    cfg.options.rapid_recovery_enabled = true;
    Workload w = matmul_workload(cfg, 12);

    Cluster golden(cfg);
    golden.set_mode_all(Mode::Tmr);
    install(golden, w);
    auto g = golden.run(2'000'000);
    REQUIRE(g.completed);

    FaultEvent e;
    e.loc = FaultEvent::Loc::RfBit;
    e.reg = 5;
    e.bit = 0;
    e.target_core = 0;
    e.cycle = g.cycles - 1; // after the barrier, before exit: state is dead
    auto rec = classify_run(cfg, Mode::Tmr, w, g.cycles, e, 10, 0, 123);
    CHECK((rec.outcome == Outcome::Masked || rec.outcome == Outcome::DetectedRecovered));
    CHECK(rec.outcome != Outcome::Sdc);
}

TEST_CASE("campaigns are reproducible and clean in protected modes") {
    ClusterConfig cfg;
    cfg.options.rapid_recovery_enabled = true;
    CampaignConfig cc;
    cc.runs = 40;
    cc.seed = 99;

    auto r1 = run_campaign(cfg, Mode::Tmr, cc);
    CHECK(r1.runs.size() == 40);
    CHECK(r1.masked + r1.detected_recovered + r1.sdc + r1.hang == 40);
    CHECK(r1.sdc == 0);
    CHECK(r1.hang == 0);

    cc.threads = 2; // thread count must not affect the outcome
    auto r2 = run_campaign(cfg, Mode::Tmr, cc);
    CHECK(r2.report_hash() == r1.report_hash());
    CHECK(r2.golden_cycles == r1.golden_cycles);

    cc.seed = 100;
    auto r3 = run_campaign(cfg, Mode::Tmr, cc);
    CHECK(r3.report_hash() != r1.report_hash());
}

TEST_CASE("outcome names") {
    CHECK(std::string(to_string(Outcome::Masked)) == "masked");
    CHECK(std::string(to_string(Outcome::DetectedRecovered)) == "detected_recovered");
    CHECK(std::string(to_string(Outcome::Sdc)) == "sdc");
    CHECK(std::string(to_string(Outcome::Hang)) == "hang");
}
