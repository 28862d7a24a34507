#include <doctest.h>

#include "hmrsim/cluster.hpp"
#include "hmrsim/workloads.hpp"

using namespace hmr;

namespace {

ClusterConfig make_cfg(Mode, bool rapid, bool calibrated = false) {
    ClusterConfig cfg;
    cfg.options.rapid_recovery_enabled = rapid;
    cfg.calibrated = calibrated;
    return cfg;
}

struct Run {
    Cluster cluster;
    Workload w;
    Cluster::RunResult result{};

    Run(Mode m, bool rapid, int dim = 12, bool calibrated = false)
        : cluster(make_cfg(m, rapid, calibrated)), w(matmul_workload(cluster.config(), dim)) {
        cluster.set_mode_all(m);
        install(cluster, w);
    }
    void go(uint64_t max_cycles = 2'000'000) { result = cluster.run(max_cycles); }
};

} // namespace

TEST_CASE("grouping is interleaved with the lowest member as virtual id") {
    Cluster c(make_cfg(Mode::Dmr, true));
    c.set_mode_all(Mode::Dmr);
    CHECK(c.active_vids() == std::vector<int>{0, 1, 2, 3, 4, 5});
    CHECK(c.group_of(2).members == std::vector<int>{2, 8});
    c.set_mode_all(Mode::Tmr);
    CHECK(c.active_vids() == std::vector<int>{0, 1, 2, 3});
    CHECK(c.group_of(1).members == std::vector<int>{1, 5, 9});
    c.set_mode_all(Mode::Independent);
    CHECK(c.active_vids().size() == 12);
}

TEST_CASE("matmul completes correctly in every mode") {
    for (Mode m : {Mode::Independent, Mode::Dmr, Mode::Tmr}) {
        CAPTURE(static_cast<int>(m));
        Run r(m, m != Mode::Independent);
        r.go();
        CHECK(r.result.completed);
        CHECK(result_correct(r.cluster, r.w));
        CHECK(r.cluster.total_errors() == 0);
    }
}

TEST_CASE("identical runs are cycle and output identical") {
    Run a(Mode::Tmr, true), b(Mode::Tmr, true);
    a.go();
    b.go();
    CHECK(a.result.cycles == b.result.cycles);
    CHECK(a.cluster.output_trace_hash() == b.cluster.output_trace_hash());
}

TEST_CASE("dmr error triggers a 24-cycle rapid recovery with intact results") {
    Run golden(Mode::Dmr, true);
    golden.go();
    const uint64_t want = result_digest(golden.cluster, golden.w);

    Run r(Mode::Dmr, true);
    for (int i = 0; i < 200; ++i) r.cluster.cycle();
    r.cluster.force_group_error(0);
    r.go();
    CHECK(r.result.completed);
    REQUIRE(r.cluster.recovery_traces().size() == 1);
    const auto& t = r.cluster.recovery_traces()[0];
    CHECK(t.kind == "rapid");
    CHECK(t.total_cycles() == 24);
    REQUIRE(t.phases.size() == 3);
    CHECK(t.phases[0].cycles == 4);  // clear
    CHECK(t.phases[1].cycles == 4);  // halt
    CHECK(t.phases[2].cycles == 16); // restore
    CHECK(!t.escalated);
    CHECK(result_digest(r.cluster, r.w) == want);
}

TEST_CASE("interface transient in tmr is voted out and recovered rapidly") {
    Run r(Mode::Tmr, true);
    FaultEvent e;
    e.kind = FaultEvent::Kind::Set;
    e.loc = FaultEvent::Loc::InterfaceBit;
    e.field = FaultEvent::Field::IfetchAddr;
    e.target_core = 5;
    e.bit = 7;
    e.cycle = 300;
    r.cluster.schedule_fault(e);
    r.go();
    CHECK(r.result.completed);
    CHECK(result_correct(r.cluster, r.w));
    CHECK(r.cluster.total_errors() >= 1);
    REQUIRE(!r.cluster.recovery_traces().empty());
    CHECK(r.cluster.recovery_traces()[0].kind == "rapid");
    CHECK(r.cluster.recovery_traces()[0].total_cycles() == 24);
}

TEST_CASE("register upset in dmr is detected once it propagates") {
    Run r(Mode::Dmr, true);
    FaultEvent e;
    e.kind = FaultEvent::Kind::Seu;
    e.loc = FaultEvent::Loc::RfBit;
    e.target_core = 7; // helper of group 1
    e.reg = 10;
    e.bit = 3;
    e.cycle = 400;
    r.cluster.schedule_fault(e);
    r.go();
    CHECK(r.result.completed);
    CHECK(result_correct(r.cluster, r.w));
}

TEST_CASE("tmr software recovery takes the calibrated 363 cycles") {
    Run r(Mode::Tmr, false, 12, true);
    for (int i = 0; i < 200; ++i) r.cluster.cycle();
    r.cluster.force_group_error(1);
    r.go();
    CHECK(r.result.completed);
    CHECK(result_correct(r.cluster, r.w));
    REQUIRE(!r.cluster.recovery_traces().empty());
    const auto& t = r.cluster.recovery_traces()[0];
    CHECK(t.kind == "tcls_sw");
    REQUIRE(t.phases.size() == 2);
    CHECK(t.phases[0].cycles == 247);
    CHECK(t.phases[1].cycles == 116);
    CHECK(t.total_cycles() == 363);
}

TEST_CASE("dmr without rapid recovery restarts the cluster") {
    Run r(Mode::Dmr, false);
    for (int i = 0; i < 200; ++i) r.cluster.cycle();
    r.cluster.force_group_error(0);
    r.go(4'000'000);
    CHECK(r.result.completed);
    CHECK(result_correct(r.cluster, r.w));
    CHECK(r.cluster.restart_count() == 1);
    REQUIRE(!r.cluster.recovery_traces().empty());
    CHECK(r.cluster.recovery_traces()[0].kind == "restart");
}

TEST_CASE("uncorrectable backup in tmr escalates to software recovery") {
    Run r(Mode::Tmr, true);
    for (int i = 0; i < 200; ++i) r.cluster.cycle();
    auto& reg = r.cluster.group_of(0).region;
    reg.rf_codeword(4) = ecc::flip_bit(ecc::flip_bit(reg.rf_codeword(4), 1), 2);
    r.cluster.force_group_error(0);
    r.go();
    CHECK(r.result.completed);
    CHECK(result_correct(r.cluster, r.w));
    bool saw_escalation = false, saw_sw = false;
    for (const auto& t : r.cluster.recovery_traces()) {
        saw_escalation = saw_escalation || t.escalated;
        saw_sw = saw_sw || t.kind == "tcls_sw";
    }
    CHECK(saw_escalation);
    CHECK(saw_sw);
}

TEST_CASE("uncorrectable backup in dmr escalates to a restart") {
    Run r(Mode::Dmr, true);
    for (int i = 0; i < 200; ++i) r.cluster.cycle();
    auto& reg = r.cluster.group_of(0).region;
    reg.pc_codeword() = ecc::flip_bit(ecc::flip_bit(reg.pc_codeword(), 5), 9);
    r.cluster.force_group_error(0);
    r.go(4'000'000);
    CHECK(r.result.completed);
    CHECK(result_correct(r.cluster, r.w));
    CHECK(r.cluster.restart_count() == 1);
}

TEST_CASE("hmr register window answers over the peripheral bus") {
    Cluster c(make_cfg(Mode::Dmr, true));
    c.set_mode_all(Mode::Dmr);
    auto n = c.config_access(hmr_reg::kNumCores, false);
    CHECK(!n.bus_error);
    CHECK(n.rdata == 12);
    auto st = c.config_access(hmr_reg::kModeStatBase + 4 * 0, false);
    CHECK(st.rdata == static_cast<Word>(Mode::Dmr));
    CHECK(!c.config_access(hmr_reg::kSpRegBase + 4 * 3, true, 0x1234).bus_error);
    CHECK(c.sp_reg(3) == 0x1234);
    auto err = c.config_access(hmr_reg::kErrCountBase + 4 * 0, false);
    CHECK(err.rdata == 0);
    CHECK(c.config_access(hmr_reg::kWindowSize, false).bus_error);
}

TEST_CASE("fault descriptors are validated") {
    Cluster c(make_cfg(Mode::Independent, false));
    FaultEvent e;
    e.loc = FaultEvent::Loc::RfBit;
    e.reg = 0;
    CHECK_THROWS_AS(c.schedule_fault(e), std::invalid_argument);
    e.reg = 1;
    e.bit = 32;
    CHECK_THROWS_AS(c.schedule_fault(e), std::invalid_argument);
    e.bit = 0;
    e.target_core = 12;
    CHECK_THROWS_AS(c.schedule_fault(e), std::invalid_argument);
}
