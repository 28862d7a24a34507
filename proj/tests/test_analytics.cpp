#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "hmrsim/analytics.hpp"

using namespace hmr;

namespace {
double mops(double v) { return v / 1e6; }
} // namespace

TEST_CASE("fault-free throughput matches the matmul landmarks") {
    PerfModelParams p = matmul_model();
    CHECK(mops(gops(p, ExecModel::DclsSw, 0)) == doctest::Approx(617).epsilon(0.002));
    CHECK(mops(gops(p, ExecModel::DclsRapid, 0)) == doctest::Approx(617).epsilon(0.002));
    CHECK(mops(gops(p, ExecModel::TclsSw, 0)) == doctest::Approx(414).epsilon(0.002));
    CHECK(mops(gops(p, ExecModel::TclsRapid, 0)) == doctest::Approx(414).epsilon(0.002));
    CHECK(mops(p.ops * p.freq_hz / p.cycles_independent) == doctest::Approx(1165).epsilon(0.002));
}

TEST_CASE("fault-free throughput matches the cfft landmarks") {
    PerfModelParams p = cfft_model();
    CHECK(mops(p.ops * p.freq_hz / p.cycles_independent) == doctest::Approx(989).epsilon(0.002));
    CHECK(mops(gops(p, ExecModel::DclsSw, 0)) == doctest::Approx(531).epsilon(0.002));
    CHECK(mops(gops(p, ExecModel::TclsSw, 0)) == doctest::Approx(385).epsilon(0.002));
}

TEST_CASE("throughput decays monotonically with the fault rate") {
    PerfModelParams p = matmul_model();
    for (ExecModel m :
         {ExecModel::DclsSw, ExecModel::DclsRapid, ExecModel::TclsSw, ExecModel::TclsRapid}) {
        double prev = gops(p, m, 0);
        for (double r = 1e3; r <= 1e9; r *= 10) {
            double g = gops(p, m, r);
            CHECK(g <= prev);
            CHECK(g > 0);
            prev = g;
        }
    }
}

TEST_CASE("half-performance rates hit the published decades") {
    PerfModelParams p = matmul_model();
    CHECK(half_perf_rate(p, ExecModel::DclsSw) == doctest::Approx(2.2e4).epsilon(0.05));
    CHECK(half_perf_rate(p, ExecModel::TclsSw) == doctest::Approx(2.2e6).epsilon(0.05));
    CHECK(half_perf_rate(p, ExecModel::DclsRapid) == doctest::Approx(1.8e7).epsilon(0.05));
    CHECK(half_perf_rate(p, ExecModel::TclsRapid) == doctest::Approx(3.6e7).epsilon(0.05));
    // at the half-perf rate the curve is indeed at half throughput
    for (ExecModel m :
         {ExecModel::DclsSw, ExecModel::DclsRapid, ExecModel::TclsSw, ExecModel::TclsRapid}) {
        double r = half_perf_rate(p, m);
        CHECK(gops(p, m, r) == doctest::Approx(gops(p, m, 0) / 2).epsilon(1e-6));
    }
}

TEST_CASE("rapid curves cross where triple redundancy starts to win") {
    PerfModelParams p = matmul_model();
    double x = crossover_rate(p);
    CHECK(x == doctest::Approx(3.44e7).epsilon(0.02));
    CHECK(gops(p, ExecModel::DclsRapid, x) ==
          doctest::Approx(gops(p, ExecModel::TclsRapid, x)).epsilon(1e-9));
    CHECK(gops(p, ExecModel::DclsRapid, x / 4) > gops(p, ExecModel::TclsRapid, x / 4));
    CHECK(gops(p, ExecModel::DclsRapid, x * 4) < gops(p, ExecModel::TclsRapid, x * 4));
}

TEST_CASE("fault-free runtime overheads") {
    PerfModelParams p = matmul_model();
    CHECK(runtime_overhead(p, ExecModel::DclsSw) ==
          doctest::Approx(p.cycles_dmr / p.cycles_independent - 1));
    CHECK(runtime_overhead(p, ExecModel::TclsRapid) ==
          doctest::Approx(p.cycles_tmr / p.cycles_independent - 1));
}

TEST_CASE("monte carlo sampling agrees with the closed form") {
    PerfModelParams p = matmul_model();
    for (ExecModel m :
         {ExecModel::DclsSw, ExecModel::DclsRapid, ExecModel::TclsSw, ExecModel::TclsRapid}) {
        // pick a rate with >= 10 expected faults per kernel
        double rate = 10.0 * p.freq_hz / mode_cycles(p, m);
        auto mc = monte_carlo_validate(p, m, rate, 1000, 2024);
        CAPTURE(to_string(m));
        CHECK(mc.rel_err < 0.05);
        CHECK(mc.simulated > 0);
    }
}

TEST_CASE("self-consistent convention degrades faster but matches at zero") {
    PerfModelParams p = matmul_model();
    PerfModelParams q = p;
    q.self_consistent = true;
    CHECK(gops(q, ExecModel::DclsSw, 0) == doctest::Approx(gops(p, ExecModel::DclsSw, 0)));
    CHECK(gops(q, ExecModel::DclsSw, 1e4) <= gops(p, ExecModel::DclsSw, 1e4));
    // past the pole the self-consistent throughput collapses to zero
    CHECK(gops(q, ExecModel::DclsSw, 1e9) == 0);
}

TEST_CASE("curves serialize to csv") {
    PerfModelParams p = matmul_model();
    auto pts = degradation_curves(p, 1e3, 1e9, 13);
    CHECK(pts.size() == 13);
    CHECK(pts.front().fault_rate == doctest::Approx(1e3));
    CHECK(pts.back().fault_rate == doctest::Approx(1e9));
    auto csv = curves_csv(pts);
    CHECK(csv.find("fault_rate") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 14); // header + points
}
