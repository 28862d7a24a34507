#include "hmrsim/faults.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>

namespace hmr {

const char* to_string(Outcome o) {
    switch (o) {
    case Outcome::Masked: return "masked";
    case Outcome::DetectedRecovered: return "detected_recovered";
    case Outcome::Sdc: return "sdc";
    case Outcome::Hang: return "hang";
    }
    return "?";
}

FaultEvent random_fault(Rng& rng, int n_cores, uint64_t golden_cycles) {
    FaultEvent e;
    e.target_core = static_cast<int>(rng.below(static_cast<uint64_t>(n_cores)));
    e.cycle = 1 + rng.below(golden_cycles);

    // every single-bit location equally likely
    constexpr uint64_t kRfBits = 31 * 32;
    constexpr uint64_t kPcBits = 32;
    constexpr uint64_t kCsrBits = 32 + 32 + 32 + 1; // mepc, mcause, mtvec, mie
    constexpr uint64_t kIfBits = 32 + 1 + 32 + 32 + 1 + 4;
    uint64_t pick = rng.below(kRfBits + kPcBits + kCsrBits + kIfBits);
    if (pick < kRfBits) {
        e.loc = FaultEvent::Loc::RfBit;
        e.kind = FaultEvent::Kind::Seu;
        e.reg = 1 + static_cast<int>(pick / 32);
        e.bit = static_cast<int>(pick % 32);
        return e;
    }
    pick -= kRfBits;
    if (pick < kPcBits) {
        e.loc = FaultEvent::Loc::PcBit;
        e.kind = FaultEvent::Kind::Seu;
        e.bit = static_cast<int>(pick);
        return e;
    }
    pick -= kPcBits;
    if (pick < kCsrBits) {
        e.loc = FaultEvent::Loc::CsrBit;
        e.kind = FaultEvent::Kind::Seu;
        if (pick < 32) {
            e.csr = CsrId::Mepc;
            e.bit = static_cast<int>(pick);
        } else if (pick < 64) {
            e.csr = CsrId::Mcause;
            e.bit = static_cast<int>(pick - 32);
        } else if (pick < 96) {
            e.csr = CsrId::Mtvec;
            e.bit = static_cast<int>(pick - 64);
        } else {
            e.csr = CsrId::MstatusMie;
            e.bit = 0;
        }
        return e;
    }
    pick -= kCsrBits;
    e.loc = FaultEvent::Loc::InterfaceBit;
    e.kind = FaultEvent::Kind::Set;
    if (pick < 32) {
        e.field = FaultEvent::Field::IfetchAddr;
        e.bit = static_cast<int>(pick);
    } else if (pick < 33) {
        e.field = FaultEvent::Field::Valid;
        e.bit = 0;
    } else if (pick < 65) {
        e.field = FaultEvent::Field::Addr;
        e.bit = static_cast<int>(pick - 33);
    } else if (pick < 97) {
        e.field = FaultEvent::Field::Wdata;
        e.bit = static_cast<int>(pick - 65);
    } else if (pick < 98) {
        e.field = FaultEvent::Field::We;
        e.bit = 0;
    } else {
        e.field = FaultEvent::Field::ByteEn;
        e.bit = static_cast<int>(pick - 98);
    }
    return e;
}

RunRecord classify_run(const ClusterConfig& cluster_cfg, Mode mode, const Workload& w,
                       uint64_t golden_cycles, const FaultEvent& fault, uint64_t hang_factor,
                       int index, uint64_t seed) {
    RunRecord rec;
    rec.index = index;
    rec.seed = seed;
    rec.fault = fault;

    Cluster c(cluster_cfg);
    c.set_mode_all(mode);
    install(c, w);
    c.schedule_fault(fault);
    auto rr = c.run(hang_factor * golden_cycles);
    rec.cycles = rr.cycles;
    rec.errors_detected = c.total_errors();
    rec.recoveries = c.recovery_traces().size();
    rec.restarts = c.restart_count();

    if (rr.hung) {
        rec.outcome = Outcome::Hang;
        return rec;
    }
    const bool correct = result_correct(c, w);
    const bool detected = rec.errors_detected > 0 || rec.recoveries > 0 || rec.restarts > 0;
    if (!correct)
        rec.outcome = Outcome::Sdc;
    else if (detected)
        rec.outcome = Outcome::DetectedRecovered;
    else
        rec.outcome = Outcome::Masked;
    return rec;
}

CampaignResult run_campaign(const ClusterConfig& cluster_cfg, Mode mode,
                            const CampaignConfig& cc) {
    if (cc.runs <= 0) throw std::invalid_argument("campaign needs at least one run");
    Workload w = matmul_workload(cluster_cfg, cc.matmul_dim);

    // golden run: reference cycle count and result digest
    CampaignResult out;
    {
        Cluster golden(cluster_cfg);
        golden.set_mode_all(mode);
        install(golden, w);
        auto rr = golden.run(50'000'000ull);
        if (!rr.completed) throw std::runtime_error("golden run did not complete");
        if (!result_correct(golden, w)) throw std::runtime_error("golden run produced bad data");
        out.golden_cycles = rr.cycles;
        out.golden_digest = result_digest(golden, w);
    }

    // per-run fault/seed schedule, fixed before any worker starts
    std::vector<FaultEvent> faults(cc.runs);
    std::vector<uint64_t> seeds(cc.runs);
    uint64_t sm = cc.seed;
    for (int i = 0; i < cc.runs; ++i) {
        seeds[i] = splitmix64(sm);
        Rng rng(seeds[i]);
        faults[i] = random_fault(rng, cluster_cfg.n_cores, out.golden_cycles);
    }

    out.runs.resize(cc.runs);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= cc.runs) return;
            out.runs[i] = classify_run(cluster_cfg, mode, w, out.golden_cycles, faults[i],
                                       cc.hang_factor, i, seeds[i]);
        }
    };
    unsigned n_threads = cc.threads > 0 ? static_cast<unsigned>(cc.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(cc.runs));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (const auto& r : out.runs) {
        switch (r.outcome) {
        case Outcome::Masked: ++out.masked; break;
        case Outcome::DetectedRecovered: ++out.detected_recovered; break;
        case Outcome::Sdc: ++out.sdc; break;
        case Outcome::Hang: ++out.hang; break;
        }
    }
    return out;
}

uint64_t CampaignResult::report_hash() const {
    Fnv1a h;
    h.update_u64(golden_cycles);
    h.update_u64(golden_digest);
    for (const auto& r : runs) {
        h.update_u64(r.seed);
        h.update_u64(r.fault.cycle);
        h.update_u32(static_cast<uint32_t>(r.fault.target_core));
        h.update_u32(static_cast<uint32_t>(r.fault.loc));
        h.update_u32(static_cast<uint32_t>(r.fault.kind));
        h.update_u32(static_cast<uint32_t>(r.fault.reg));
        h.update_u32(static_cast<uint32_t>(r.fault.csr));
        h.update_u32(static_cast<uint32_t>(r.fault.field));
        h.update_u32(static_cast<uint32_t>(r.fault.bit));
        h.update_u32(static_cast<uint32_t>(r.outcome));
        h.update_u64(r.cycles);
        h.update_u64(r.errors_detected);
        h.update_u64(r.recoveries);
        h.update_u32(static_cast<uint32_t>(r.restarts));
    }
    return h.digest();
}

} // namespace hmr
