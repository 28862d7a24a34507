#pragma once

#include <string>
#include <vector>

#include "hmrsim/cluster.hpp"
#include "hmrsim/workloads.hpp"

namespace hmr {

enum class Outcome : uint8_t { Masked, DetectedRecovered, Sdc, Hang };
const char* to_string(Outcome o);

struct CampaignConfig {
    int runs = 100;
    uint64_t seed = 1;
    int matmul_dim = 12;
    uint64_t hang_factor = 10; // hang = no completion within factor * golden cycles
    int threads = 0;           // 0: one per hardware thread
};

struct RunRecord {
    int index = 0;
    uint64_t seed = 0;
    FaultEvent fault;
    Outcome outcome = Outcome::Masked;
    uint64_t cycles = 0;
    uint64_t errors_detected = 0;
    size_t recoveries = 0;
    int restarts = 0;
};

struct CampaignResult {
    uint64_t golden_cycles = 0;
    uint64_t golden_digest = 0;
    std::vector<RunRecord> runs;
    size_t masked = 0, detected_recovered = 0, sdc = 0, hang = 0;
    /// digest over every run record; equal digests mean bit-identical campaigns
    uint64_t report_hash() const;
};

/// Draws one uniformly distributed single-bit fault over all architectural
/// state bits and interface bits of a random core, at a random cycle within
/// the golden execution window.
FaultEvent random_fault(Rng& rng, int n_cores, uint64_t golden_cycles);

/// One faulty run against a fresh cluster; classifies the outcome against
/// the golden result.
RunRecord classify_run(const ClusterConfig& cluster_cfg, Mode mode, const Workload& w,
                       uint64_t golden_cycles, const FaultEvent& fault, uint64_t hang_factor,
                       int index, uint64_t seed);

/// Full injection campaign: one fault per run, runs dispatched over a
/// thread pool, results ordered and bit-reproducible for a given seed.
CampaignResult run_campaign(const ClusterConfig& cluster_cfg, Mode mode,
                            const CampaignConfig& cc);

} // namespace hmr
