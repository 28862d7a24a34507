#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hmrsim/analytics.hpp"
#include "hmrsim/cluster.hpp"
#include "hmrsim/faults.hpp"

namespace hmr {

/// Parsed scenario file. One file drives one of the three front-end
/// commands; unknown keys anywhere in the file are rejected.
struct Scenario {
    std::string kind = "run"; // run | inject | model

    // cluster
    int n_cores = 12;
    int banking_factor = 2;
    Mode mode = Mode::Independent;
    bool rapid_recovery = false;
    bool sync_clear_on_recovery = true;
    bool tmr_delayed_resync = false;
    bool calibrated = false;

    // workload
    std::string workload = "matmul"; // matmul | counter
    int dim = 12;
    int iters = 64;
    uint64_t max_cycles = 10'000'000;

    // explicitly scheduled faults (run kind)
    std::vector<FaultEvent> faults;

    // campaign (inject kind)
    CampaignConfig campaign;

    // degradation model (model kind)
    PerfModelParams model;
    double rate_min = 1e3;
    double rate_max = 1e9;
    int points = 61;
    int mc_trials = 20000;

    uint64_t digest = 0; // digest of the normalized source document
};

Mode parse_mode(const std::string& s);
const char* mode_name(Mode m);

Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);

ClusterConfig to_cluster_config(const Scenario& s);

/// Report builders; every report embeds the scenario digest and seed so a
/// result can be traced back to its exact configuration.
nlohmann::json run_report(const Scenario& s);
nlohmann::json inject_report(const Scenario& s);
nlohmann::json model_report(const Scenario& s);

} // namespace hmr
