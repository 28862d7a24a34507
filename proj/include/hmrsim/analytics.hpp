#pragma once

#include <string>
#include <vector>

#include "hmrsim/types.hpp"

namespace hmr {

/// Closed-form performance-degradation model of the redundancy modes under
/// a sustained fault rate.
struct PerfModelParams {
    double freq_hz = 430e6;
    double ops = 27648.0;              // kernel operation count (matmul)
    double cycles_independent = 10203; // kernel cycles, all cores independent
    double cycles_dmr = 19266;
    double cycles_tmr = 28708;
    double recovery_tcls_sw = 363; // simulated software-recovery latency
    double recovery_rapid = 24;    // rapid-recovery latency
    // Constant used by the published TCLS-SW degradation curve; it differs
    // from the simulated recovery latency by the interrupt-entry overhead.
    double curve_tcls_sw = 383;
    // Alternative rate convention: solve the fixed point where the fault
    // count is drawn over the *degraded* runtime instead of the nominal one.
    bool self_consistent = false;
};

/// Kernel presets (matmul is the default-constructed parameter set).
PerfModelParams matmul_model();
PerfModelParams cfft_model();

enum class ExecModel : uint8_t { DclsSw, DclsRapid, TclsSw, TclsRapid };
const char* to_string(ExecModel m);

/// Kernel cycles of the redundancy mode backing the execution model.
double mode_cycles(const PerfModelParams& p, ExecModel m);

/// Mean faults hitting one kernel execution at the given cluster-wide
/// fault rate (faults/s).
double faults_per_kernel(const PerfModelParams& p, ExecModel m, double fault_rate);

/// Throughput (operations/s) at a sustained fault rate. At rate zero this
/// is the fault-free throughput of the mode.
double gops(const PerfModelParams& p, ExecModel m, double fault_rate);

/// Fault rate at which throughput halves, found by bisection.
double half_perf_rate(const PerfModelParams& p, ExecModel m);

/// Fault rate where the DCLS-rapid and TCLS-rapid curves cross (closed form).
double crossover_rate(const PerfModelParams& p);

/// Fault-free runtime overhead of a mode relative to independent execution.
double runtime_overhead(const PerfModelParams& p, ExecModel m);

struct MonteCarloResult {
    double analytic = 0;  // closed-form throughput
    double simulated = 0; // sampled throughput (ratio estimator)
    double rel_err = 0;
};

/// Validates the closed-form curve by sampling Poisson-distributed fault
/// counts per kernel and charging the per-model recovery cost.
MonteCarloResult monte_carlo_validate(const PerfModelParams& p, ExecModel m, double fault_rate,
                                      int trials, uint64_t seed);

struct CurvePoint {
    double fault_rate = 0;
    double dcls_sw = 0, dcls_rapid = 0, tcls_sw = 0, tcls_rapid = 0;
};
/// Log-spaced degradation curves over [rate_min, rate_max].
std::vector<CurvePoint> degradation_curves(const PerfModelParams& p, double rate_min,
                                           double rate_max, int points);
std::string curves_csv(const std::vector<CurvePoint>& pts);

} // namespace hmr
