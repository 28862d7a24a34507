#include "hmrsim/analytics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hmr {

const char* to_string(ExecModel m) {
    switch (m) {
    case ExecModel::DclsSw: return "dcls_sw";
    case ExecModel::DclsRapid: return "dcls_rapid";
    case ExecModel::TclsSw: return "tcls_sw";
    case ExecModel::TclsRapid: return "tcls_rapid";
    }
    return "?";
}

PerfModelParams matmul_model() { return PerfModelParams{}; }

PerfModelParams cfft_model() {
    PerfModelParams p;
    p.ops = 112640.0;
    p.cycles_independent = 48974; // ops * f / MOPS, per-mode, rounded
    p.cycles_dmr = 91217;
    p.cycles_tmr = 125820;
    return p;
}

double mode_cycles(const PerfModelParams& p, ExecModel m) {
    return (m == ExecModel::DclsSw || m == ExecModel::DclsRapid) ? p.cycles_dmr : p.cycles_tmr;
}

double faults_per_kernel(const PerfModelParams& p, ExecModel m, double fault_rate) {
    return fault_rate * mode_cycles(p, m) / p.freq_hz;
}

namespace {

// per-fault cycle cost of the model's recovery path (per-kernel-rerun for
// the software DMR path is handled separately)
double fault_cost(const PerfModelParams& p, ExecModel m, double c) {
    switch (m) {
    case ExecModel::DclsSw: return c;
    case ExecModel::DclsRapid: return p.recovery_rapid;
    case ExecModel::TclsSw: return p.curve_tcls_sw / 2.0;
    case ExecModel::TclsRapid: return p.recovery_rapid / 2.0;
    }
    throw std::invalid_argument("bad model");
}

} // namespace

double gops(const PerfModelParams& p, ExecModel m, double fault_rate) {
    const double c = mode_cycles(p, m);
    const double cost = fault_cost(p, m, c);
    double total;
    if (p.self_consistent) {
        // T = c + cost * rate * T / f  =>  a pole where recovery can no
        // longer keep up with the fault rate
        const double denom = 1.0 - cost * fault_rate / p.freq_hz;
        if (denom <= 0.0) return 0.0;
        total = c / denom;
    } else {
        total = c + cost * faults_per_kernel(p, m, fault_rate);
    }
    return p.ops * p.freq_hz / total;
}

double half_perf_rate(const PerfModelParams& p, ExecModel m) {
    const double target = gops(p, m, 0.0) / 2.0;
    double lo = 0.0, hi = 1.0;
    while (gops(p, m, hi) > target) {
        hi *= 2.0;
        if (hi > 1e15) throw std::runtime_error("half-performance rate out of range");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gops(p, m, mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double crossover_rate(const PerfModelParams& p) {
    // gops equality of the two rapid-recovery curves
    const double denom = p.recovery_rapid * (p.cycles_dmr - 0.5 * p.cycles_tmr);
    if (denom <= 0) throw std::runtime_error("curves do not cross");
    return p.freq_hz * (p.cycles_tmr - p.cycles_dmr) / denom;
}

double runtime_overhead(const PerfModelParams& p, ExecModel m) {
    return (mode_cycles(p, m) - p.cycles_independent) / p.cycles_independent;
}

namespace {

// Poisson sampling by summing small-mean Knuth draws; exact distribution,
// no floating-point underflow, identical on every platform.
uint64_t poisson(Rng& rng, double mean) {
    uint64_t total = 0;
    while (mean > 0) {
        const double lambda = std::min(mean, 16.0);
        mean -= lambda;
        const double limit = std::exp(-lambda);
        double prod = 1.0;
        uint64_t k = 0;
        do {
            ++k;
            prod *= rng.uniform01();
        } while (prod > limit);
        total += k - 1;
    }
    return total;
}

} // namespace

MonteCarloResult monte_carlo_validate(const PerfModelParams& p, ExecModel m, double fault_rate,
                                      int trials, uint64_t seed) {
    if (trials <= 0) throw std::invalid_argument("trials must be positive");
    const double c = mode_cycles(p, m);
    const double n_mean = faults_per_kernel(p, m, fault_rate);
    Rng rng(seed);
    double total_cycles = 0.0;
    for (int t = 0; t < trials; ++t) {
        const uint64_t n = poisson(rng, n_mean);
        double cost;
        switch (m) {
        case ExecModel::DclsSw: cost = c * static_cast<double>(n); break;
        case ExecModel::DclsRapid: cost = p.recovery_rapid * static_cast<double>(n); break;
        case ExecModel::TclsSw: cost = p.curve_tcls_sw * static_cast<double>(n / 2); break;
        case ExecModel::TclsRapid: cost = p.recovery_rapid * static_cast<double>(n / 2); break;
        default: throw std::invalid_argument("bad model");
        }
        total_cycles += c + cost;
    }
    MonteCarloResult r;
    r.analytic = gops(p, m, fault_rate);
    // ratio estimator: total work over total time, not a mean of ratios
    r.simulated = p.ops * static_cast<double>(trials) * p.freq_hz / total_cycles;
    r.rel_err = std::abs(r.simulated - r.analytic) / r.analytic;
    return r;
}

std::vector<CurvePoint> degradation_curves(const PerfModelParams& p, double rate_min,
                                           double rate_max, int points) {
    if (rate_min <= 0 || rate_max <= rate_min || points < 2)
        throw std::invalid_argument("bad curve range");
    std::vector<CurvePoint> pts(points);
    const double step = std::log(rate_max / rate_min) / (points - 1);
    for (int i = 0; i < points; ++i) {
        const double x = rate_min * std::exp(step * i);
        pts[i].fault_rate = x;
        pts[i].dcls_sw = gops(p, ExecModel::DclsSw, x);
        pts[i].dcls_rapid = gops(p, ExecModel::DclsRapid, x);
        pts[i].tcls_sw = gops(p, ExecModel::TclsSw, x);
        pts[i].tcls_rapid = gops(p, ExecModel::TclsRapid, x);
    }
    return pts;
}

std::string curves_csv(const std::vector<CurvePoint>& pts) {
    std::ostringstream os;
    os << "fault_rate,dcls_sw,dcls_rapid,tcls_sw,tcls_rapid\n";
    os.precision(9);
    for (const auto& c : pts)
        os << c.fault_rate << ',' << c.dcls_sw << ',' << c.dcls_rapid << ',' << c.tcls_sw << ','
           << c.tcls_rapid << '\n';
    return os.str();
}

} // namespace hmr
