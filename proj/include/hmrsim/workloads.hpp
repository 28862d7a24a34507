#pragma once

#include <vector>

#include "hmrsim/cluster.hpp"
#include "hmrsim/program.hpp"

namespace hmr {

/// A self-checking kernel: program, initial data image and the reference
/// result the cluster must produce in its result region.
struct Workload {
    Program program;
    std::vector<std::pair<Word, Word>> data; // absolute address, value
    Word result_base = 0;                    // absolute
    size_t result_words = 0;
    std::vector<Word> expected;
    uint64_t golden_cycles_hint = 0; // filled by campaigns after the golden run
};

/// dim x dim integer matrix multiply, rows partitioned over the virtual
/// cores. Ends with a barrier and a per-core exit signal.
Workload matmul_workload(const ClusterConfig& cfg, int dim = 12);

/// Tiny arithmetic kernel (sum 0..iters-1 per virtual core); useful while
/// exercising the split-lock protocol around running cores.
Workload counter_workload(const ClusterConfig& cfg, int iters = 64);

void install(Cluster& c, const Workload& w);
bool result_correct(const Cluster& c, const Workload& w);
/// FNV-1a digest of the result region as currently held in the TCDM.
uint64_t result_digest(const Cluster& c, const Workload& w);

} // namespace hmr
