#include "hmrsim/workloads.hpp"

#include <sstream>

namespace hmr {

namespace {

std::string prologue(const ClusterConfig& cfg) {
    std::ostringstream os;
    os << "    j start\n";
    os << ".org " << cfg.mtvec << "\n";
    os << "trap: j trap\n"; // unexpected traps spin (visible as a hang)
    os << ".org 0x100\n";
    os << "start:\n";
    os << "    csrrs x5, mhartid, x0\n";
    os << "    csrrs x6, nworkers, x0\n";
    // descending per-virtual-core stack below the TCDM top
    os << "    li sp, " << (cfg.tcdm_base + cfg.tcdm_size) << "\n";
    os << "    li x7, " << cfg.stack_bytes_per_core << "\n";
    os << "    mul x7, x5, x7\n";
    os << "    sub sp, sp, x7\n";
    return os.str();
}

std::string epilogue(const ClusterConfig& cfg) {
    std::ostringstream os;
    os << "done:\n";
    os << "    li x28, " << (cfg.periph_base + periph::kEventOffset) << "\n";
    os << "    lw x29, 0(x28)\n"; // blocking barrier read
    os << "    li x30, " << (cfg.periph_base + periph::kSimCtrlOffset) << "\n";
    os << "    sw x5, 0(x30)\n"; // exit signal
    os << "spin: j spin\n";
    return os.str();
}

} // namespace

Workload matmul_workload(const ClusterConfig& cfg, int dim) {
    const Word a_base = cfg.tcdm_base;
    const Word words = static_cast<Word>(dim) * static_cast<Word>(dim);
    const Word b_base = a_base + 4 * words;
    const Word c_base = b_base + 4 * words;

    Workload w;
    w.result_base = c_base;
    w.result_words = words;
    std::vector<Word> a(words), b(words);
    for (Word i = 0; i < words; ++i) {
        a[i] = (i * 7 + 3) & 0xFF;
        b[i] = (i * 5 + 1) & 0xFF;
        w.data.push_back({a_base + 4 * i, a[i]});
        w.data.push_back({b_base + 4 * i, b[i]});
        w.data.push_back({c_base + 4 * i, 0});
    }
    w.expected.resize(words, 0);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            Word acc = 0;
            for (int k = 0; k < dim; ++k) acc += a[i * dim + k] * b[k * dim + j];
            w.expected[i * dim + j] = acc;
        }

    std::ostringstream os;
    os << prologue(cfg);
    os << "    li x8, " << a_base << "\n";
    os << "    li x9, " << b_base << "\n";
    os << "    li x10, " << c_base << "\n";
    os << "    li x11, " << dim << "\n";
    os << "    mv x12, x5\n"; // i = virtual id, strided by worker count
    os << "row_loop:\n";
    os << "    bge x12, x11, done\n";
    os << "    li x13, 0\n"; // j
    os << "col_loop:\n";
    os << "    bge x13, x11, next_row\n";
    os << "    li x14, 0\n"; // acc
    os << "    li x15, 0\n"; // k
    os << "k_loop:\n";
    os << "    bge x15, x11, k_done\n";
    os << "    mul x16, x12, x11\n"; // A[i*dim + k]
    os << "    add x16, x16, x15\n";
    os << "    slli x16, x16, 2\n";
    os << "    add x16, x16, x8\n";
    os << "    lw x17, 0(x16)\n";
    os << "    mul x18, x15, x11\n"; // B[k*dim + j]
    os << "    add x18, x18, x13\n";
    os << "    slli x18, x18, 2\n";
    os << "    add x18, x18, x9\n";
    os << "    lw x19, 0(x18)\n";
    os << "    mul x20, x17, x19\n";
    os << "    add x14, x14, x20\n";
    os << "    addi x15, x15, 1\n";
    os << "    j k_loop\n";
    os << "k_done:\n";
    os << "    mul x16, x12, x11\n"; // C[i*dim + j]
    os << "    add x16, x16, x13\n";
    os << "    slli x16, x16, 2\n";
    os << "    add x16, x16, x10\n";
    os << "    sw x14, 0(x16)\n";
    os << "    addi x13, x13, 1\n";
    os << "    j col_loop\n";
    os << "next_row:\n";
    os << "    add x12, x12, x6\n";
    os << "    j row_loop\n";
    os << epilogue(cfg);
    w.program = assemble(os.str());
    return w;
}

Workload counter_workload(const ClusterConfig& cfg, int iters) {
    const Word c_base = cfg.tcdm_base + 0x4000;
    Workload w;
    w.result_base = c_base;
    w.result_words = static_cast<size_t>(cfg.n_cores);
    const Word sum = static_cast<Word>(iters) * static_cast<Word>(iters - 1) / 2;
    for (int i = 0; i < cfg.n_cores; ++i) {
        w.data.push_back({c_base + 4 * static_cast<Word>(i), 0});
        w.expected.push_back(sum); // non-worker slots stay 0, see result_correct
    }

    std::ostringstream os;
    os << prologue(cfg);
    os << "    li x10, 0\n"; // acc
    os << "    li x11, 0\n"; // i
    os << "    li x12, " << iters << "\n";
    os << "loop:\n";
    os << "    bge x11, x12, store\n";
    os << "    add x10, x10, x11\n";
    os << "    addi x11, x11, 1\n";
    os << "    j loop\n";
    os << "store:\n";
    os << "    li x13, " << c_base << "\n";
    os << "    slli x14, x5, 2\n";
    os << "    add x14, x14, x13\n";
    os << "    sw x10, 0(x14)\n";
    os << epilogue(cfg);
    w.program = assemble(os.str());
    return w;
}

void install(Cluster& c, const Workload& w) {
    c.load_program(w.program);
    for (const auto& [addr, value] : w.data)
        c.tcdm().store_word(addr - c.config().tcdm_base, value);
}

bool result_correct(const Cluster& c, const Workload& w) {
    const Word base = w.result_base - c.config().tcdm_base;
    for (size_t i = 0; i < w.result_words; ++i)
        if (c.tcdm().load_word(base + 4 * static_cast<Word>(i)) != w.expected[i]) return false;
    return true;
}

uint64_t result_digest(const Cluster& c, const Workload& w) {
    return c.tcdm().digest(w.result_base - c.config().tcdm_base, w.result_words * 4);
}

} // namespace hmr
