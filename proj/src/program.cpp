#include "hmrsim/program.hpp"

#include <cctype>
#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace hmr {

namespace {

const std::unordered_map<std::string, int>& reg_names() {
    static const std::unordered_map<std::string, int> m = [] {
        std::unordered_map<std::string, int> r;
        for (int i = 0; i < 32; ++i) r["x" + std::to_string(i)] = i;
        const char* abi[32] = {"zero", "ra", "sp",  "gp",  "tp", "t0", "t1", "t2",
                               "s0",   "s1", "a0",  "a1",  "a2", "a3", "a4", "a5",
                               "a6",   "a7", "s2",  "s3",  "s4", "s5", "s6", "s7",
                               "s8",   "s9", "s10", "s11", "t3", "t4", "t5", "t6"};
        for (int i = 0; i < 32; ++i) r[abi[i]] = i;
        r["fp"] = 8;
        return r;
    }();
    return m;
}

const std::unordered_map<std::string, int>& csr_names() {
    static const std::unordered_map<std::string, int> m = {
        {"mstatus", 0x300}, {"mtvec", 0x305},   {"mepc", 0x341},
        {"mcause", 0x342},  {"mhartid", 0xF14}, {"nworkers", 0xCC1},
    };
    return m;
}

struct Line {
    std::string mnemonic;
    std::vector<std::string> args;
    int number = 0;
};

[[noreturn]] void fail(const Line& l, const std::string& msg) {
    throw std::runtime_error("asm line " + std::to_string(l.number) + ": " + msg);
}

int parse_reg(const Line& l, const std::string& s) {
    auto it = reg_names().find(s);
    if (it == reg_names().end()) fail(l, "unknown register '" + s + "'");
    return it->second;
}

int64_t parse_int(const Line& l, const std::string& s) {
    try {
        size_t pos = 0;
        int64_t v = std::stoll(s, &pos, 0);
        if (pos != s.size()) fail(l, "bad integer '" + s + "'");
        return v;
    } catch (const std::invalid_argument&) {
        fail(l, "bad integer '" + s + "'");
    } catch (const std::out_of_range&) {
        fail(l, "integer out of range '" + s + "'");
    }
}

int parse_csr(const Line& l, const std::string& s) {
    auto it = csr_names().find(s);
    if (it != csr_names().end()) return it->second;
    int64_t v = parse_int(l, s);
    if (v < 0 || v > 0xFFF) fail(l, "csr address out of range");
    return static_cast<int>(v);
}

Word enc_r(int f7, int rs2, int rs1, int f3, int rd, int op) {
    return (f7 << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | op;
}
Word enc_i(int64_t imm, int rs1, int f3, int rd, int op) {
    return ((imm & 0xFFF) << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | op;
}
Word enc_s(int64_t imm, int rs2, int rs1, int f3, int op) {
    return (((imm >> 5) & 0x7F) << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) |
           ((imm & 0x1F) << 7) | op;
}
Word enc_b(int64_t imm, int rs2, int rs1, int f3) {
    return (((imm >> 12) & 1) << 31) | (((imm >> 5) & 0x3F) << 25) | (rs2 << 20) | (rs1 << 15) |
           (f3 << 12) | (((imm >> 1) & 0xF) << 8) | (((imm >> 11) & 1) << 7) | 0x63;
}
Word enc_u(int64_t imm20, int rd, int op) { return ((imm20 & 0xFFFFF) << 12) | (rd << 7) | op; }
Word enc_j(int64_t imm, int rd) {
    return (((imm >> 20) & 1) << 31) | (((imm >> 1) & 0x3FF) << 21) | (((imm >> 11) & 1) << 20) |
           (((imm >> 12) & 0xFF) << 12) | (rd << 7) | 0x6F;
}

// splits "imm(reg)" used by loads and stores
void parse_mem_operand(const Line& l, const std::string& s, int64_t& imm, int& rs1) {
    auto open = s.find('(');
    auto close = s.find(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        fail(l, "expected imm(reg), got '" + s + "'");
    std::string imm_s = s.substr(0, open);
    imm = imm_s.empty() ? 0 : parse_int(l, imm_s);
    rs1 = parse_reg(l, s.substr(open + 1, close - open - 1));
}

} // namespace

Program assemble(const std::string& source) {
    // pass 1: tokenize, expand pseudo-instruction sizes, collect labels
    std::istringstream in(source);
    std::string raw;
    std::vector<Line> lines;
    std::map<std::string, Word> labels;
    Word addr = 0;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        auto cut = raw.find('#');
        if (cut != std::string::npos) raw.resize(cut);
        cut = raw.find("//");
        if (cut != std::string::npos) raw.resize(cut);
        // labels (possibly several) at line start
        for (;;) {
            size_t i = 0;
            while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
            size_t j = i;
            while (j < raw.size() &&
                   (std::isalnum(static_cast<unsigned char>(raw[j])) || raw[j] == '_'))
                ++j;
            if (j > i && j < raw.size() && raw[j] == ':') {
                labels[raw.substr(i, j - i)] = addr;
                raw = raw.substr(j + 1);
            } else {
                break;
            }
        }
        Line l;
        l.number = lineno;
        std::istringstream ls(raw);
        if (!(ls >> l.mnemonic)) continue;
        std::string rest;
        std::getline(ls, rest);
        std::string tok;
        for (char c : rest) {
            if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
                if (!tok.empty()) l.args.push_back(tok);
                tok.clear();
            } else {
                tok += c;
            }
        }
        if (!tok.empty()) l.args.push_back(tok);

        if (l.mnemonic == ".org") {
            int64_t target = parse_int(l, l.args.at(0));
            if (target < addr || (target & 3)) fail(l, ".org must move forward, word-aligned");
            addr = static_cast<Word>(target);
            lines.push_back(l);
            continue;
        }
        lines.push_back(l);
        if (l.mnemonic == "li")
            addr += 8; // worst case lui+addi; fixed size keeps label math simple
        else
            addr += 4;
    }

    // pass 2: encode
    Program prog;
    auto emit_at = [&prog](Word a, Word w) {
        Word idx = a / 4;
        if (prog.words.size() <= idx) prog.words.resize(idx + 1, 0);
        prog.words[idx] = w;
    };
    addr = 0;
    auto resolve = [&](const Line& l, const std::string& s) -> int64_t {
        auto it = labels.find(s);
        if (it != labels.end()) return it->second;
        return parse_int(l, s);
    };

    for (const Line& l : lines) {
        const std::string& m = l.mnemonic;
        auto arg = [&](size_t i) -> const std::string& {
            if (i >= l.args.size()) fail(l, "missing operand");
            return l.args[i];
        };
        if (m == ".org") {
            addr = static_cast<Word>(parse_int(l, l.args.at(0)));
            continue;
        }
        if (m == ".word") {
            emit_at(addr, static_cast<Word>(resolve(l, arg(0))));
            addr += 4;
            continue;
        }
        if (m == "li") {
            int rd = parse_reg(l, arg(0));
            int64_t v = resolve(l, arg(1));
            Word uv = static_cast<Word>(v);
            Word hi = (uv + 0x800) >> 12;
            Word lo = uv - (hi << 12);
            emit_at(addr, enc_u(hi, rd, 0x37));
            emit_at(addr + 4, enc_i(static_cast<int32_t>(lo << 20) >> 20, rd, 0, rd, 0x13));
            addr += 8;
            continue;
        }
        Word w = 0;
        if (m == "lui" || m == "auipc") {
            int rd = parse_reg(l, arg(0));
            int64_t imm = parse_int(l, arg(1));
            w = enc_u(imm, rd, m == "lui" ? 0x37 : 0x17);
        } else if (m == "jal") {
            int rd = l.args.size() == 2 ? parse_reg(l, arg(0)) : 1;
            int64_t target = resolve(l, l.args.size() == 2 ? arg(1) : arg(0));
            w = enc_j(target - addr, rd);
        } else if (m == "j") {
            w = enc_j(resolve(l, arg(0)) - addr, 0);
        } else if (m == "jalr") {
            int rd = parse_reg(l, arg(0));
            int64_t imm;
            int rs1;
            parse_mem_operand(l, arg(1), imm, rs1);
            w = enc_i(imm, rs1, 0, rd, 0x67);
        } else if (m == "beq" || m == "bne" || m == "blt" || m == "bge" || m == "bltu" ||
                   m == "bgeu") {
            static const std::unordered_map<std::string, int> f3{
                {"beq", 0}, {"bne", 1}, {"blt", 4}, {"bge", 5}, {"bltu", 6}, {"bgeu", 7}};
            int rs1 = parse_reg(l, arg(0));
            int rs2 = parse_reg(l, arg(1));
            w = enc_b(resolve(l, arg(2)) - addr, rs2, rs1, f3.at(m));
        } else if (m == "lw") {
            int rd = parse_reg(l, arg(0));
            int64_t imm;
            int rs1;
            parse_mem_operand(l, arg(1), imm, rs1);
            w = enc_i(imm, rs1, 2, rd, 0x03);
        } else if (m == "sw") {
            int rs2 = parse_reg(l, arg(0));
            int64_t imm;
            int rs1;
            parse_mem_operand(l, arg(1), imm, rs1);
            w = enc_s(imm, rs2, rs1, 2, 0x23);
        } else if (m == "addi" || m == "slti" || m == "sltiu" || m == "xori" || m == "ori" ||
                   m == "andi") {
            static const std::unordered_map<std::string, int> f3{{"addi", 0}, {"slti", 2},
                                                                 {"sltiu", 3}, {"xori", 4},
                                                                 {"ori", 6},  {"andi", 7}};
            w = enc_i(parse_int(l, arg(2)), parse_reg(l, arg(1)), f3.at(m), parse_reg(l, arg(0)),
                      0x13);
        } else if (m == "slli" || m == "srli" || m == "srai") {
            int sh = static_cast<int>(parse_int(l, arg(2))) & 0x1F;
            int f7 = (m == "srai") ? 0x20 : 0;
            int f3 = (m == "slli") ? 1 : 5;
            w = enc_r(f7, sh, parse_reg(l, arg(1)), f3, parse_reg(l, arg(0)), 0x13);
        } else if (m == "add" || m == "sub" || m == "sll" || m == "slt" || m == "sltu" ||
                   m == "xor" || m == "srl" || m == "sra" || m == "or" || m == "and" ||
                   m == "mul") {
            static const std::unordered_map<std::string, std::pair<int, int>> enc{
                {"add", {0, 0}},    {"sub", {0x20, 0}}, {"sll", {0, 1}}, {"slt", {0, 2}},
                {"sltu", {0, 3}},   {"xor", {0, 4}},    {"srl", {0, 5}}, {"sra", {0x20, 5}},
                {"or", {0, 6}},     {"and", {0, 7}},    {"mul", {1, 0}}};
            auto [f7, f3] = enc.at(m);
            w = enc_r(f7, parse_reg(l, arg(2)), parse_reg(l, arg(1)), f3, parse_reg(l, arg(0)),
                      0x33);
        } else if (m == "mv") {
            w = enc_i(0, parse_reg(l, arg(1)), 0, parse_reg(l, arg(0)), 0x13);
        } else if (m == "nop") {
            w = enc_i(0, 0, 0, 0, 0x13);
        } else if (m == "csrrw" || m == "csrrs") {
            int rd = parse_reg(l, arg(0));
            int csr = parse_csr(l, arg(1));
            int rs1 = parse_reg(l, arg(2));
            w = enc_i(csr, rs1, m == "csrrw" ? 1 : 2, rd, 0x73);
        } else if (m == "mret") {
            w = 0x30200073;
        } else {
            fail(l, "unknown mnemonic '" + m + "'");
        }
        emit_at(addr, w);
        addr += 4;
    }
    return prog;
}

Program load_flat_binary(const std::vector<uint8_t>& bytes) {
    Program p;
    p.words.resize((bytes.size() + 3) / 4, 0);
    for (size_t i = 0; i < bytes.size(); ++i)
        p.words[i / 4] |= static_cast<Word>(bytes[i]) << (8 * (i % 4));
    return p;
}

} // namespace hmr
