#include "hmrsim/scenario.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "hmrsim/workloads.hpp"

namespace hmr {

using nlohmann::json;

Mode parse_mode(const std::string& s) {
    if (s == "independent") return Mode::Independent;
    if (s == "dmr") return Mode::Dmr;
    if (s == "tmr") return Mode::Tmr;
    throw std::invalid_argument("unknown mode '" + s + "'");
}

const char* mode_name(Mode m) {
    switch (m) {
    case Mode::Independent: return "independent";
    case Mode::Dmr: return "dmr";
    case Mode::Tmr: return "tmr";
    }
    return "?";
}

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw std::invalid_argument(where + ": expected an object");
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k))
            throw std::invalid_argument(where + ": unknown key '" + k + "'");
}

FaultEvent parse_fault(const json& f) {
    check_keys(f, "faults[]", {"cycle", "core", "loc", "kind", "reg", "csr", "field", "bit"});
    FaultEvent e;
    e.cycle = f.at("cycle").get<uint64_t>();
    e.target_core = f.at("core").get<int>();
    const std::string loc = f.at("loc").get<std::string>();
    if (loc == "rf")
        e.loc = FaultEvent::Loc::RfBit;
    else if (loc == "pc")
        e.loc = FaultEvent::Loc::PcBit;
    else if (loc == "csr")
        e.loc = FaultEvent::Loc::CsrBit;
    else if (loc == "interface")
        e.loc = FaultEvent::Loc::InterfaceBit;
    else
        throw std::invalid_argument("unknown fault loc '" + loc + "'");
    e.kind = e.loc == FaultEvent::Loc::InterfaceBit ? FaultEvent::Kind::Set : FaultEvent::Kind::Seu;
    if (f.contains("kind")) {
        const std::string k = f.at("kind").get<std::string>();
        if (k == "seu")
            e.kind = FaultEvent::Kind::Seu;
        else if (k == "set")
            e.kind = FaultEvent::Kind::Set;
        else
            throw std::invalid_argument("unknown fault kind '" + k + "'");
    }
    if (f.contains("reg")) e.reg = f.at("reg").get<int>();
    if (f.contains("csr")) {
        const std::string c = f.at("csr").get<std::string>();
        if (c == "mepc")
            e.csr = CsrId::Mepc;
        else if (c == "mcause")
            e.csr = CsrId::Mcause;
        else if (c == "mtvec")
            e.csr = CsrId::Mtvec;
        else if (c == "mie")
            e.csr = CsrId::MstatusMie;
        else
            throw std::invalid_argument("unknown csr '" + c + "'");
    }
    if (f.contains("field")) {
        const std::string fl = f.at("field").get<std::string>();
        if (fl == "ifetch_addr")
            e.field = FaultEvent::Field::IfetchAddr;
        else if (fl == "valid")
            e.field = FaultEvent::Field::Valid;
        else if (fl == "addr")
            e.field = FaultEvent::Field::Addr;
        else if (fl == "wdata")
            e.field = FaultEvent::Field::Wdata;
        else if (fl == "we")
            e.field = FaultEvent::Field::We;
        else if (fl == "byte_en")
            e.field = FaultEvent::Field::ByteEn;
        else
            throw std::invalid_argument("unknown fault field '" + fl + "'");
    }
    if (f.contains("bit")) e.bit = f.at("bit").get<int>();
    return e;
}

uint64_t document_digest(const json& doc) {
    const std::string dump = doc.dump(); // nlohmann sorts object keys
    Fnv1a h;
    h.update(dump.data(), dump.size());
    return h.digest();
}

} // namespace

Scenario parse_scenario(const json& doc) {
    check_keys(doc, "scenario", {"kind", "cluster", "workload", "faults", "campaign", "model"});
    Scenario s;
    s.digest = document_digest(doc);
    if (doc.contains("kind")) s.kind = doc.at("kind").get<std::string>();
    if (s.kind != "run" && s.kind != "inject" && s.kind != "model")
        throw std::invalid_argument("unknown scenario kind '" + s.kind + "'");

    if (doc.contains("cluster")) {
        const json& c = doc.at("cluster");
        check_keys(c, "cluster",
                   {"n_cores", "banking_factor", "mode", "rapid_recovery",
                    "sync_clear_on_recovery", "tmr_delayed_resync", "calibrated"});
        if (c.contains("n_cores")) s.n_cores = c.at("n_cores").get<int>();
        if (c.contains("banking_factor")) s.banking_factor = c.at("banking_factor").get<int>();
        if (c.contains("mode")) s.mode = parse_mode(c.at("mode").get<std::string>());
        if (c.contains("rapid_recovery")) s.rapid_recovery = c.at("rapid_recovery").get<bool>();
        if (c.contains("sync_clear_on_recovery"))
            s.sync_clear_on_recovery = c.at("sync_clear_on_recovery").get<bool>();
        if (c.contains("tmr_delayed_resync"))
            s.tmr_delayed_resync = c.at("tmr_delayed_resync").get<bool>();
        if (c.contains("calibrated")) s.calibrated = c.at("calibrated").get<bool>();
    }
    if (doc.contains("workload")) {
        const json& w = doc.at("workload");
        check_keys(w, "workload", {"name", "dim", "iters", "max_cycles"});
        if (w.contains("name")) s.workload = w.at("name").get<std::string>();
        if (s.workload != "matmul" && s.workload != "counter" && s.workload != "cfft")
            throw std::invalid_argument("unknown workload '" + s.workload + "'");
        if (w.contains("dim")) s.dim = w.at("dim").get<int>();
        if (w.contains("iters")) s.iters = w.at("iters").get<int>();
        if (w.contains("max_cycles")) s.max_cycles = w.at("max_cycles").get<uint64_t>();
    }
    if (doc.contains("faults"))
        for (const json& f : doc.at("faults")) s.faults.push_back(parse_fault(f));
    if (doc.contains("campaign")) {
        const json& c = doc.at("campaign");
        check_keys(c, "campaign", {"runs", "seed", "hang_factor", "threads"});
        if (c.contains("runs")) s.campaign.runs = c.at("runs").get<int>();
        if (c.contains("seed")) s.campaign.seed = c.at("seed").get<uint64_t>();
        if (c.contains("hang_factor")) s.campaign.hang_factor = c.at("hang_factor").get<uint64_t>();
        if (c.contains("threads")) s.campaign.threads = c.at("threads").get<int>();
    }
    s.campaign.matmul_dim = s.dim;
    if (s.workload == "cfft") s.model = cfft_model(); // analytics-only preset
    if (doc.contains("model")) {
        const json& m = doc.at("model");
        check_keys(m, "model",
                   {"freq_hz", "ops", "cycles_independent", "cycles_dmr", "cycles_tmr",
                    "recovery_tcls_sw", "recovery_rapid", "curve_tcls_sw", "self_consistent",
                    "rate_min", "rate_max", "points", "mc_trials"});
        if (m.contains("freq_hz")) s.model.freq_hz = m.at("freq_hz").get<double>();
        if (m.contains("ops")) s.model.ops = m.at("ops").get<double>();
        if (m.contains("cycles_independent"))
            s.model.cycles_independent = m.at("cycles_independent").get<double>();
        if (m.contains("cycles_dmr")) s.model.cycles_dmr = m.at("cycles_dmr").get<double>();
        if (m.contains("cycles_tmr")) s.model.cycles_tmr = m.at("cycles_tmr").get<double>();
        if (m.contains("recovery_tcls_sw"))
            s.model.recovery_tcls_sw = m.at("recovery_tcls_sw").get<double>();
        if (m.contains("recovery_rapid"))
            s.model.recovery_rapid = m.at("recovery_rapid").get<double>();
        if (m.contains("curve_tcls_sw")) s.model.curve_tcls_sw = m.at("curve_tcls_sw").get<double>();
        if (m.contains("self_consistent"))
            s.model.self_consistent = m.at("self_consistent").get<bool>();
        if (m.contains("rate_min")) s.rate_min = m.at("rate_min").get<double>();
        if (m.contains("rate_max")) s.rate_max = m.at("rate_max").get<double>();
        if (m.contains("points")) s.points = m.at("points").get<int>();
        if (m.contains("mc_trials")) s.mc_trials = m.at("mc_trials").get<int>();
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    json doc = json::parse(in);
    return parse_scenario(doc);
}

ClusterConfig to_cluster_config(const Scenario& s) {
    ClusterConfig cfg;
    cfg.n_cores = s.n_cores;
    cfg.banking_factor = s.banking_factor;
    cfg.options.rapid_recovery_enabled = s.rapid_recovery;
    cfg.options.sync_clear_on_recovery = s.sync_clear_on_recovery;
    cfg.options.tmr_delayed_resync = s.tmr_delayed_resync;
    cfg.calibrated = s.calibrated;
    return cfg;
}

namespace {

json header(const Scenario& s) {
    json h;
    h["kind"] = s.kind;
    h["config_digest"] = s.digest;
    h["mode"] = mode_name(s.mode);
    h["seed"] = s.campaign.seed;
    return h;
}

json trace_json(const RecoveryTrace& t) {
    json j;
    j["kind"] = t.kind;
    j["group"] = t.group;
    j["start_cycle"] = t.start_cycle;
    j["total_cycles"] = t.total_cycles();
    j["ecc_corrections"] = t.ecc_corrections;
    j["ecc_uncorrectable"] = t.ecc_uncorrectable;
    j["escalated"] = t.escalated;
    json phases = json::array();
    for (const auto& p : t.phases) phases.push_back({{"name", p.name}, {"cycles", p.cycles}});
    j["phases"] = phases;
    return j;
}

} // namespace

json run_report(const Scenario& s) {
    if (s.workload == "cfft")
        throw std::invalid_argument("cfft is an analytics-only workload, use the model command");
    ClusterConfig cfg = to_cluster_config(s);
    Workload w = s.workload == "matmul" ? matmul_workload(cfg, s.dim)
                                        : counter_workload(cfg, s.iters);
    Cluster c(cfg);
    c.set_mode_all(s.mode);
    install(c, w);
    for (const auto& f : s.faults) c.schedule_fault(f);
    auto rr = c.run(s.max_cycles);

    json rep = header(s);
    rep["cycles"] = rr.cycles;
    rep["completed"] = rr.completed;
    rep["hung"] = rr.hung;
    rep["result_correct"] = result_correct(c, w);
    rep["result_digest"] = result_digest(c, w);
    rep["errors_detected"] = c.total_errors();
    rep["restarts"] = c.restart_count();
    rep["output_trace_hash"] = c.output_trace_hash();
    json recoveries = json::array();
    for (const auto& t : c.recovery_traces()) recoveries.push_back(trace_json(t));
    rep["recoveries"] = recoveries;
    return rep;
}

json inject_report(const Scenario& s) {
    ClusterConfig cfg = to_cluster_config(s);
    CampaignConfig cc = s.campaign;
    cc.matmul_dim = s.dim;
    CampaignResult res = run_campaign(cfg, s.mode, cc);

    json rep = header(s);
    rep["runs"] = cc.runs;
    rep["golden_cycles"] = res.golden_cycles;
    rep["golden_digest"] = res.golden_digest;
    rep["masked"] = res.masked;
    rep["detected_recovered"] = res.detected_recovered;
    rep["sdc"] = res.sdc;
    rep["hang"] = res.hang;
    rep["report_hash"] = res.report_hash();
    json runs = json::array();
    for (const auto& r : res.runs) {
        json j;
        j["index"] = r.index;
        j["seed"] = r.seed;
        j["cycle"] = r.fault.cycle;
        j["core"] = r.fault.target_core;
        j["outcome"] = to_string(r.outcome);
        j["cycles"] = r.cycles;
        j["errors_detected"] = r.errors_detected;
        j["recoveries"] = r.recoveries;
        j["restarts"] = r.restarts;
        runs.push_back(std::move(j));
    }
    rep["run_records"] = runs;
    return rep;
}

json model_report(const Scenario& s) {
    json rep = header(s);
    const PerfModelParams& p = s.model;
    json modes;
    for (ExecModel m :
         {ExecModel::DclsSw, ExecModel::DclsRapid, ExecModel::TclsSw, ExecModel::TclsRapid}) {
        json j;
        j["gops_fault_free"] = gops(p, m, 0.0);
        j["half_perf_rate"] = half_perf_rate(p, m);
        j["runtime_overhead"] = runtime_overhead(p, m);
        const double hp = half_perf_rate(p, m);
        auto mc = monte_carlo_validate(p, m, hp, s.mc_trials, s.campaign.seed);
        j["mc_analytic"] = mc.analytic;
        j["mc_simulated"] = mc.simulated;
        j["mc_rel_err"] = mc.rel_err;
        modes[to_string(m)] = std::move(j);
    }
    rep["models"] = modes;
    rep["crossover_rate"] = crossover_rate(p);
    return rep;
}

} // namespace hmr
