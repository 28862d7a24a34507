#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "hmrsim/analytics.hpp"
#include "hmrsim/cluster.hpp"
#include "hmrsim/faults.hpp"
#include "hmrsim/scenario.hpp"
#include "hmrsim/workloads.hpp"

namespace py = pybind11;
using namespace hmr;

namespace {

nlohmann::json json_from_str(const std::string& text) { return nlohmann::json::parse(text); }

std::string report_str(const std::string& config_text) {
    Scenario s = parse_scenario(json_from_str(config_text));
    nlohmann::json rep;
    if (s.kind == "run")
        rep = run_report(s);
    else if (s.kind == "inject")
        rep = inject_report(s);
    else
        rep = model_report(s);
    return rep.dump(2);
}

} // namespace

PYBIND11_MODULE(hmrsim_py, m) {
    m.doc() = "cycle-level simulator of a redundancy-protected RISC-V cluster";

    py::enum_<Mode>(m, "Mode")
        .value("INDEPENDENT", Mode::Independent)
        .value("DMR", Mode::Dmr)
        .value("TMR", Mode::Tmr);

    py::class_<PerfModelParams>(m, "PerfModelParams")
        .def(py::init<>())
        .def_readwrite("freq_hz", &PerfModelParams::freq_hz)
        .def_readwrite("ops", &PerfModelParams::ops)
        .def_readwrite("cycles_independent", &PerfModelParams::cycles_independent)
        .def_readwrite("cycles_dmr", &PerfModelParams::cycles_dmr)
        .def_readwrite("cycles_tmr", &PerfModelParams::cycles_tmr);

    py::enum_<ExecModel>(m, "ExecModel")
        .value("DCLS_SW", ExecModel::DclsSw)
        .value("DCLS_RAPID", ExecModel::DclsRapid)
        .value("TCLS_SW", ExecModel::TclsSw)
        .value("TCLS_RAPID", ExecModel::TclsRapid);

    m.def("matmul_model", &matmul_model);
    m.def("cfft_model", &cfft_model);
    m.def("gops", &gops, py::arg("params"), py::arg("model"), py::arg("fault_rate"));
    m.def("half_perf_rate", &half_perf_rate);
    m.def("crossover_rate", &crossover_rate);

    m.def(
        "run_matmul",
        [](const std::string& mode, bool rapid, int dim, uint64_t max_cycles) {
            ClusterConfig cfg;
            cfg.options.rapid_recovery_enabled = rapid;
            Cluster c(cfg);
            c.set_mode_all(parse_mode(mode));
            Workload w = matmul_workload(cfg, dim);
            install(c, w);
            auto r = c.run(max_cycles);
            py::dict d;
            d["cycles"] = r.cycles;
            d["completed"] = r.completed;
            d["correct"] = result_correct(c, w);
            d["errors_detected"] = c.total_errors();
            return d;
        },
        py::arg("mode"), py::arg("rapid") = true, py::arg("dim") = 12,
        py::arg("max_cycles") = 5'000'000);

    m.def(
        "run_campaign",
        [](const std::string& mode, bool rapid, int runs, uint64_t seed) {
            ClusterConfig cfg;
            cfg.options.rapid_recovery_enabled = rapid;
            CampaignConfig cc;
            cc.runs = runs;
            cc.seed = seed;
            auto res = run_campaign(cfg, parse_mode(mode), cc);
            py::dict d;
            d["masked"] = res.masked;
            d["detected_recovered"] = res.detected_recovered;
            d["sdc"] = res.sdc;
            d["hang"] = res.hang;
            d["report_hash"] = res.report_hash();
            return d;
        },
        py::arg("mode"), py::arg("rapid") = true, py::arg("runs") = 100, py::arg("seed") = 1);

    // full front end: a scenario document in, a JSON report out
    m.def("report", &report_str, py::arg("config_json"));
}
