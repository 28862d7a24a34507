#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hmrsim/scenario.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    bool csv = false;
    bool validate = false;
    bool calibrated = false;
    bool functional = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "scenario file (JSON)")->required();
    cmd->add_option("--out", o.out_dir, "output directory (default: stdout)");
    cmd->add_option("--seed", o.seed, "override the scenario seed")
        ->each([&o](const std::string&) { o.seed_set = true; });
    cmd->add_flag("--csv", o.csv, "also emit CSV curves (model command)");
    cmd->add_flag("--validate", o.validate, "validate the scenario file and exit");
    auto* cal = cmd->add_flag("--calibrated", o.calibrated, "use calibrated phase latencies");
    cmd->add_flag("--functional", o.functional, "use functional phase latencies")
        ->excludes(cal);
}

hmr::Scenario load(const CommonOpts& o, const std::string& kind) {
    hmr::Scenario s = hmr::load_scenario(o.config_path);
    if (s.kind != kind)
        throw std::runtime_error("scenario kind '" + s.kind + "' does not match command '" +
                                 kind + "'");
    if (o.seed_set) s.campaign.seed = o.seed;
    if (o.calibrated) s.calibrated = true;
    if (o.functional) s.calibrated = false;
    return s;
}

std::string runs_csv(const nlohmann::json& report) {
    std::ostringstream os;
    os << "index,seed,cycle,core,outcome,cycles,errors_detected,recoveries,restarts\n";
    for (const auto& r : report.at("run_records"))
        os << r.at("index").get<int>() << ',' << r.at("seed").get<uint64_t>() << ','
           << r.at("cycle").get<uint64_t>() << ',' << r.at("core").get<int>() << ','
           << r.at("outcome").get<std::string>() << ',' << r.at("cycles").get<uint64_t>() << ','
           << r.at("errors_detected").get<uint64_t>() << ',' << r.at("recoveries").get<uint64_t>()
           << ',' << r.at("restarts").get<int>() << '\n';
    return os.str();
}

void emit(const CommonOpts& o, const hmr::Scenario& s, const nlohmann::json& report,
          const std::string& csv_name, const std::string& csv_payload) {
    if (o.out_dir.empty()) {
        std::cout << report.dump(2) << "\n";
        if (!csv_payload.empty()) std::cout << csv_payload;
        return;
    }
    // one directory per configuration, named by the config digest
    const auto dir = std::filesystem::path(o.out_dir) / std::to_string(s.digest);
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "report.json") << report.dump(2) << "\n";
    if (!csv_payload.empty()) std::ofstream(dir / csv_name) << csv_payload;
    std::cout << "wrote " << (dir / "report.json").string() << "\n";
}

int dispatch(const CommonOpts& o, const std::string& kind) {
    hmr::Scenario s = load(o, kind);
    if (o.validate && kind != "model") {
        std::cout << "ok: " << o.config_path << " (digest " << s.digest << ")\n";
        return 0;
    }
    nlohmann::json report;
    std::string csv_name, csv;
    if (kind == "run") {
        report = hmr::run_report(s);
    } else if (kind == "inject") {
        report = hmr::inject_report(s);
        if (o.csv) {
            csv_name = "runs.csv";
            csv = runs_csv(report);
        }
    } else {
        report = hmr::model_report(s);
        if (o.validate) {
            // Monte Carlo cross-check of the closed-form curves
            bool ok = true;
            for (const auto& [name, j] : report.at("models").items()) {
                const double err = j.at("mc_rel_err").get<double>();
                ok = ok && err < 0.05;
                std::cout << name << " mc_rel_err " << err << "\n";
            }
            return ok ? 0 : 1;
        }
        if (o.csv) {
            csv_name = "curves.csv";
            csv = hmr::curves_csv(hmr::degradation_curves(s.model, s.rate_min, s.rate_max,
                                                          s.points));
        }
    }
    emit(o, s, report, csv_name, csv);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cycle-level simulator of a redundancy-protected RISC-V cluster"};
    app.require_subcommand(1);

    CommonOpts run_o, inject_o, model_o;
    auto* run = app.add_subcommand("run", "execute a workload scenario");
    add_common(run, run_o);
    auto* inject = app.add_subcommand("inject", "run a fault-injection campaign");
    add_common(inject, inject_o);
    auto* model = app.add_subcommand("model", "evaluate the performance-degradation model");
    add_common(model, model_o);

    CLI11_PARSE(app, argc, argv);
    try {
        if (run->parsed()) return dispatch(run_o, "run");
        if (inject->parsed()) return dispatch(inject_o, "inject");
        return dispatch(model_o, "model");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
