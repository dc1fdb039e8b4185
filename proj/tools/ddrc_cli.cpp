/*
 Copyright 2026 The ddrc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Command-line front end: demo-paper, fig1-sweep, synth and verify.
//
// Exit codes: 0 feasible with a passing audit, 1 infeasible (or a failed
// audit in verify), 2 inconclusive or error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ddrc.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::string out = ".";
    std::optional<double> gamma;
    std::optional<double> wbar;
    bool quiet = false;
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    f << content;
    if (!f) {
        throw std::runtime_error("write failed for '" + path.string() + "'");
    }
}

ddrc::ExperimentConfig make_config(const CommonFlags& fl) {
    ddrc::ExperimentConfig cfg = fl.config.empty() ? ddrc::ExperimentConfig{} : ddrc::load_config(fl.config);
    if (fl.seed) cfg.seed = *fl.seed;
    if (fl.trials) cfg.trials = *fl.trials;
    if (fl.gamma) cfg.gamma = *fl.gamma;
    if (fl.wbar) cfg.wbar = *fl.wbar;
    cfg.solver = ddrc::solver_options_from_env(cfg.solver);
    cfg.validate();
    return cfg;
}

int emit(const ddrc::RunReport& rep, const CommonFlags& fl) {
    const fs::path dir(fl.out);
    fs::create_directories(dir);
    write_file(dir / "report.txt", rep.text);
    write_file(dir / "result.json", rep.result.dump(2) + "\n");
    if (!fl.quiet) std::cout << rep.text;
    return static_cast<int>(rep.verdict);
}

int run_sweep(const CommonFlags& fl) {
    ddrc::ExperimentConfig cfg = make_config(fl);
    if (!fl.trials && fl.config.empty()) cfg.trials = 100;
    std::mutex mu;
    ddrc::SweepOptions so;
    if (!fl.quiet) {
        so.progress = [&](std::size_t done, std::size_t total) {
            if (done % 50 == 0 || done == total) {
                const std::lock_guard<std::mutex> lock(mu);
                std::cerr << "\rsweep: " << done << "/" << total << std::flush;
                if (done == total) std::cerr << "\n";
            }
        };
    }
    const ddrc::SweepResult res = ddrc::run_sweep(cfg, so);
    const fs::path dir(fl.out);
    fs::create_directories(dir);
    write_file(dir / "sweep.csv", ddrc::sweep_csv(res));
    write_file(dir / "sweep.svg", ddrc::sweep_svg(res));
    nlohmann::json result = ddrc::to_json(res);
    result["seed"] = cfg.seed;
    result["trials"] = cfg.trials;
    result["wbar_per_sample"] = cfg.sweep.wbar_per_sample;
    write_file(dir / "result.json", result.dump(2) + "\n");
    std::ostringstream report;
    report << "ddrc fig1-sweep: gamma=" << ddrc::fmt(res.gamma) << ", trials=" << cfg.trials
           << ", base seed=" << cfg.seed << "\nN  successes  infeasible  inconclusive\n";
    for (const ddrc::SweepRow& r : res.rows) {
        report << r.N << "  " << r.successes << "/" << r.trials << "  " << r.infeasible << "  " << r.inconclusive
               << "\n";
    }
    report << "runtime: " << ddrc::fmt(res.seconds, 4) << " s\n";
    write_file(dir / "report.txt", report.str());
    if (!fl.quiet) std::cout << report.str();
    return 0;
}

void add_common(CLI::App* sub, CommonFlags& fl) {
    sub->add_option("--config", fl.config, "JSON experiment config");
    sub->add_option("--seed", fl.seed, "base random seed");
    sub->add_option("--trials", fl.trials, "trials per data length (sweep)");
    sub->add_option("--out", fl.out, "output directory")->capture_default_str();
    sub->add_option("--gamma", fl.gamma, "H-infinity level");
    sub->add_option("--wbar", fl.wbar, "noise bound");
    sub->add_flag("--quiet", fl.quiet, "suppress console output");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ddrc: robust controller synthesis from noisy data"};
    app.require_subcommand(1);
    CommonFlags fl;
    CLI::App* demo = app.add_subcommand("demo-paper", "demonstration plant with N=20 and w_bar=0.02");
    CLI::App* sweep = app.add_subcommand("fig1-sweep", "success count versus data length");
    CLI::App* synth = app.add_subcommand("synth", "config-driven synthesis");
    CLI::App* verify = app.add_subcommand("verify", "audit a given gain against the data");
    for (CLI::App* sub : {demo, sweep, synth, verify}) add_common(sub, fl);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        if (*demo) return emit(ddrc::run_demo(make_config(fl)), fl);
        if (*sweep) return run_sweep(fl);
        if (*synth) return emit(ddrc::run_synth(make_config(fl)), fl);
        if (*verify) return emit(ddrc::run_verify(make_config(fl)), fl);
    } catch (const ddrc::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
