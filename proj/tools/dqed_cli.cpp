// dqed command line: `dqed run <config>` and `dqed check`.
// Exit codes: 0 ok, 2 bad configuration, 3 no convergence, 4 unphysical state.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "dqed/experiments.hpp"
#include "dqed/invariants.hpp"

namespace {

int exit_code_for(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const dqed::ConvergenceError&) {
        return 3;
    } catch (const dqed::PhysicsError&) {
        return 4;
    } catch (const dqed::ConfigError&) {
        return 2;
    } catch (const dqed::NotHermitianError&) {
        return 4;
    } catch (const std::invalid_argument&) {
        return 2;
    } catch (...) {
        return 1;
    }
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw dqed::ConfigError("cannot write '" + path + "'");
    f << text;
}

int run(const std::string& config_path, std::string out, unsigned threads) {
    dqed::RunConfig cfg;
    dqed::RunResult result;
    try {
        std::ifstream in(config_path);
        if (!in) throw dqed::ConfigError("cannot read config '" + config_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        cfg = dqed::parse_config(ss.str());
        if (out.empty()) out = cfg.output_path;
        result = dqed::run_experiment(cfg, threads);
    } catch (...) {
        const auto e = std::current_exception();
        std::cerr << "dqed: " << dqed::describe(e) << '\n';
        return exit_code_for(e);
    }

    if (out.empty()) {
        std::cout << result.table.to_string();
    } else {
        write_file(out, result.table.to_string());
        write_file(out + ".json", result.summary.dump(2) + "\n");
    }
    if (result.failure) {
        std::cerr << "dqed: " << dqed::describe(result.failure) << " (" << result.table.rows.size()
                  << " rows written)\n";
        return exit_code_for(result.failure);
    }
    return 0;
}

int check() {
    int failed = 0;
    for (const auto& c : dqed::run_invariant_checks()) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        failed += c.passed ? 0 : 1;
    }
    return failed == 0 ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two qubits in a leaky cavity: dynamics and entanglement"};
    app.require_subcommand(1);

    std::string config_path, out;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
    run_cmd->add_option("config", config_path, "Config file (key = value)")->required();
    run_cmd->add_option("-o,--out", out, "CSV output path; the summary goes to <out>.json");
    run_cmd->add_option("-j,--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);

    auto* check_cmd = app.add_subcommand("check", "Run the built-in invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run_cmd) return run(config_path, out, threads);
        if (*check_cmd) return check();
    } catch (...) {
        const auto e = std::current_exception();
        std::cerr << "dqed: " << dqed::describe(e) << '\n';
        return exit_code_for(e);
    }
    return 0;
}
