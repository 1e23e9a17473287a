#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dqed/experiments.hpp"
#include "dqed/invariants.hpp"
#include "test_support.hpp"

using namespace dqed;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / "dqed_test_experiments";
    std::filesystem::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DQED_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path write_config(const std::string& name, const std::string& text) {
    const auto p = scratch_dir() / name;
    std::ofstream(p) << text;
    return p;
}

} // namespace

TEST(CsvTable, FormatsNineSignificantDigits) {
    CsvTable t;
    t.comments = {"a = 1"};
    t.columns = {"x", "y"};
    t.add_row({1.0 / 3.0, 12345678912.0});
    EXPECT_EQ(t.to_string(), "# a = 1\nx,y\n0.333333333,1.23456789e+10\n");
}

TEST(ParallelMap, KeepsIndexOrderAndCapturesErrors) {
    std::vector<std::exception_ptr> errors;
    const auto out = parallel_map<int>(
        20, 4,
        [](std::size_t i) {
            if (i == 7) throw ConvergenceError("seven");
            return static_cast<int>(i * i);
        },
        errors);
    for (std::size_t i = 0; i < 20; ++i)
        if (i != 7) EXPECT_EQ(out[i], static_cast<int>(i * i));
    EXPECT_EQ(first_failure(errors), std::optional<std::size_t>(7));
}

TEST(Experiments, SpectrumLevels) {
    const auto cfg = parse_config("experiment = spectrum\ng = 0\nd = 3\n");
    const auto r = run_experiment(cfg);
    ASSERT_EQ(r.table.rows.size(), 12u);
    EXPECT_NEAR(r.table.column("energy").front(), -1.0, 1e-9);
}

TEST(Experiments, Fig1bShortSweep) {
    const auto cfg = parse_config("experiment = fig1b\nsweep_start = 0\nsweep_stop = 0.5\nsweep_step = 0.25\n");
    const auto r = run_experiment(cfg, 2);
    ASSERT_FALSE(r.failure);
    ASSERT_EQ(r.table.rows.size(), 3u);
    const auto mono = r.table.column("eof_monogamy");
    const auto lb = r.table.column("eof_lower_bound");
    EXPECT_LE(mono[0], 1e-6);
    EXPECT_LE(lb[0], 1e-6);
    for (std::size_t i = 0; i < mono.size(); ++i) EXPECT_LE(lb[i], mono[i] + 1e-9);
    EXPECT_EQ(r.table.column("fock_d_used")[2], 8.0);
    bool has_dstar = false;
    for (const auto& c : r.table.comments) has_dstar |= c.rfind("d_star[", 0) == 0;
    EXPECT_TRUE(has_dstar);
}

TEST(Experiments, Fig1aFirstRowIsSeparable) {
    const auto cfg = parse_config("experiment = fig1a\ng_list = 0.5\nt_end = 5\n");
    const auto r = run_experiment(cfg);
    ASSERT_FALSE(r.failure);
    EXPECT_EQ(r.table.columns, (std::vector<std::string>{"omega_t", "g_over_omega", "eof_lower_bound_AF"}));
    EXPECT_EQ(r.table.column("eof_lower_bound_AF").front(), 0.0);
    EXPECT_EQ(r.table.rows.size(), 11u);
}

TEST(Experiments, SteadyRwaGroundIsTrivial) {
    const auto cfg = parse_config("experiment = steady\ninitial_state = gg0\nd = 3\n");
    const auto r = run_experiment(cfg);
    ASSERT_FALSE(r.failure);
    for (const auto& row : r.table.rows)
        for (std::size_t k = 1; k < row.size(); ++k)
            if (!row[k].empty() && r.table.columns[k] != "lambda" && r.table.columns[k] != "cond_entropy")
                EXPECT_NEAR(std::stod(row[k]), 0.0, 1e-6) << row[0] << " " << r.table.columns[k];
    EXPECT_NEAR(r.summary["ansatz"]["trace_distance"].get<double>(), 0.0, 1e-6);
}

TEST(Experiments, SteadyNonConvergenceIsReported) {
    const auto cfg = parse_config("experiment = steady\nt_max = 1\n");
    const auto r = run_experiment(cfg);
    ASSERT_TRUE(r.failure);
    EXPECT_THROW(std::rethrow_exception(r.failure), ConvergenceError);
    EXPECT_EQ(r.summary["converged"], false);
}

TEST(Experiments, SweepFailureKeepsEarlierRows) {
    auto cfg = parse_config("experiment = fig1b\nsweep_start = 0\nsweep_stop = 1\nsweep_step = 0.5\ntol.fock_max_d = 10\n");
    const auto r = run_experiment(cfg, 3);
    ASSERT_TRUE(r.failure);
    EXPECT_EQ(r.table.rows.size(), 2u);
    EXPECT_EQ(r.summary["rows_completed"], 2);
}

TEST(Invariants, BuiltInChecksPass) {
    for (const auto& c : run_invariant_checks()) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST(Cli, DeterministicOutputAcrossThreadCounts) {
    const auto cfg = write_config("det.conf", "experiment = fig1b\nsweep_start = 0\nsweep_stop = 0.6\nsweep_step = 0.1\n");
    const auto a = scratch_dir() / "a.csv", b = scratch_dir() / "b.csv";
    ASSERT_EQ(run_cli("run " + cfg.string() + " --out " + a.string() + " --threads 1"), 0);
    ASSERT_EQ(run_cli("run " + cfg.string() + " --out " + b.string() + " --threads 4"), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_FALSE(slurp(a.string() + ".json").empty());
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_cli("check"), 0);
    EXPECT_EQ(run_cli("run " + write_config("bad.conf", "experiment = steady\nwhat = 1\n").string()), 2);
    EXPECT_EQ(run_cli("run " + (scratch_dir() / "missing.conf").string()), 2);
    EXPECT_EQ(run_cli("run " + write_config("nc.conf", "experiment = steady\nt_max = 1\n").string() + " --out " +
                      (scratch_dir() / "nc.csv").string()),
              3);
    EXPECT_EQ(run_cli("run " + write_config("pos.conf", "experiment = evolve\ng = 0.5\nkappa = 5\nd = 4\n"
                                                        "initial_state = gg3\ndt = 0.9\nt_end = 10\n")
                                   .string() +
                      " --out " + (scratch_dir() / "pos.csv").string()),
              4);
    EXPECT_EQ(run_cli("frobnicate"), 2);
}
