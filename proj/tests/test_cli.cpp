#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "padp/cli.hpp"

using namespace padp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("padp_cli_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// small instance so in-process CLI runs stay fast
const char* kTinyConfig =
    "name = tiny\n"
    "m = 3\n"
    "max_order = 8\n"
    "x_cap = 8\n"
    "alpha = 0.9\n"
    "cost.fixed = 5\n"
    "cost.holding = 1\n"
    "cost.shortage = 10\n"
    "cost.wastage = 4\n"
    "demand.kind = nbinom\n"
    "demand.n = 2.0,3.0\n"
    "demand.delta = 1.5,2.5\n"
    "demand.truncation = 8\n"
    "shelf.intercepts = 1.0,0.5\n"
    "shelf.slopes = 0.1,0.2\n"
    "eval.replications = 8\n"
    "eval.horizon = 30\n"
    "bound.replications = 40\n"
    "adp.replications = 2\n"
    "adp.horizon = 20\n"
    "adp.iterations = 2\n"
    "adp.n_mc = 50\n"
    "seed = 3\n"
    "workers = 2\n";

int run_cli(std::vector<std::string> args) { return cli::run(std::move(args)); }

std::string first_line(const fs::path& p) { return read_lines(p).at(0); }

}  // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli({"exact", "--preset", "definitely-not-real", "--out", "/tmp/padp_nope"}) == 2);
    CHECK(run_cli({"exact"}) == 2);  // neither preset nor config
    TempDir dir("badcfg");
    write_text_file(dir.path / "bad.cfg", "preset = m3-exo-f10-th5\nwhat = 1\n");
    CHECK(run_cli({"exact", "--config", (dir.path / "bad.cfg").string(),
                   "--out", (dir.path / "out").string()}) == 2);
}

TEST_CASE("exact command writes tables, witnesses and a manifest") {
    TempDir dir("exact");
    write_text_file(dir.path / "tiny.cfg", kTinyConfig);
    const auto out = dir.path / "out";
    CHECK(run_cli({"exact", "--config", (dir.path / "tiny.cfg").string(), "--out",
                   out.string()}) == 0);
    CHECK(fs::exists(out / "table.csv"));
    CHECK(fs::exists(out / "sensitivity_violations.csv"));
    CHECK(fs::exists(out / "nonconvexity_witnesses.csv"));
    CHECK(fs::exists(out / "summary.csv"));
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out / "run.log"));
    CHECK(first_line(out / "summary.csv") == cli::kExactSummaryHeader);
    CHECK(first_line(out / "sensitivity_violations.csv") == cli::kViolationHeader);
    CHECK(first_line(out / "nonconvexity_witnesses.csv") == cli::kWitnessHeader);
}

TEST_CASE("adp command emits per-iteration diagnostics and the approximation") {
    TempDir dir("adp");
    write_text_file(dir.path / "tiny.cfg", kTinyConfig);
    const auto out = dir.path / "out";
    CHECK(run_cli({"adp", "--config", (dir.path / "tiny.cfg").string(), "--out", out.string()}) ==
          0);
    CHECK(first_line(out / "iterations.csv") == cli::kAdpIterationsHeader);
    CHECK(first_line(out / "summary.csv") == cli::kAdpSummaryHeader);
    const auto approx = approx_from_json(read_json_file(out / "approx.json"));
    CHECK(approx.spec.m == 3);
    CHECK(approx.period == 2);
    // ... and the serialized approximation is loadable as an evaluate policy
    const auto eval_out = dir.path / "eval";
    CHECK(run_cli({"evaluate", "--config", (dir.path / "tiny.cfg").string(), "--policy",
                   "approx:" + (out / "approx.json").string(), "--out", eval_out.string()}) == 0);
    CHECK(first_line(eval_out / "report.csv") == cli::kReportHeader);
}

TEST_CASE("bound and myopic commands produce gap summaries for small instances") {
    TempDir dir("bm");
    write_text_file(dir.path / "tiny.cfg", kTinyConfig);
    CHECK(run_cli({"bound", "--config", (dir.path / "tiny.cfg").string(), "--out",
                   (dir.path / "b").string()}) == 0);
    CHECK(first_line(dir.path / "b" / "summary.csv") == cli::kBoundSummaryHeader);
    const auto row = read_lines(dir.path / "b" / "summary.csv").at(1);
    CHECK(row.find("tiny,") == 0);

    CHECK(run_cli({"myopic", "--config", (dir.path / "tiny.cfg").string(), "--out",
                   (dir.path / "m").string()}) == 0);
    CHECK(first_line(dir.path / "m" / "summary.csv") == cli::kMyopicSummaryHeader);
}

TEST_CASE("impact command ranks assumption-lite policies against the optimum") {
    TempDir dir("impact");
    write_text_file(dir.path / "tiny.cfg", kTinyConfig);
    const auto out = dir.path / "out";
    CHECK(run_cli({"impact", "--config", (dir.path / "tiny.cfg").string(), "--out",
                   out.string()}) == 0);
    const auto lines = read_lines(out / "impact.csv");
    CHECK(lines.at(0) == cli::kImpactHeader);
    REQUIRE(lines.size() == 6);  // optimal, myopic, deterministic, two refits
    // optimal has gap 0; every other exact gap is nonnegative
    CHECK(lines[1].find("exact-optimal") != std::string::npos);
    for (std::size_t i = 2; i < lines.size(); ++i) {
        const auto cells = split(lines[i], ',');
        CHECK(parse_double(cells[4]) >= -1e-9);
    }
}

TEST_CASE("make-trace and trace evaluation round-trip") {
    TempDir dir("trace");
    write_text_file(dir.path / "tiny.cfg", kTinyConfig);
    const auto out = dir.path / "out";
    CHECK(run_cli({"make-trace", "--config", (dir.path / "tiny.cfg").string(), "--days", "28",
                   "--out", out.string()}) == 0);
    const auto trace = read_demand_trace(out / "trace.csv");
    CHECK(trace.demand.size() == 28);
    CHECK(run_cli({"evaluate", "--config", (dir.path / "tiny.cfg").string(), "--policy",
                   "myopic", "--trace", (out / "trace.csv").string(), "--out",
                   (dir.path / "ev").string()}) == 0);
    CHECK(fs::exists(dir.path / "ev" / "report.json"));
}

TEST_CASE("rerunning from a manifest reproduces outputs bit for bit") {
    TempDir dir("manifest");
    write_text_file(dir.path / "tiny.cfg", kTinyConfig);
    const auto out1 = dir.path / "a";
    const auto out2 = dir.path / "b";
    REQUIRE(run_cli({"evaluate", "--config", (dir.path / "tiny.cfg").string(), "--policy",
                     "exact", "--out", out1.string()}) == 0);
    REQUIRE(run_cli({"evaluate", "--config", (out1 / "manifest.json").string(), "--policy",
                     "exact", "--out", out2.string()}) == 0);
    CHECK(read_text_file(out1 / "report.csv") == read_text_file(out2 / "report.csv"));
    CHECK(read_text_file(out1 / "report.json") == read_text_file(out2 / "report.json"));
    CHECK(read_text_file(out1 / "manifest.json") == read_text_file(out2 / "manifest.json"));
}

TEST_CASE("smoke-scale preset runs stay fast") {
    TempDir dir("smoke");
    const auto t0 = std::chrono::steady_clock::now();
    CHECK(run_cli({"adp", "--preset", "m3-neg1-f10-th5", "--scale", "smoke", "--iters", "2",
                   "--reps", "3", "--seed", "5", "--workers", "2", "--out",
                   (dir.path / "adp").string()}) == 0);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 60.0);
    CHECK(fs::exists(dir.path / "adp" / "approx.json"));

    // eight-day shelf-life instances train and evaluate through the same path
    CHECK(run_cli({"adp", "--preset", "m8-endo-f100-th20", "--scale", "smoke", "--seed", "5",
                   "--workers", "2", "--out", (dir.path / "m8").string()}) == 0);
    const auto summary = read_lines(dir.path / "m8" / "summary.csv");
    CHECK(summary.at(0) == cli::kAdpSummaryHeader);
    CHECK(summary.at(1).find("m8-endo-f100-th20") == 0);
}

TEST_CASE("bound command fails cleanly when the state space is too large") {
    TempDir dir("bigbound");
    const auto out = dir.path / "out";
    CHECK(run_cli({"bound", "--preset", "m5-endo-f10-th5", "--scale", "smoke", "--out",
                   out.string()}) == 1);
    CHECK(fs::exists(out / "FAILED"));
}

TEST_CASE("environment variables mirror the flags") {
    TempDir dir("env");
    write_text_file(dir.path / "tiny.cfg", kTinyConfig);
    const auto out = dir.path / "out";
    setenv("PADP_SEED", "4242", 1);
    CHECK(run_cli({"make-trace", "--config", (dir.path / "tiny.cfg").string(), "--days", "7",
                   "--out", out.string()}) == 0);
    unsetenv("PADP_SEED");
    const auto manifest = read_json_file(out / "manifest.json");
    CHECK(manifest.at("seed").get<std::uint64_t>() == 4242);
}

TEST_CASE("solver failure leaves a FAILED marker and exit code 1") {
    TempDir dir("fail");
    std::string cfg = kTinyConfig;
    cfg += "solver.max_iters = 1\nsolver.tol = 1e-14\n";
    write_text_file(dir.path / "tiny.cfg", cfg);
    const auto out = dir.path / "out";
    CHECK(run_cli({"exact", "--config", (dir.path / "tiny.cfg").string(), "--out",
                   out.string()}) == 1);
    CHECK(fs::exists(out / "FAILED"));
    CHECK(fs::exists(out / "run.log"));
}
