#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "valagg/instances.hpp"
#include "valagg/runner.hpp"
#include "valagg/trace_io.hpp"

using namespace valagg;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& hint) {
    static std::atomic<int> counter{0};
    const auto dir = fs::temp_directory_path() /
                     ("valagg-clitest-" + hint + "-" + std::to_string(::getpid()) + "-" +
                      std::to_string(counter.fetch_add(1)));
    fs::create_directories(dir);
    return dir;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const fs::path dir = fresh_dir("io");
    const fs::path out_file = dir / "stdout.txt";
    const fs::path err_file = dir / "stderr.txt";
    std::string cmd = env_prefix + std::string(VALAGG_CLI_PATH) + " " + args + " > " +
                      out_file.string() + " 2> " + err_file.string();
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_text_file(out_file);
    result.err = read_text_file(err_file);
    fs::remove_all(dir);
    return result;
}

}  // namespace

TEST_CASE("run reproduces the divergent iterate column") {
    const fs::path out = fresh_dir("run4");
    const CliResult r = run_cli("run --instance counterexample --theta 10 --x1 1 --iters 4 --out " +
                                out.string());
    REQUIRE(r.exit_code == 0);
    const TraceTable table = read_trace_csv(out / "trace.csv");
    REQUIRE(table.rows() == 4);
    const double expected[] = {1.0, 10.0, 55.0, 220.0};
    for (std::size_t i = 0; i < 4; ++i) CHECK(table.x[i][0] == expected[i]);
    fs::remove_all(out);
}

TEST_CASE("run with a single round emits one data row") {
    const fs::path out = fresh_dir("run1");
    const CliResult r = run_cli("run --theta 0.5 --iters 1 --out " + out.string());
    REQUIRE(r.exit_code == 0);
    const std::string csv = read_text_file(out / "trace.csv");
    std::size_t lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == 2);  // header + one row
    CHECK(csv.rfind("n,x,f_n_xn,F_xn_xn,S_n,step_norm\n", 0) == 0);
    fs::remove_all(out);
}

TEST_CASE("long contracting run summarizes the expected exponent") {
    const fs::path out = fresh_dir("runfit");
    const CliResult r = run_cli(
        "run --instance counterexample --theta 0.5 --x1 1 --iters 10000 --emit json --out " +
        out.string());
    REQUIRE(r.exit_code == 0);
    CHECK_FALSE(fs::exists(out / "trace.csv"));  // csv not requested
    const SummaryRecord summary = read_summary_json(out / "summary.json");
    REQUIRE(summary.fitted_exponent.has_value());
    CHECK(*summary.fitted_exponent >= -1.05);
    CHECK(*summary.fitted_exponent <= -0.95);
    CHECK(summary.converged);
    CHECK(summary.bounds.at("thm1"));
    CHECK(summary.bounds.at("thm2"));
    CHECK(summary.bounds.at("lemma3"));
    CHECK(summary.bounds.at("prop2"));
    fs::remove_all(out);
}

TEST_CASE("theta sweep recovers the rate law across the grid") {
    const fs::path out = fresh_dir("sweep");
    const CliResult r = run_cli("sweep --thetas 0.3,0.6,0.9 --x1 1 --iters 10000 --emit json --out " +
                                out.string());
    REQUIRE(r.exit_code == 0);
    const std::string jsonl = read_text_file(out / "sweep.jsonl");
    std::istringstream lines(jsonl);
    std::string line;
    const double expected[] = {-1.4, -0.8, -0.2};
    int idx = 0;
    while (std::getline(lines, line)) {
        REQUIRE(idx < 3);
        const SummaryRecord rec = summary_from_json(line);
        REQUIRE(rec.fitted_exponent.has_value());
        CHECK(std::fabs(*rec.fitted_exponent - expected[idx]) <= 0.05);
        ++idx;
    }
    CHECK(idx == 3);
    const std::string csv = read_text_file(out / "sweep.csv");
    CHECK(csv.find("point,theta,final_F") == 0);
    fs::remove_all(out);
}

TEST_CASE("a single-point sweep carries the same summary as a plain run") {
    const fs::path sweep_out = fresh_dir("sweep1");
    const fs::path run_out = fresh_dir("run1p");
    REQUIRE(run_cli("sweep --thetas 0.7 --x1 1 --iters 500 --emit json --out " +
                    sweep_out.string())
                .exit_code == 0);
    REQUIRE(run_cli("run --theta 0.7 --x1 1 --iters 500 --emit json --out " + run_out.string())
                .exit_code == 0);
    SummaryRecord from_sweep = summary_from_json(read_text_file(sweep_out / "sweep.jsonl"));
    SummaryRecord from_run = read_summary_json(run_out / "summary.json");
    from_sweep.wall_time_ms = 0.0;
    from_run.wall_time_ms = 0.0;
    CHECK(from_sweep == from_run);
    fs::remove_all(sweep_out);
    fs::remove_all(run_out);
}

TEST_CASE("lambda sweep stabilizes the divergent instance exactly when lambda > 0.5") {
    const fs::path out = fresh_dir("lsweep");
    const CliResult r = run_cli(
        "sweep --lambdas 0,1,2 --theta 1.5 --transformer weighted --x1 1 --iters 4000 "
        "--emit json --out " +
        out.string());
    REQUIRE(r.exit_code == 0);
    std::istringstream lines(read_text_file(out / "sweep.jsonl"));
    std::string line;
    const bool expected[] = {false, true, true};
    int idx = 0;
    while (std::getline(lines, line)) {
        REQUIRE(idx < 3);
        CHECK(summary_from_json(line).converged == expected[idx]);
        ++idx;
    }
    CHECK(idx == 3);
    fs::remove_all(out);
}

TEST_CASE("sweep validation happens before any run") {
    CHECK(run_cli("sweep --theta 0.5").exit_code == 2);  // no axis
    CHECK(run_cli("sweep --thetas 0.1,0.2 --seeds 1,2,3 --sweep-cap 5").exit_code == 2);
}

TEST_CASE("verify subcommand filters and fails loudly under corruption") {
    const CliResult only = run_cli("verify --only c1");
    CHECK(only.exit_code == 0);
    CHECK(only.out.find("c1-paper-iterates") != std::string::npos);
    CHECK(only.out.find("c2-") == std::string::npos);

    const CliResult corrupted = run_cli("verify --only lemma3 --corrupt-theta 0.5");
    CHECK(corrupted.exit_code == 4);
    CHECK(corrupted.out.find("[FAIL]") != std::string::npos);
    CHECK(corrupted.out.find("lemma3") != std::string::npos);
}

TEST_CASE("plot overlays the empirical curve below the envelope") {
    const fs::path out = fresh_dir("plot");
    REQUIRE(run_cli("run --theta 0.5 --x1 1 --iters 2000 --out " + out.string()).exit_code == 0);
    const CliResult r = run_cli("plot " + (out / "trace.csv").string() + " --kind self_value " +
                                "--out " + (out / "self.svg").string());
    REQUIRE(r.exit_code == 0);
    const std::string svg = read_text_file(out / "self.svg");
    std::size_t polylines = 0;
    for (std::size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos)
        ++polylines;
    CHECK(polylines == 2);
    CHECK(svg.find("<svg xmlns") == 0);
    CHECK(svg.find("counterexample(theta=0.5)") != std::string::npos);

    // the terminal-bound envelope dominates the empirical curve at every n
    const TraceTable table = read_trace_csv(out / "trace.csv");
    const SummaryRecord summary = read_summary_json(out / "summary.json");
    const auto& c = summary.effective_constants;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        const double n = static_cast<double>(table.n[i]);
        const double coeff = c.theta * std::exp(1.0 - c.theta) * c.g2;
        const double envelope =
            c.eps_tilde + coeff * coeff / (2.0 * c.alpha) * std::pow(n, 2.0 * (c.theta - 1.0));
        CHECK(table.self[i] <= envelope);
    }
    fs::remove_all(out);
}

TEST_CASE("s-curve and step-norm plots carry their envelopes") {
    const fs::path out = fresh_dir("plots2");
    REQUIRE(run_cli("run --theta 0.5 --x1 1 --iters 500 --out " + out.string()).exit_code == 0);
    for (const std::string kind : {"s_curve", "step_norm"}) {
        const fs::path svg_path = out / (kind + ".svg");
        REQUIRE(run_cli("plot " + (out / "trace.csv").string() + " --kind " + kind + " --out " +
                        svg_path.string())
                    .exit_code == 0);
        const std::string svg = read_text_file(svg_path);
        std::size_t polylines = 0;
        for (std::size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos)
            ++polylines;
        CHECK(polylines == 2);
        CHECK(svg.find("envelope") != std::string::npos);
    }
    fs::remove_all(out);
}

TEST_CASE("plot rejects empty and malformed traces without writing output") {
    const fs::path dir = fresh_dir("plotbad");
    write_text_file(dir / "empty.csv", "n,x,f_n_xn,F_xn_xn,S_n,step_norm\n");
    const fs::path target = dir / "should_not_exist.svg";
    const CliResult empty = run_cli("plot " + (dir / "empty.csv").string() + " --out " +
                                    target.string());
    CHECK(empty.exit_code == 3);
    CHECK_FALSE(fs::exists(target));

    write_text_file(dir / "bad.csv",
                    "n,x,f_n_xn,F_xn_xn,S_n,step_norm\n1,0,0,0,0,0\n2,zz,0,0,0,0\n");
    const CliResult bad = run_cli("plot " + (dir / "bad.csv").string() + " --out " +
                                  target.string());
    CHECK(bad.exit_code == 3);
    CHECK(bad.err.find("row 3") != std::string::npos);
    CHECK_FALSE(fs::exists(target));
    fs::remove_all(dir);
}

TEST_CASE("plot overlays several traces with a legend") {
    const fs::path a = fresh_dir("plota");
    const fs::path b = fresh_dir("plotb");
    REQUIRE(run_cli("run --theta 0.5 --x1 1 --iters 300 --out " + a.string()).exit_code == 0);
    REQUIRE(run_cli("run --theta 0.9 --x1 1 --iters 300 --out " + b.string()).exit_code == 0);
    const fs::path svg_path = a / "both.svg";
    const CliResult r = run_cli("plot " + (a / "trace.csv").string() + " " +
                                (b / "trace.csv").string() + " --out " + svg_path.string());
    REQUIRE(r.exit_code == 0);
    const std::string svg = read_text_file(svg_path);
    CHECK(svg.find("counterexample(theta=0.5)") != std::string::npos);
    CHECK(svg.find("counterexample(theta=0.9)") != std::string::npos);
    std::size_t polylines = 0;
    for (std::size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos)
        ++polylines;
    CHECK(polylines == 4);  // two empirical + two envelopes
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("trace CSV round-trips losslessly") {
    LoopConfig cfg;
    cfg.iterations = 64;
    cfg.x1 = ParameterPoint(1.0);
    const RunTrace trace = run_deterministic(make_counterexample({0.7, 2.0}), cfg);
    const fs::path dir = fresh_dir("roundtrip");
    write_trace_csv(dir / "t.csv", trace);
    const TraceTable first = read_trace_csv(dir / "t.csv");
    CHECK(first == to_table(trace));  // bit-exact doubles via shortest round-trip decimals

    // serialize the parsed table again: bytes must be identical
    RunTrace copy = trace;
    write_trace_csv(dir / "t2.csv", copy);
    CHECK(read_text_file(dir / "t.csv") == read_text_file(dir / "t2.csv"));
    fs::remove_all(dir);
}

TEST_CASE("summary JSON round-trips exactly") {
    KeyValues kv = {{"theta", "0.9"}, {"iters", "200"}, {"x1", "1"}};
    const RunArtifacts art = execute_run(kv);
    const std::string text = summary_to_json(art.summary);
    const SummaryRecord parsed = summary_from_json(text);
    CHECK(parsed == art.summary);
    CHECK(summary_to_json(parsed) == text);
}

TEST_CASE("seeded stochastic configs rerun byte-identically") {
    const fs::path a = fresh_dir("repro-a");
    const fs::path b = fresh_dir("repro-b");
    const std::string flags =
        "run --theta 0.5 --x1 1 --iters 60 --noise uniform --sigma 1 --m0 10 --seed 7 --out ";
    REQUIRE(run_cli(flags + a.string()).exit_code == 0);
    REQUIRE(run_cli(flags + b.string()).exit_code == 0);
    CHECK(read_text_file(a / "trace.csv") == read_text_file(b / "trace.csv"));
    SummaryRecord sa = read_summary_json(a / "summary.json");
    SummaryRecord sb = read_summary_json(b / "summary.json");
    sa.wall_time_ms = 0.0;
    sb.wall_time_ms = 0.0;
    CHECK(summary_to_json(sa) == summary_to_json(sb));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("exit-code contract") {
    CHECK(run_cli("run --instance nosuch").exit_code == 2);
    CHECK(run_cli("run --iters notanumber").exit_code == 2);
    CHECK(run_cli("run --theta 0.5 --out /proc/definitely/not/writable").exit_code == 3);
    CHECK(run_cli("nosuchcommand").exit_code == 2);
}

TEST_CASE("config files merge with flag overrides, flags winning") {
    const fs::path dir = fresh_dir("config");
    write_text_file(dir / "exp.cfg",
                    "# experiment description\n"
                    "instance = counterexample\n"
                    "theta = 0.5\n"
                    "iters = 4\n"
                    "x1 = 1\n");
    const fs::path out = dir / "out";
    const CliResult r = run_cli("run --config " + (dir / "exp.cfg").string() +
                                " --iters 6 --emit json --out " + out.string());
    REQUIRE(r.exit_code == 0);
    const SummaryRecord summary = read_summary_json(out / "summary.json");
    CHECK(summary.iterations_completed == 6);
    CHECK(summary.config.at("theta") == "0.5");

    write_text_file(dir / "broken.cfg", "theta 0.5\n");
    const CliResult broken = run_cli("run --config " + (dir / "broken.cfg").string());
    CHECK(broken.exit_code == 2);
    CHECK(broken.err.find("line 1") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("VAL_AGG_OUT selects the default output directory") {
    const fs::path dir = fresh_dir("envout");
    const CliResult r =
        run_cli("run --theta 0.5 --iters 3", "VAL_AGG_OUT=" + dir.string() + " ");
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(dir / "trace.csv"));
    fs::remove_all(dir);
}

TEST_CASE("sweep runs points concurrently with identical results") {
    const fs::path serial = fresh_dir("jobs1");
    const fs::path parallel = fresh_dir("jobs4");
    const std::string base = "sweep --thetas 0.3,0.5,0.7,0.9 --x1 1 --iters 400 --emit json ";
    REQUIRE(run_cli(base + "--jobs 1 --out " + serial.string()).exit_code == 0);
    REQUIRE(run_cli(base + "--jobs 4 --out " + parallel.string()).exit_code == 0);
    // deterministic content regardless of the job count (wall times differ)
    std::istringstream sa(read_text_file(serial / "sweep.jsonl"));
    std::istringstream sb(read_text_file(parallel / "sweep.jsonl"));
    std::string la, lb;
    int rows = 0;
    while (std::getline(sa, la) && std::getline(sb, lb)) {
        SummaryRecord ra = summary_from_json(la);
        SummaryRecord rb = summary_from_json(lb);
        ra.wall_time_ms = rb.wall_time_ms = 0.0;
        CHECK(ra == rb);
        ++rows;
    }
    CHECK(rows == 4);
    CHECK(read_text_file(serial / "sweep.csv") == read_text_file(parallel / "sweep.csv"));
    fs::remove_all(serial);
    fs::remove_all(parallel);
}

TEST_CASE("config value parsers reject malformed input by field name") {
    CHECK_THROWS_WITH_AS(static_cast<void>(parse_matrix("1,2;3", "M")), doctest::Contains("M"),
                         ConfigError);
    CHECK_THROWS_AS(static_cast<void>(parse_double_list("", "thetas")), ConfigError);
    CHECK_THROWS_AS(static_cast<void>(parse_double_list("0.1,zz", "thetas")), ConfigError);
    const Matrix m = parse_matrix("0,0.9;0,0", "M");
    CHECK(m.at(0, 1) == 0.9);
    CHECK(m.rows == 2);
}

TEST_CASE("shortest round-trip decimals") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -0.0, 2.5e17}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(81.0) == "81");
}
