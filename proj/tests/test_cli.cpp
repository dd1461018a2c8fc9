// End-to-end checks of the command-line runner: exit codes, report files,
// field-level config diagnostics, and byte-identical reruns modulo the
// wall-time field.  The binary path and shipped-config directory are
// injected by the build.
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifdef _WIN32
#error "the CLI test harness assumes POSIX wait semantics"
#endif
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code = -1;
    std::string stderr_text;
};

/// Run the CLI with the given arguments, capturing stderr and the exit code.
RunResult run_cli(const std::string& args, const fs::path& workdir) {
    const fs::path errfile = workdir / "stderr.txt";
    const std::string cmd = std::string(GFBM_CLI_PATH) + " " + args +
                            " > /dev/null 2> '" + errfile.string() + "'";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(errfile);
    std::stringstream ss;
    ss << in.rdbuf();
    r.stderr_text = ss.str();
    return r;
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("gfbm_cli_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

nlohmann::json load_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

std::string write_config(const fs::path& dir, const std::string& body) {
    const fs::path p = dir / "test.cfg";
    std::ofstream(p) << body;
    return p.string();
}

} // namespace

TEST_CASE("cli: operator selftest passes and writes a report", "[cli]") {
    const fs::path out = fresh_dir("selftest");
    const RunResult r = run_cli("fraccalc-selftest --out '" + out.string() + "'", out);
    CHECK(r.exit_code == 0);
    const nlohmann::json rep = load_json(out / "fraccalc-selftest_report.json");
    CHECK(rep.at("pass") == true);
    CHECK(rep.at("subcommand") == "fraccalc-selftest");
    CHECK(rep.at("checks").size() >= 8);
    CHECK(rep.contains("wall_time_seconds"));
    CHECK(fs::exists(out / "fraccalc_weyl_identity.csv"));
}

TEST_CASE("cli: classical profile passes the normality check", "[cli]") {
    const fs::path out = fresh_dir("brownian");
    const std::string cfg = std::string(GFBM_CONFIG_DIR) + "/brownian.cfg";
    REQUIRE(fs::exists(cfg));
    const RunResult r =
        run_cli("simulate --config '" + cfg + "' --out '" + out.string() + "'", out);
    CHECK(r.exit_code == 0);
    const nlohmann::json rep = load_json(out / "simulate_report.json");
    bool saw_normality = false;
    for (const auto& c : rep.at("checks"))
        if (c.at("name") == "increments-normality") {
            saw_normality = true;
            CHECK(c.at("pass") == true);
            CHECK(c.at("estimate").get<double>() > 0.01);  // Jarque-Bera p-value
        }
    CHECK(saw_normality);
    CHECK(fs::exists(out / "simulate_paths.csv"));
}

TEST_CASE("cli: a non-positive-semidefinite vertex fails by name", "[cli]") {
    const fs::path out = fresh_dir("badpsd");
    const std::string cfg = write_config(
        out, "dim = 2\nvertex = 1.0 2.0 2.0 1.0\npolicy = const:0\n");
    const RunResult r =
        run_cli("covariance --config '" + cfg + "' --out '" + out.string() + "'", out);
    CHECK(r.exit_code == 2);
    CHECK(r.stderr_text.find("vertex 0") != std::string::npos);
    CHECK(r.stderr_text.find("positive semidefinite") != std::string::npos);
}

TEST_CASE("cli: config diagnostics name the line and field", "[cli]") {
    const fs::path out = fresh_dir("badfield");
    const std::string cfg = write_config(out, "vertex = 1.0\nreplicates = 1\n");
    const RunResult r =
        run_cli("simulate --config '" + cfg + "' --out '" + out.string() + "'", out);
    CHECK(r.exit_code == 2);
    CHECK(r.stderr_text.find("line 2") != std::string::npos);
    CHECK(r.stderr_text.find("replicates") != std::string::npos);

    const RunResult missing = run_cli("simulate --config /nonexistent.cfg", out);
    CHECK(missing.exit_code == 2);
    CHECK(missing.stderr_text.find("cannot open") != std::string::npos);
}

TEST_CASE("cli: usage errors exit non-zero", "[cli]") {
    const fs::path out = fresh_dir("usage");
    CHECK(run_cli("", out).exit_code != 0);            // missing subcommand
    CHECK(run_cli("not-a-command", out).exit_code != 0);
}

TEST_CASE("cli: reruns are byte-identical modulo wall time", "[cli]") {
    const fs::path out = fresh_dir("determinism");
    const RunResult r1 =
        run_cli("increments --out '" + out.string() + "'", out);
    REQUIRE(r1.exit_code == 0);
    nlohmann::json a = load_json(out / "increments_report.json");
    const RunResult r2 =
        run_cli("increments --out '" + out.string() + "'", out);
    REQUIRE(r2.exit_code == 0);
    nlohmann::json b = load_json(out / "increments_report.json");
    a.erase("wall_time_seconds");
    b.erase("wall_time_seconds");
    CHECK(a.dump() == b.dump());

    // An explicit seed override changes the estimates and is recorded.
    const RunResult r3 = run_cli(
        "increments --seed 99 --out '" + out.string() + "'", out);
    REQUIRE(r3.exit_code == 0);
    nlohmann::json c = load_json(out / "increments_report.json");
    CHECK(c.at("config").at("seed") == 99);
    CHECK(c.at("checks")[0].at("estimate") != a.at("checks")[0].at("estimate"));
}
