// End-to-end checks of the command-line tool: exit codes, report and CSV
// artifacts, config-file override semantics, environment defaults, and
// byte-level determinism of reruns.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hpme/report.hpp"

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / "hpme-cli-tests" / tag;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Runs the tool with the given arguments, capturing stdout/stderr next to
// the artifacts; returns the process exit code.
int run_cli(const std::string& args, const fs::path& outdir,
            const std::string& env_prefix = "") {
    const std::string cmd = env_prefix + std::string(HPME_CLI_PATH) + " " + args +
                            " > " + (outdir / "stdout.txt").string() + " 2> " +
                            (outdir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

hpme::ordered_json read_report(const fs::path& p) {
    return hpme::ordered_json::parse(slurp(p));
}

bool is_hex16(const std::string& s) {
    if (s.size() != 16) return false;
    for (char c : s)
        if (std::string("0123456789abcdef").find(c) == std::string::npos) return false;
    return true;
}

// Splits one CSV document into rows of string cells.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace

TEST_CASE("geom writes profile CSV plus report and reruns byte-identically") {
    const fs::path d1 = fresh_dir("geom-a");
    const std::string args = "geom --model euclidean --dim 3 --rmax 6";
    CHECK(run_cli(args + " --out " + d1.string(), d1) == 0);

    const hpme::ordered_json rep = read_report(d1 / "geom_report.json");
    CHECK(rep.at("command") == "geom");
    CHECK(rep.at("pass") == true);
    CHECK(is_hex16(rep.at("config_hash").get<std::string>()));
    CHECK(rep.at("certifies").is_array());
    CHECK_FALSE(rep.at("certifies").empty());
    CHECK(rep.at("completeness").at("verdict") == "complete");

    const hpme::ordered_json manifest = read_report(d1 / "manifest.json");
    CHECK(manifest.at("seedless_deterministic") == true);

    // r = 3 lands on a grid node; H = r^2/(2N) = 1.5 there.
    const auto rows = parse_csv(slurp(d1 / "geom_profile.csv"));
    REQUIRE(rows.size() > 2);
    REQUIRE(rows[0][0] == "r");
    bool found = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (std::stod(rows[i][0]) == 3.0) {
            found = true;
            CHECK(std::stod(rows[i][4]) == doctest::Approx(1.5).epsilon(1e-10));
        }
    }
    CHECK(found);

    const fs::path d2 = fresh_dir("geom-b");
    CHECK(run_cli(args + " --out " + d2.string(), d2) == 0);
    CHECK(slurp(d1 / "geom_report.json") == slurp(d2 / "geom_report.json"));
    CHECK(slurp(d1 / "geom_profile.csv") == slurp(d2 / "geom_profile.csv"));
}

TEST_CASE("unknown model is a config error naming the catalog") {
    const fs::path d = fresh_dir("geom-bad");
    CHECK(run_cli("geom --model torus --out " + d.string(), d) == 2);
    const std::string err = slurp(d / "stderr.txt");
    CHECK(err.find("euclidean") != std::string::npos);
    CHECK(err.find("superquadratic") != std::string::npos);
    CHECK_FALSE(fs::exists(d / "geom_report.json"));
}

TEST_CASE("barrier window certificate passes and records margins") {
    const fs::path d = fresh_dir("barrier-pass");
    CHECK(run_cli("barrier --model hyperbolic --c 1 --dim 2 --alpha 3.5 --r0 2 --rmax 60"
                  " --out " + d.string(), d) == 0);
    const hpme::ordered_json rep = read_report(d / "barrier_report.json");
    CHECK(rep.at("pass") == true);
    CHECK(rep.at("barrier").at("min_margin").get<double>() ==
          doctest::Approx(0.8706).epsilon(2e-3));
    CHECK(rep.at("barrier").at("C_required").get<double>() ==
          doctest::Approx(54.798989873223334).epsilon(1e-9));
    CHECK(fs::exists(d / "barrier_window.csv"));
}

TEST_CASE("violated backward-barrier constraint fails but is fully reported") {
    const fs::path d = fresh_dir("barrier-broken");
    const int code =
        run_cli("barrier --model hyperbolic --c 1 --dim 2 --alpha 3.5 --r0 2 --rmax 40"
                " --K 0.5 --T 0.3 --C2 2 --out " + d.string(), d);
    CHECK(code == 1);
    const hpme::ordered_json rep = read_report(d / "barrier_report.json");
    CHECK(rep.at("pass") == false);
    CHECK(rep.at("backward").at("constraint_ok") == false);
    CHECK(rep.at("backward").at("constraint_margin").get<double>() ==
          doctest::Approx(-0.6).epsilon(1e-9));
}

TEST_CASE("domain probe diverges and flags data beyond the critical growth") {
    const fs::path d = fresh_dir("uniq-super");
    const int code = run_cli("uniq --model hyperbolic --c 1 --dim 2 --mode domain --p 2"
                             " --out " + d.string(), d);
    CHECK(code == 1);
    const hpme::ordered_json rep = read_report(d / "uniq_report.json");
    CHECK(rep.at("pass") == false);
    CHECK(rep.at("probe").at("converged") == false);
    CHECK(rep.at("probe").at("supercritical_flag") == true);
    const auto ratios = rep.at("probe").at("ratios").get<std::vector<double>>();
    REQUIRE_FALSE(ratios.empty());
    CHECK(ratios.front() > 1.0);
}

TEST_CASE("unknown pme experiment is a config error") {
    const fs::path d = fresh_dir("pme-bad");
    CHECK(run_cli("pme --model euclidean --dim 3 --experiment wiggle --out " + d.string(),
                  d) == 2);
    CHECK(slurp(d / "stderr.txt").find("evolve") != std::string::npos);
}

TEST_CASE("evolve run reports mass balance and snapshot grid") {
    const fs::path d = fresh_dir("pme-evolve");
    CHECK(run_cli("pme --model hyperbolic --c 1 --dim 2 --m 2 --R 10 --t-end 0.2"
                  " --u0-name bump --u0-amp 1 --u0-width 3 --snaps 0.1 0.2 --out " +
                      d.string(), d) == 0);
    const hpme::ordered_json rep = read_report(d / "pme_report.json");
    CHECK(rep.at("pass") == true);
    CHECK(rep.at("evolve").at("completed") == true);
    CHECK(rep.at("evolve").at("max_mass_balance").get<double>() <= 1e-8);
    CHECK(rep.at("evolve").at("snapshots") == 2);

    const auto rows = parse_csv(slurp(d / "pme_snapshots.csv"));
    REQUIRE(rows.size() > 2);
    CHECK(rows[0] == std::vector<std::string>{"t", "r", "u"});
    CHECK(std::stod(rows[1][0]) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(std::stod(rows.back()[0]) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("config file overrides flags and HPME_OUT provides the outdir") {
    const fs::path d = fresh_dir("barrier-config");
    const fs::path cfg = d / "override.json";
    {
        std::ofstream out(cfg);
        out << "{\"alpha\": 4.0}\n";
    }
    const int code = run_cli("barrier --model hyperbolic --c 1 --dim 2 --alpha 3.5"
                             " --r0 2 --rmax 60 --config " + cfg.string(),
                             d, "HPME_OUT=" + d.string() + " ");
    CHECK(code == 0);
    const hpme::ordered_json rep = read_report(d / "barrier_report.json");
    CHECK(rep.at("config").at("alpha").get<double>() == 4.0);
    CHECK(rep.at("barrier").at("alpha").get<double>() == 4.0);
}

TEST_CASE("blow-up fit recovers the separable time from the trajectory") {
    const fs::path d = fresh_dir("blowup");
    CHECK(run_cli("blowup --model hyperbolic --c 1 --dim 2 --out " + d.string(), d) == 0);
    const hpme::ordered_json rep = read_report(d / "blowup_report.json");
    CHECK(rep.at("pass") == true);
    const double T_fit = rep.at("blowup").at("T_fit").get<double>();
    CHECK(T_fit > 0.9);
    CHECK(T_fit < 1.1);
    CHECK(rep.at("blowup").at("tracking_error").get<double>() <= 0.02);
    CHECK(fs::exists(d / "blowup_trajectory.csv"));
}

TEST_CASE("sweep runs jobs concurrently and merges reports in input order") {
    const fs::path d = fresh_dir("sweep");
    const fs::path cfg = d / "jobs.json";
    {
        std::ofstream out(cfg);
        out << R"({"jobs": [
            {"name": "geo", "command": "geom",
             "model": "euclidean", "dim": 3, "rmax": 6},
            {"name": "probe", "command": "uniq",
             "model": "hyperbolic", "c": 1.0, "dim": 2, "mode": "domain",
             "p": 2.0, "levels": [6, 8, 10]}
        ]})";
    }
    const int code = run_cli("sweep --config " + cfg.string() + " --out " + d.string(), d);
    CHECK(code == 1);  // the supercritical probe fails verification
    const hpme::ordered_json rep = read_report(d / "sweep_report.json");
    CHECK(rep.at("pass") == false);
    CHECK(rep.at("worst_exit_code") == 1);
    CHECK(rep.at("jobs").at("geo").at("exit_code") == 0);
    CHECK(rep.at("jobs").at("geo").at("report").at("pass") == true);
    CHECK(rep.at("jobs").at("probe").at("exit_code") == 1);
    CHECK(rep.at("jobs").at("probe").at("report").at("probe").at("supercritical_flag") ==
          true);
    CHECK(fs::exists(d / "jobs/geo/geom_profile.csv"));

    const fs::path d2 = fresh_dir("sweep-missing-config");
    CHECK(run_cli("sweep --out " + d2.string(), d2) == 2);
}
