#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(SHADOWCLI_PATH) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    return nlohmann::json::parse(f);
}

// reproducibility comparisons ignore timing fields
nlohmann::json scrub(nlohmann::json j) {
    j.erase("wall_time_s");
    j.erase("timestamp_utc");
    return j;
}

} // namespace

TEST_CASE("count command") {
    RunResult r = run_cli("count --d 6 --t 3 --spectrum 3,3 --out cli_count.json");
    CHECK(r.exit_code == 0);
    auto j = load_json("cli_count.json");
    CHECK(j["results"]["reduced_variables"] == 2304);
    CHECK(j["results"]["upper_bound"] == 186624);

    // invalid spectrum: multiplicities must sum to d
    CHECK(run_cli("count --d 6 --t 3 --spectrum 3,2").exit_code == 1);
    std::remove("cli_count.json");
}

TEST_CASE("verify-circuit command") {
    RunResult r = run_cli("verify-circuit --trials 25 --seed 5 --out cli_verify.json");
    CHECK(r.exit_code == 0);
    auto j = load_json("cli_verify.json");
    CHECK(j["results"]["pass"] == true);
    CHECK(j["results"]["max_shadow_identity_residual"].get<double>() < 1e-10);
    CHECK(std::abs(j["results"]["max_postselection_probability_error"].get<double>()) < 1e-10);

    CHECK(run_cli("verify-circuit --trials 0").exit_code != 0);
    std::remove("cli_verify.json");
}

TEST_CASE("schur-check command") {
    RunResult r = run_cli("schur-check --d 2 --n 2 --out cli_schur.json");
    CHECK(r.exit_code == 0);
    auto j = load_json("cli_schur.json");
    CHECK(j["results"]["blocks"].size() == 2);
    CHECK(j["results"]["blocks"][0]["dim"] == 3);
    CHECK(j["results"]["blocks"][1]["dim"] == 1);
    CHECK(j["results"]["pass"] == true);
    std::remove("cli_schur.json");

    RunResult r2 = run_cli("schur-check --d 3 --n 2 --out cli_schur2.json");
    CHECK(r2.exit_code == 0);
    auto j2 = load_json("cli_schur2.json");
    CHECK(j2["results"]["blocks"][0]["dim"] == 6);
    CHECK(j2["results"]["blocks"][1]["dim"] == 3);
    std::remove("cli_schur2.json");

    RunResult r3 = run_cli("schur-check --d 2 --t 1 --obs Z --out cli_schur3.json");
    CHECK(r3.exit_code == 0);
    auto j3 = load_json("cli_schur3.json");
    CHECK(j3["results"]["variable_count"] == 8);
    std::remove("cli_schur3.json");
}

TEST_CASE("solve command and reproducibility") {
    RunResult r = run_cli(
        "solve --t 1 --samples 150 --seed 9 --quiet --out cli_solve_a.json --export-comb cli_comb.json");
    CHECK(r.exit_code == 0);
    auto a = load_json("cli_solve_a.json");
    CHECK(a["results"]["status"] == "optimal");
    const double obj = a["results"]["objective"].get<double>();
    CHECK(obj > 0.5);
    CHECK(obj < 0.9);
    CHECK(std::abs(a["results"]["fresh_sample_objective"].get<double>() - obj) < 0.05);

    RunResult r2 = run_cli("solve --t 1 --samples 150 --seed 9 --quiet --out cli_solve_b.json");
    CHECK(r2.exit_code == 0);
    CHECK(scrub(load_json("cli_solve_b.json")) ==
          scrub([&] {
              auto b = load_json("cli_solve_a.json");
              b.erase("artifacts");
              return b;
          }()));

    // exported comb loads and has the right shape
    auto comb = load_json("cli_comb.json");
    CHECK(comb["architecture"] == "sequential");
    CHECK(comb["d"] == 2);
    CHECK(comb["t"] == 1);

    std::remove("cli_solve_a.json");
    std::remove("cli_solve_b.json");
    std::remove("cli_comb.json");
}

TEST_CASE("solve full vs reduced flag") {
    RunResult r = run_cli("solve --t 1 --samples 150 --seed 9 --full --quiet --out cli_full.json");
    CHECK(r.exit_code == 0);
    auto j = load_json("cli_full.json");
    CHECK(j["config"]["reduced"] == false);
    CHECK(j["results"]["status"] == "optimal");
    std::remove("cli_full.json");

    // size cap: d=2 t=4 full would be 1024 -> allowed; d=3 t=3 is 6561 -> refused
    CHECK(run_cli("solve --d 3 --t 3 --obs 1,0,-1 --full --samples 5 --quiet").exit_code == 1);
}

TEST_CASE("table1 command shape") {
    RunResult r = run_cli("table1 --samples 30 --max-iter 4000 --csv cli_table1.csv --quiet "
                          "--out cli_table1.json");
    CHECK(r.exit_code == 0);
    std::ifstream csv("cli_table1.csv");
    REQUIRE(csv.good());
    std::string line;
    std::getline(csv, line);
    CHECK(line == "architecture,t=1,t=2,t=3,seconds_t=1,seconds_t=2,seconds_t=3");
    int rows = 0;
    std::vector<std::string> archs;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        ++rows;
        archs.push_back(line.substr(0, line.find(',')));
        CHECK(std::count(line.begin(), line.end(), ',') == 6);
    }
    CHECK(rows == 2);
    CHECK(archs == std::vector<std::string>{"sequential", "parallel"});
    std::remove("cli_table1.csv");
    std::remove("cli_table1.json");
}

TEST_CASE("invalid arguments exit with code 1") {
    CHECK(run_cli("solve").exit_code == 1);                 // missing --t
    CHECK(run_cli("nonsense").exit_code == 1);              // unknown subcommand
    CHECK(run_cli("solve --t 1 --obs 1,2,3 --quiet --samples 5").exit_code == 1); // bad obs dim
}

TEST_CASE("numerical failure exits with code 2") {
    // starving the solver of iterations leaves it non-optimal
    RunResult r = run_cli("solve --t 1 --samples 100 --max-iter 10 --quiet");
    CHECK(r.exit_code == 2);
}
