#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const fs::path kWork = FOREST_TEST_WORKDIR;

std::string species(double tau0) {
    std::ostringstream os;
    os << R"({"mu_A": 0.1, "mu_J": 0.05, "beta": 0.2, "tau0": )" << tau0
       << R"(, "f": {"kind": "rational-decay", "kappa": 1.0, "theta": 1.0, "p": 1.0},)"
       << R"( "history": {"kind": "constant", "value": 1.0}})";
    return os.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
    fs::create_directories(kWork);
    const auto path = kWork / name;
    std::ofstream(path, std::ios::binary) << text;
    return path;
}

fs::path f1_config() {
    return write_config("f1.json", "{\"species\": [" + species(2.0) + "], \"zeta\": [[1.0]]}");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(const std::string& args) {
    fs::create_directories(kWork);
    const auto out = kWork / "stdout.txt";
    const auto err = kWork / "stderr.txt";
    const std::string cmd = std::string("\"") + FOREST_SDDE_CLI + "\" " + args + " > \"" + out.string() +
                            "\" 2> \"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l)) {
        out.push_back(l);
    }
    return out;
}

std::vector<double> fields(const std::string& row) {
    std::vector<double> out;
    std::stringstream ss(row);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(std::stod(cell));
    }
    return out;
}

}  // namespace

TEST_CASE("run reproduces exponential growth without delay", "[cli]") {
    const auto cfg = write_config("degenerate.json",
                                  "{\"species\": [" + species(0.0) + "], \"zeta\": [[1.0]]}");
    const auto csv = kWork / "degenerate.csv";
    const auto r = cli("run --config \"" + cfg.string() + "\" --t-end 10 --h 0.01 --out \"" + csv.string() + "\"");
    REQUIRE(r.code == 0);
    const auto rows = lines(slurp(csv));
    REQUIRE(rows.size() == 1002);
    CHECK(rows[0] == "t,A_1,tau_1,lag_1,conservation_residual_1");
    const auto last = fields(rows.back());
    CHECK_THAT(last[0], WithinAbs(10.0, 1e-12));
    CHECK_THAT(last[1], WithinRel(std::exp(1.0), 1e-8));
    const auto meta = nlohmann::json::parse(slurp(kWork / "degenerate.csv.meta.json"));
    CHECK(meta.at("settings").at("h") == 0.01);
    CHECK(meta.contains("config_hash"));
}

TEST_CASE("run output is byte-identical across invocations", "[cli]") {
    const auto cfg = f1_config();
    const auto a = kWork / "a.csv";
    const auto b = kWork / "b.csv";
    REQUIRE(cli("run --config \"" + cfg.string() + "\" --t-end 30 --h 0.01 --out \"" + a.string() + "\"").code == 0);
    REQUIRE(cli("run --config \"" + cfg.string() + "\" --t-end 30 --h 0.01 --out \"" + b.string() + "\"").code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a).size() > 1000);
}

TEST_CASE("invalid configurations exit with code 1", "[cli]") {
    const auto bad = write_config("bad.json", "{\"species\": [" + species(2.0) + "], \"zeta\": [[0.0]]}");
    const auto r = cli("run --config \"" + bad.string() + "\" --out \"" + (kWork / "x.csv").string() + "\"");
    CHECK(r.code == 1);
    CHECK_THAT(r.err, ContainsSubstring("self-coupling-positive"));

    const auto broken = write_config("broken.json", "{\"species\": [");
    CHECK(cli("run --config \"" + broken.string() + "\" --out \"" + (kWork / "x.csv").string() + "\"").code == 1);
    CHECK(cli("equilibrium --config \"" + (kWork / "missing.json").string() + "\"").code == 1);
    CHECK(cli("run --config \"" + f1_config().string() + "\" --h -1 --out \"" + (kWork / "x.csv").string() + "\"").code == 1);
}

TEST_CASE("numerical breakdown exits with code 2", "[cli]") {
    // h = 20 is ten times the initial delay; an RK4 stage drives tau below zero.
    const auto r = cli("run --config \"" + f1_config().string() + "\" --h 20 --t-end 400 --out \"" +
                       (kWork / "s.csv").string() + "\"");
    CHECK(r.code == 2);
    CHECK_THAT(r.err, ContainsSubstring("numerical failure"));
}

TEST_CASE("verify passes on the reference fixture and fails at a coarse step", "[cli][verify]") {
    const auto cfg = f1_config();
    const auto report = kWork / "report.json";
    const auto ok = cli("verify --config \"" + cfg.string() +
                        "\" --suite degenerate,conservation,lag-monotonicity,certificates --h 0.01 --out \"" +
                        report.string() + "\"");
    CHECK(ok.code == 0);
    CHECK_THAT(ok.out, ContainsSubstring("PASS degenerate.closed-form"));
    const auto j = nlohmann::json::parse(slurp(report));
    CHECK(j.at("passed") == true);
    CHECK(j.at("checks").size() == 6);

    // RK4 with h = 2 misses e^{0.1 t} at t = 10 by about 1e-7 relative.
    const auto bad = cli("verify --config \"" + cfg.string() + "\" --suite degenerate --h 2 --out \"" +
                         report.string() + "\"");
    CHECK(bad.code == 3);
    CHECK_THAT(bad.out, ContainsSubstring("FAIL degenerate.closed-form"));
    CHECK(cli("verify --config \"" + cfg.string() + "\" --suite bogus --out \"" + report.string() + "\"").code == 1);
}

TEST_CASE("sweep tabulates one row per parameter value", "[cli][sweep]") {
    const auto cfg = f1_config();
    const auto out = kWork / "sweep.csv";
    const auto r = cli("sweep --config \"" + cfg.string() +
                       "\" --param species.0.mu_J --range 0.05:0.5:0.05 --t-end 200 --h 0.05 --out \"" +
                       out.string() + "\"");
    REQUIRE(r.code == 0);
    const auto rows = lines(slurp(out));
    REQUIRE(rows.size() == 11);
    CHECK(rows[0] == "value,limsup_1,tstar_1,conclusive");
    double prev = 0.0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const auto f = fields(rows[k]);
        REQUIRE(f.size() == 4);
        CHECK(f[0] > prev);
        prev = f[0];
        CHECK(f[1] > 0.0);
    }
    CHECK(cli("sweep --config \"" + cfg.string() + "\" --param species.0.nope --range 0:1:0.5 --out \"" +
              out.string() + "\"").code == 1);
}

TEST_CASE("equilibrium prints the steady state", "[cli]") {
    const auto r = cli("equilibrium --config \"" + f1_config().string() + "\"");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK_THAT(j[0].at("A_star").get<double>(), WithinAbs(12.862944, 1e-6));
    CHECK_THAT(j[0].at("tau_bar").get<double>(), WithinAbs(13.862944, 1e-6));
}

TEST_CASE("help and usage errors", "[cli]") {
    CHECK(cli("--help").code == 0);
    CHECK(cli("").code != 0);
    CHECK(cli("run").code != 0);
}
