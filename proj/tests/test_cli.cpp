#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    fs::path p = fs::temp_directory_path() / "hloop_cli_test";
    fs::create_directories(p);
    return p;
}

fs::path write_config(const std::string& name, const std::string& body) {
    fs::path p = scratch() / name;
    std::ofstream(p) << body;
    return p;
}

int run(const fs::path& config, const fs::path& out, const std::string& extra = "") {
    std::string cmd = std::string("\"") + HLOOP_CLI + "\" --config \"" + config.string() + "\" --out \"" + out.string() +
                      "\" " + extra + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string chain_mc = R"({
  "task": "mc",
  "lattice": {"dimension": 1, "side": 2, "t": 1.0, "boundary": "open"},
  "model": {"N": 2, "U": 4.0},
  "grids": {"beta": [1.0], "b": [0.3]},
  "sampling": {"samples": 20000, "seed": 5, "batches": 40}
})";

}  // namespace

TEST_CASE("schema errors exit 2") {
    auto odd = write_config("odd.json", R"({"task":"ed","lattice":{"dimension":1,"side":3},"model":{"N":1},"grids":{"beta":[1],"b":[0]}})");
    CHECK(run(odd, scratch() / "odd") == 2);
    std::string zero = chain_mc;
    zero.replace(zero.find("20000"), 5, "0");
    CHECK(run(write_config("zero.json", zero), scratch() / "zero") == 2);
    std::string few = chain_mc;
    few.replace(few.find("\"batches\": 40"), 13, "\"batches\": 8");
    CHECK(run(write_config("few.json", few), scratch() / "few") == 2);
    CHECK(run(write_config("junk.json", "{not json"), scratch() / "junk") == 2);
    auto notask = write_config("notask.json", R"({"task":"fit","lattice":{"dimension":1,"side":2},"model":{"N":1},"grids":{"beta":[1],"b":[0]}})");
    CHECK(run(notask, scratch() / "notask") == 2);
}

TEST_CASE("oracle and acceptance failures have their own codes") {
    auto big = write_config("big.json", R"({"task":"ed","lattice":{"dimension":2,"side":6},"model":{"N":8},"grids":{"beta":[1],"b":[0]}})");
    CHECK(run(big, scratch() / "big") == 3);
    auto cold = write_config("cold.json", R"({"task":"mc","lattice":{"dimension":2,"side":2},"model":{"N":3,"constraint":"u_infinity"},
        "grids":{"beta":[60],"b":[0.3]},"sampling":{"samples":32,"seed":1}})");
    CHECK(run(cold, scratch() / "cold") == 4);
}

TEST_CASE("outputs do not depend on thread count and manifests rerun") {
    auto cfg = write_config("chain.json", chain_mc);
    REQUIRE(run(cfg, scratch() / "t1", "--threads 1") == 0);
    REQUIRE(run(cfg, scratch() / "t3", "--threads 3") == 0);
    for (const char* f : {"mc.csv", "partition_weights.csv"}) {
        CHECK(!slurp(scratch() / "t1" / f).empty());
        CHECK(slurp(scratch() / "t1" / f) == slurp(scratch() / "t3" / f));
    }
    REQUIRE(run(scratch() / "t1" / "manifest.json", scratch() / "rerun") == 0);
    CHECK(slurp(scratch() / "t1" / "mc.csv") == slurp(scratch() / "rerun" / "mc.csv"));

    REQUIRE(run(cfg, scratch() / "seed", "--seed-override 99") == 0);
    CHECK(slurp(scratch() / "t1" / "mc.csv") != slurp(scratch() / "seed" / "mc.csv"));
    CHECK(slurp(scratch() / "seed" / "manifest.json").find("\"seed\": 99") != std::string::npos);
}

TEST_CASE("csv rows use CRLF and shortest round-trip doubles") {
    auto cfg = write_config("ed.json", R"({"task":"ed","lattice":{"dimension":1,"side":2},"model":{"N":1},"grids":{"beta":[0.1],"b":[0]}})");
    REQUIRE(run(cfg, scratch() / "ed") == 0);
    std::string csv = slurp(scratch() / "ed" / "ed.csv");
    CHECK(csv.rfind("beta,b,Z,S3,bound,margin\r\n", 0) == 0);
    // free electron on two sites: Z = 2 (e^{0.1} + e^{-0.1})
    std::string row = csv.substr(csv.find("\r\n") + 2);
    double z = std::stod(row.substr(row.find(',', row.find(',') + 1) + 1));
    CHECK(z == doctest::Approx(4 * std::cosh(0.1)).epsilon(1e-14));
    CHECK(row.rfind("0.1,0,", 0) == 0);
}

TEST_CASE("loops and report tasks") {
    auto loops = write_config("loops.json", R"({"task":"loops","lattice":{"dimension":1,"side":4,"boundary":"periodic"},
        "model":{"N":3,"constraint":"u_infinity"},"grids":{"beta":[0.5],"b":[0.5]},"sampling":{"samples":20000,"seed":3}})");
    REQUIRE(run(loops, scratch() / "loops") == 0);
    std::string per = slurp(scratch() / "loops" / "loop_samples.csv");
    CHECK(per.rfind("beta,b,sample,representative,loops,windings,parities,cycle_type\r\n", 0) == 0);
    CHECK(std::count(per.begin(), per.end(), '\n') > 10);

    auto report = write_config("report.json", R"({"task":"report","lattice":{"dimension":1,"side":4},
        "model":{"N":2,"U":2.0},"grids":{"beta":[1.0],"b":[0.77]}})");
    CHECK(run(report, scratch() / "report") == 0);
    CHECK(fs::exists(scratch() / "report" / "coefficients.csv"));
}
