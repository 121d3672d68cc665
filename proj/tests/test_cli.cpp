#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "lattree/experiments.hpp"

using namespace lattree;
namespace fs = std::filesystem;

#ifndef LATTREE_BIN
#define LATTREE_BIN "./lattree"
#endif

namespace {

const fs::path kTmp = "cli_tmp";

void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    os << content;
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

int run_cli(const std::string& args) {
    return std::system((std::string(LATTREE_BIN) + " " + args).c_str());
}

} // namespace

TEST_CASE("config parsing: values, lists, comments, failures") {
    write_file(kTmp / "parse.cfg",
               "# comment line\n"
               "seed = 9\n"
               "n = 33   # trailing comment\n"
               "K_list = 2, 4, 8\n"
               "pairs = 3:20, 8:60\n"
               "times = 0.1,0.25\n"
               "threshold = 0.125\n");
    const auto kv = read_config_file((kTmp / "parse.cfg").string());
    const auto cfg = make_config("check-v", kv);
    CHECK(cfg.seed == 9);
    CHECK(cfg.n == 33);
    CHECK(cfg.K_list == std::vector<int>{2, 4, 8});
    REQUIRE(cfg.pairs.size() == 2);
    CHECK(cfg.pairs[1] == std::pair<int, int>{8, 60});
    CHECK(cfg.times == std::vector<double>{0.1, 0.25});
    CHECK(cfg.threshold == 0.125);

    CHECK_THROWS_AS(make_config("no-such-kind", kv), std::invalid_argument);
    CHECK_THROWS_AS(make_config("check-v", {{"seed", "1"}, {"bogus", "2"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_config("check-v", {{"seed", "1"}, {"n", "frog"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_config("check-v", {{"seed", "1"}, {"d", "-3"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_config("check-v", {{"n", "10"}}), // seed is mandatory
                    std::invalid_argument);
    CHECK_THROWS_AS(read_config_file((kTmp / "missing.cfg").string()),
                    std::invalid_argument);
    write_file(kTmp / "bad.cfg", "just words\n");
    CHECK_THROWS_AS(read_config_file((kTmp / "bad.cfg").string()),
                    std::invalid_argument);
}

TEST_CASE("manifest hash: sensitive to model knobs, not to workers/out") {
    std::map<std::string, std::string> kv{{"seed", "5"}, {"n", "40"}};
    auto a = make_config("check-r", kv);
    auto b = a;
    b.workers = 7;
    b.out = "elsewhere";
    CHECK(manifest_hash(a) == manifest_hash(b));
    auto c = a;
    c.seed = 6;
    CHECK(manifest_hash(a) != manifest_hash(c));
    auto d = a;
    d.n = 41;
    CHECK(manifest_hash(a) != manifest_hash(d));
}

TEST_CASE("cli: invalid invocations exit nonzero") {
    CHECK(run_cli("definitely-not-a-kind --config cli_tmp/parse.cfg 2>/dev/null") != 0);
    CHECK(run_cli("check-r --config cli_tmp/no_such_file.cfg 2>/dev/null") != 0);
    CHECK(run_cli("check-r 2>/dev/null") != 0); // --config required
}

TEST_CASE("cli: smoke runs emit manifest, report, csv, svg") {
    write_file(kTmp / "smoke.cfg", "seed = 11\nn = 25\nK = 2\nreplicas = 8\n");
    REQUIRE(run_cli("check-r --config cli_tmp/smoke.cfg --out cli_tmp/smoke_out") == 0);
    for (const char* f : {"manifest.json", "report.json", "check_r.csv", "check_r.svg"})
        CHECK(fs::exists(kTmp / "smoke_out" / f));
    const std::string report = read_file(kTmp / "smoke_out" / "report.json");
    CHECK(report.find("\"experiment\": \"check-r\"") != std::string::npos);
    // the csv carries the manifest hash of the run
    std::map<std::string, std::string> kv{{"seed", "11"}, {"n", "25"}, {"K", "2"},
                                          {"replicas", "8"}};
    const std::string hash = manifest_hash(make_config("check-r", kv));
    CHECK(read_file(kTmp / "smoke_out" / "check_r.csv").find(hash) !=
          std::string::npos);
}

TEST_CASE("cli: identical config+seed reruns are byte-identical across workers") {
    write_file(kTmp / "det.cfg",
               "seed = 3\nK = 1\nK1 = 12\nM = 16\nreplicas = 24\ngrid = 200\n");
    REQUIRE(run_cli("lemma-step0 --config cli_tmp/det.cfg --workers 1 "
                    "--out cli_tmp/det1") == 0);
    REQUIRE(run_cli("lemma-step0 --config cli_tmp/det.cfg --workers 3 "
                    "--out cli_tmp/det2") == 0);
    for (const char* f :
         {"manifest.json", "report.json", "lemma_step0.csv", "lemma_step0.svg"}) {
        CAPTURE(f);
        CHECK(read_file(kTmp / "det1" / f) == read_file(kTmp / "det2" / f));
    }
    // a different seed changes the report
    REQUIRE(run_cli("lemma-step0 --config cli_tmp/det.cfg --seed 4 "
                    "--out cli_tmp/det3") == 0);
    CHECK(read_file(kTmp / "det1" / "report.json") !=
          read_file(kTmp / "det3" / "report.json"));
}
