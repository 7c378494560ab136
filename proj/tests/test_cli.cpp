#include <doctest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "voxpcg/harness.hpp"
#include "voxpcg/level_json.hpp"

using namespace voxpcg;
namespace fs = std::filesystem;

namespace {

const fs::path kTmp = fs::temp_directory_path() / "voxpcg_test_cli";

int run(const std::string& args) {
    const std::string cmd = std::string(VOXPCG_CLI) + " -q " + args + " > " + (kTmp / "stdout.txt").string() +
                            " 2> " + (kTmp / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text) n += c == '\n' ? 1 : 0;
    return n;
}

struct TmpDir {
    TmpDir() {
        fs::remove_all(kTmp);
        fs::create_directories(kTmp);
    }
    ~TmpDir() { fs::remove_all(kTmp); }
};

}  // namespace

TEST_CASE("usage and config errors exit with 1") {
    TmpDir tmp;
    CHECK(run("") == 1);
    CHECK(run("no-such-command") == 1);
    CHECK(run("evolve --config /nonexistent/config.json") == 1);
    CHECK(!read_text(kTmp / "stderr.txt").empty());
    CHECK(run("evolve --set qd.unknown=1") == 1);
    CHECK(run("sweep-doors --set task.task=doors --generator nonesuch -o " + (kTmp / "s").string()) == 1);
    CHECK(run("sweep-doors -o " + (kTmp / "s").string()) == 1);
}

TEST_CASE("defaults prints the reference config") {
    TmpDir tmp;
    REQUIRE(run("defaults") == 0);
    const Json j = Json::parse(read_text(kTmp / "stdout.txt"));
    CHECK(j.at("qd").at("budget") == 10000);
}

TEST_CASE("tiny evolve finishes quickly and writes its archive") {
    TmpDir tmp;
    const auto t0 = std::chrono::steady_clock::now();
    REQUIRE(run("evolve --set qd.budget=200 env.dims=[3,3,3] -o " + (kTmp / "ev").string()) == 0);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 60.0);
    for (const char* f : {"archive.csv", "progress.csv", "manifest.json", "heatmap_fitness.svg"})
        CHECK(fs::exists(kTmp / "ev" / f));
    const Json m = Json::parse(read_text(kTmp / "ev" / "manifest.json"));
    CHECK(m.at("command") == "evolve");
    CHECK(m.at("config").at("qd").at("budget") == 200);
}

TEST_CASE("sweep-doors writes one row per valid pair") {
    TmpDir tmp;
    REQUIRE(run("sweep-doors --set task.task=doors env.dims=[4,4,4] --generator greedy -o " + (kTmp / "sw").string()) == 0);
    const auto csv = read_text(kTmp / "sw" / "door_sweep.csv");
    CHECK(count_lines(csv) == 1 + static_cast<int>(valid_door_pairs({4, 4, 4}).size()));
    CHECK(fs::exists(kTmp / "sw" / "door_sweep_failure_rate.svg"));
}

TEST_CASE("control-sweep writes one row per target and passes its recompute check") {
    TmpDir tmp;
    REQUIRE(run("control-sweep --set env.dims=[4,4,4] harness.seeds=2 harness.targets=[0,10,20] --generator air -o " +
                (kTmp / "cs").string()) == 0);
    const auto csv = read_text(kTmp / "cs" / "controllability.csv");
    CHECK(count_lines(csv) == 4);
    CHECK(fs::exists(kTmp / "cs" / "levels" / "target_02_seed_01.json"));
}

TEST_CASE("rollout echoes the initial level at zero steps") {
    TmpDir tmp;
    GeneratorParams p;
    p.arch = {TaskKind::kDiameter, 32};
    p.theta.assign(param_count(p.arch), 0.25f);
    save_params(kTmp / "p.bin", p);
    const std::string base = "rollout --params " + (kTmp / "p.bin").string() + " --seed 4 ";
    REQUIRE(run(base + "--steps 0 --out " + (kTmp / "a.json").string()) == 0);
    const Level a = level_from_json(Json::parse(read_text(kTmp / "a.json")));
    CHECK(a.dims() == Dims{7, 7, 7});
    CHECK(a == new_level({7, 7, 7}, InitSpec::uniform(0.5, derive_seed(4, 0))));
    REQUIRE(run(base + "--out " + (kTmp / "b.json").string()) == 0);
    REQUIRE(run(base + "--out " + (kTmp / "c.json").string()) == 0);
    CHECK(read_text(kTmp / "b.json") == read_text(kTmp / "c.json"));
    CHECK(run("rollout --seed 4 --out " + (kTmp / "d.json").string()) == 1);
}

TEST_CASE("verify exit code reflects the result") {
    TmpDir tmp;
    const std::string small = "--set 'harness.oracle=[{\"dims\":[4,4,4],\"count\":40}]' ";
    CHECK(run("verify " + small + "-o " + (kTmp / "v").string()) == 0);
    const Json report = Json::parse(read_text(kTmp / "v" / "verify_report.json"));
    CHECK(report.at("passed") == true);
    CHECK(run("verify --inject-fault " + small + "-o " + (kTmp / "w").string()) == 2);
}
