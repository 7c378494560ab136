#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "voxpcg/config.hpp"
#include "voxpcg/harness.hpp"
#include "voxpcg/level_json.hpp"
#include "voxpcg/nca.hpp"
#include "voxpcg/qd.hpp"

namespace fs = std::filesystem;
using namespace voxpcg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerify = 2;

struct Common {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
    cmd->add_option("--config,-c", c.config_path, "JSON config file (defaults when omitted)");
    cmd->add_option("--set", c.sets, "Override a config key, e.g. --set qd.budget=200")->take_all();
    if (with_out) cmd->add_option("--out,-o", c.out, "Output directory (overrides io.out_dir)");
}

Json resolve_config(const Common& c) {
    Json merged = default_config();
    if (!c.config_path.empty()) merged = merge_config(merged, load_config_file(c.config_path));
    for (const auto& s : c.sets) apply_override(merged, s);
    if (!c.out.empty()) merged["io"]["out_dir"] = c.out;
    return merged;
}

void write_manifest(const fs::path& dir, const std::string& command, const Json& config, const Json& args) {
    Json m;
    m["tool"] = "voxpcg";
    m["version"] = VOXPCG_VERSION;
    m["command"] = command;
    m["seed"] = config.at("seed");
    m["args"] = args;
    m["config"] = config;
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

GeneratorOptions generator_options(const RunConfig& rc) { return {rc.env, rc.nca_steps}; }

int cmd_defaults(const std::string& out) {
    const std::string text = default_config().dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
    }
    return kExitOk;
}

int cmd_evolve(const Json& merged) {
    const RunConfig rc = parse_run_config(merged);
    spdlog::info("evolve: task {}, budget {}, dims {}x{}x{}", task_name(rc.task.task), rc.qd.budget, rc.env.dims.width,
                 rc.env.dims.height, rc.env.dims.depth);
    const auto result = run_mapelites(rc.qd, [](const QdProgress& p) {
        spdlog::info("evaluations {} occupancy {} best {:.6f} restarts {}", p.evaluations, p.occupancy, p.best_fitness,
                     p.restarts);
    });
    save_archive(rc.out_dir, result, rc.qd);
    write_manifest(rc.out_dir, "evolve", merged, Json::object());
    fmt::print("archive: {} cells filled, best fitness {}\n", result.archive.occupancy(),
               csv_number(result.archive.best_fitness().value_or(0.0)));
    return kExitOk;
}

int cmd_sweep_doors(const Json& merged, const std::string& generator_flag) {
    const RunConfig rc = parse_run_config(merged);
    if (!rc.task.has_doors()) throw ConfigError("sweep-doors needs a task with doors (set task.task=doors or dungeon)");
    const std::string gen_id = generator_flag.empty() ? rc.generator : generator_flag;
    const auto gen = make_generator(gen_id, generator_options(rc));
    const auto records = door_sweep(*gen, rc.task, rc.env.dims, rc.seed, rc.control.init_solid_probability);
    const fs::path dir = rc.out_dir;
    write_text(dir / "door_sweep.csv", door_sweep_csv(records));
    write_text(dir / "door_sweep_collapsed.csv", collapsed_csv(collapse_symmetric(records, rc.env.dims)));
    const std::string circ = circumference_csv(unravel_circumference(records, rc.env.dims));
    write_text(dir / "door_sweep_circumference.csv", circ);
    write_text(dir / "door_sweep_mean_path_length.svg",
               heatmap_svg(circ, "entrance_pos", "exit_pos", "mean_path_length", "mean path length"));
    write_text(dir / "door_sweep_failure_rate.svg",
               heatmap_svg(circ, "entrance_pos", "exit_pos", "failure_rate", "failure rate"));
    write_manifest(dir, "sweep-doors", merged, Json{{"generator", gen_id}});
    int failed = 0;
    for (const auto& r : records) failed += r.connected ? 0 : 1;
    fmt::print("door sweep: {} pairs, {} disconnected\n", records.size(), failed);
    return kExitOk;
}

int cmd_control_sweep(const Json& merged, const std::string& generator_flag) {
    const RunConfig rc = parse_run_config(merged);
    const std::string gen_id = generator_flag.empty() ? rc.generator : generator_flag;
    const auto gen = make_generator(gen_id, generator_options(rc));
    const auto result = controllability_sweep(*gen, rc.task, rc.control);
    const fs::path dir = rc.out_dir;
    write_text(dir / "controllability.csv", control_csv(result.rows));
    std::vector<std::vector<Level>> reread(result.finals.size());
    for (std::size_t t = 0; t < result.finals.size(); ++t) {
        for (std::size_t s = 0; s < result.finals[t].size(); ++s) {
            const fs::path p = dir / "levels" / fmt::format("target_{:02}_seed_{:02}.json", t, s);
            write_text(p, level_to_json(result.finals[t][s]).dump() + "\n");
            reread[t].push_back(level_from_json(Json::parse(read_text(p))));
        }
    }
    write_manifest(dir, "control-sweep", merged, Json{{"generator", gen_id}});
    ControlSweepResult from_disk;
    from_disk.finals = std::move(reread);
    const auto rows = recompute_control_rows(from_disk, rc.task, rc.control);
    if (control_csv(rows) != control_csv(result.rows)) {
        spdlog::error("control table does not match values recomputed from the saved levels");
        return kExitVerify;
    }
    fmt::print("{}", control_csv(result.rows));
    return kExitOk;
}

int cmd_rollout(const Json& merged, const std::string& params_path, std::uint64_t seed, int steps_flag,
                const std::string& out) {
    const RunConfig rc = parse_run_config(merged);
    const GeneratorParams params = load_params(params_path);
    EvalConfig eval;
    eval.task = default_task(params.arch.task);
    eval.dims = rc.env.dims;
    eval.init_solid_probability = rc.control.init_solid_probability;
    eval.seeds = {seed};
    const Level initial = initial_levels(eval).front();
    const int steps = steps_flag >= 0 ? steps_flag : rc.nca_steps;
    const Level final_level = rollout(params, initial, steps);
    const fs::path out_path(out);
    write_text(out_path, level_to_json(final_level).dump(2) + "\n");
    write_manifest(out_path.has_parent_path() ? out_path.parent_path() : fs::path("."), "rollout", merged,
                   Json{{"params", params_path}, {"seed", seed}, {"steps", steps}, {"out", out}});
    return kExitOk;
}

int cmd_verify(const Json& merged, bool inject_fault) {
    RunConfig rc = parse_run_config(merged);
    if (inject_fault) rc.oracle.fault = OracleFault::kPerturbEdgeCost;
    bool ok = true;
    Json report;
    Json cal = Json::array();
    for (const auto& c : run_calibration()) {
        fmt::print("{} {} {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
        cal.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        ok = ok && c.passed;
    }
    report["calibration"] = cal;
    const auto oracle = oracle_check(rc.oracle);
    fmt::print("{} oracle: {} levels, {} pairs, {} mismatches\n", oracle.passed() ? "PASS" : "FAIL", oracle.levels,
               oracle.pairs, oracle.mismatches.size());
    Json mism = Json::array();
    for (const auto& m : oracle.mismatches) {
        mism.push_back({{"dims", {m.dims.width, m.dims.height, m.dims.depth}}, {"seed", m.seed}, {"what", m.what}});
    }
    report["oracle"] = {{"levels", oracle.levels}, {"pairs", oracle.pairs}, {"mismatches", mism}};
    ok = ok && oracle.passed();
    report["passed"] = ok;
    write_text(rc.out_dir / "verify_report.json", report.dump(2) + "\n");
    write_manifest(rc.out_dir, "verify", merged, Json{{"inject_fault", inject_fault}});
    return ok ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Voxel level generation: tasks, NCA generators, quality-diversity search and sweeps"};
    app.require_subcommand(1);
    int jobs = 0;
    bool quiet = false;
    app.add_option("--jobs,-j", jobs, "Worker threads (0: all logical CPUs)");
    app.add_flag("--quiet,-q", quiet, "Only log warnings and errors");

    std::string defaults_out;
    auto* defaults = app.add_subcommand("defaults", "Print the default config");
    defaults->add_option("--out,-o", defaults_out, "Write to a file instead of stdout");

    Common evolve_c;
    auto* evolve = app.add_subcommand("evolve", "Run MAP-Elites over NCA generators");
    add_common(evolve, evolve_c);

    Common sweep_c;
    std::string sweep_gen;
    auto* sweep = app.add_subcommand("sweep-doors", "Run one episode per valid door pair");
    add_common(sweep, sweep_c);
    sweep->add_option("--generator,-g", sweep_gen, "air, solid, greedy, random, or a params file");

    Common control_c;
    std::string control_gen;
    auto* control = app.add_subcommand("control-sweep", "Sweep a controllable target");
    add_common(control, control_c);
    control->add_option("--generator,-g", control_gen, "air, solid, greedy, random, or a params file");

    Common rollout_c;
    std::string params_path, rollout_out;
    std::uint64_t rollout_seed = 0;
    int rollout_steps = -1;
    auto* roll = app.add_subcommand("rollout", "Roll an NCA out from a seeded random level");
    add_common(roll, rollout_c, false);
    roll->add_option("--params,-p", params_path, "Params file")->required();
    roll->add_option("--seed,-s", rollout_seed, "Initial level seed");
    roll->add_option("--steps", rollout_steps, "Update steps (default nca.steps)");
    roll->add_option("--out,-o", rollout_out, "Output level JSON")->required();

    Common verify_c;
    bool inject = false;
    auto* verify = app.add_subcommand("verify", "Oracle cross-check and calibration cases");
    add_common(verify, verify_c);
    verify->add_flag("--inject-fault", inject, "Perturb one oracle edge cost per level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    spdlog::set_default_logger(spdlog::stderr_color_mt("voxpcg"));
    spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);
    spdlog::set_pattern("[%l] %v");
    if (jobs > 0) omp_set_num_threads(jobs);

    try {
        if (*defaults) return cmd_defaults(defaults_out);
        if (*evolve) return cmd_evolve(resolve_config(evolve_c));
        if (*sweep) return cmd_sweep_doors(resolve_config(sweep_c), sweep_gen);
        if (*control) return cmd_control_sweep(resolve_config(control_c), control_gen);
        if (*roll) return cmd_rollout(resolve_config(rollout_c), params_path, rollout_seed, rollout_steps, rollout_out);
        if (*verify) return cmd_verify(resolve_config(verify_c), inject);
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        spdlog::error("{}", e.what());
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        spdlog::error("config: {}", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
