#include "voxpcg/config.hpp"

#include <fstream>

#include <fmt/format.h>

namespace voxpcg {

Json default_config() {
    Json c;
    c["seed"] = 0;
    c["task"] = {{"task", "diameter"},
                 {"metrics", nullptr},
                 {"action_tiles", nullptr},
                 {"controllable", Json::array()},
                 {"target_ranges", nullptr}};
    c["env"] = {{"dims", {7, 7, 7}},
                {"sweeps", 2},
                {"scan_order", "xzy"},
                {"reward_sign", "loss_decrease"},
                {"distance_only_loss", false},
                {"level_jumps", true}};
    c["nca"] = {{"hidden", 32}, {"steps", 50}};
    c["qd"] = {{"budget", 10000},
               {"init_count", 100},
               {"init_sigma", 0.5},
               {"bins", {20, 20}},
               {"d_max", 196.0},
               {"emitter", "cma_me"},
               {"sigma0", 0.2},
               {"gaussian_sigma", 0.1},
               {"batch_size", 0},
               {"emitters", 1},
               {"eval_levels", 10},
               {"init_solid_probability", 0.5},
               {"jump_norm", 10.0},
               {"lexicographic", false}};
    Json targets = Json::array();
    for (double t : default_control_targets()) targets.push_back(t);
    c["harness"] = {{"generator", "greedy"},
                    {"targets", targets},
                    {"seeds", 20},
                    {"metric", "diameter"},
                    {"init_solid_probability", 0.5},
                    {"oracle", Json::array({Json{{"dims", {5, 5, 5}}, {"count", 1000}},
                                            Json{{"dims", {4, 4, 4}}, {"count", 500}}})},
                    {"door_fraction", 0.5}};
    c["io"] = {{"out_dir", "out"}};
    return c;
}

namespace {

bool same_kind(const Json& a, const Json& b) {
    if (a.is_number() && b.is_number()) return true;
    return a.type() == b.type();
}

void merge_into(Json& base, const Json& user, const std::string& path) {
    if (!user.is_object()) throw ConfigError(fmt::format("config section '{}' must be an object", path));
    for (const auto& [key, value] : user.items()) {
        const std::string here = path.empty() ? key : path + "." + key;
        if (!base.contains(key)) throw ConfigError(fmt::format("unknown config key '{}'", here));
        Json& slot = base[key];
        if (slot.is_null()) {
            slot = value;
        } else if (slot.is_object()) {
            merge_into(slot, value, here);
        } else if (!same_kind(slot, value)) {
            throw ConfigError(fmt::format("config key '{}' expects a {}", here, slot.type_name()));
        } else {
            slot = value;
        }
    }
}

}  // namespace

Json merge_config(const Json& defaults, const Json& user) {
    Json out = defaults;
    merge_into(out, user, "");
    return out;
}

void apply_override(Json& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) throw ConfigError(fmt::format("override '{}' is not key=value", assignment));
    const std::string key(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    Json patch = value;
    std::size_t end = key.size();
    while (true) {
        const auto dot = key.rfind('.', end - 1);
        const std::string part = key.substr(dot == std::string::npos ? 0 : dot + 1, end - (dot == std::string::npos ? 0 : dot + 1));
        if (part.empty()) throw ConfigError(fmt::format("override key '{}' is malformed", key));
        Json wrap = Json::object();
        wrap[part] = std::move(patch);
        patch = std::move(wrap);
        if (dot == std::string::npos) break;
        end = dot;
    }
    merge_into(config, patch, "");
}

Json load_config_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
    Json j = Json::parse(is, nullptr, false);
    if (j.is_discarded()) throw ConfigError(fmt::format("config file '{}' is not valid JSON", path.string()));
    return j;
}

namespace {

Dims dims_of(const Json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(fmt::format("{} must be [width, height, depth]", what));
    const Dims d{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
    try {
        validate_dims(d);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return d;
}

template <class F>
auto checked(const char* section, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(fmt::format("{}: {}", section, e.what()));
    }
}

}  // namespace

RunConfig parse_run_config(const Json& m) {
    RunConfig r;
    r.seed = m.at("seed").get<std::uint64_t>();
    r.task = checked("task", [&] { return task_from_json(m.at("task")); });

    const Json& env = m.at("env");
    r.env.dims = dims_of(env.at("dims"), "env.dims");
    r.env.sweeps = env.at("sweeps").get<int>();
    if (r.env.sweeps < 1) throw ConfigError("env.sweeps must be >= 1");
    r.env.scan_order = checked("env", [&] { return scan_order_from_name(env.at("scan_order").get<std::string>()); });
    const auto sign = env.at("reward_sign").get<std::string>();
    if (sign == "loss_decrease") {
        r.env.reward_sign = RewardSign::kLossDecrease;
    } else if (sign == "literal") {
        r.env.reward_sign = RewardSign::kLiteral;
    } else {
        throw ConfigError(fmt::format("env.reward_sign '{}' is not loss_decrease or literal", sign));
    }
    r.env.loss_mode = env.at("distance_only_loss").get<bool>() ? LossMode::kDistanceOnly : LossMode::kSigned;
    r.env.traverse.level_jumps = env.at("level_jumps").get<bool>();

    r.nca_hidden = m.at("nca").at("hidden").get<int>();
    r.nca_steps = m.at("nca").at("steps").get<int>();
    if (r.nca_hidden < 1 || r.nca_steps < 0) throw ConfigError("nca.hidden must be >= 1 and nca.steps >= 0");

    const Json& qd = m.at("qd");
    auto& q = r.qd;
    q.seed = r.seed;
    q.hidden = r.nca_hidden;
    q.budget = qd.at("budget").get<int>();
    q.init_count = qd.at("init_count").get<int>();
    q.init_sigma = qd.at("init_sigma").get<double>();
    const auto& bins = qd.at("bins");
    if (!bins.is_array() || bins.size() != 2) throw ConfigError("qd.bins must be [emptiness, diameter]");
    q.archive.bins_emptiness = bins[0].get<int>();
    q.archive.bins_diameter = bins[1].get<int>();
    q.archive.d_max = qd.at("d_max").get<double>();
    q.archive.lexicographic = qd.at("lexicographic").get<bool>();
    q.emitter = checked("qd", [&] { return emitter_from_name(qd.at("emitter").get<std::string>()); });
    q.sigma0 = qd.at("sigma0").get<double>();
    q.gaussian_sigma = qd.at("gaussian_sigma").get<double>();
    q.batch_size = qd.at("batch_size").get<int>();
    q.emitters = qd.at("emitters").get<int>();
    q.eval_levels = qd.at("eval_levels").get<int>();
    q.eval.task = r.task;
    q.eval.dims = r.env.dims;
    q.eval.steps = r.nca_steps;
    q.eval.init_solid_probability = qd.at("init_solid_probability").get<double>();
    q.eval.jump_norm = qd.at("jump_norm").get<double>();
    q.eval.d_max = q.archive.d_max;
    q.eval.traverse = r.env.traverse;
    if (q.budget < q.init_count || q.init_count < 1) throw ConfigError("qd.budget must be >= qd.init_count >= 1");
    if (q.archive.bins_emptiness < 1 || q.archive.bins_diameter < 1 || !(q.archive.d_max > 0.0)) {
        throw ConfigError("qd.bins must be >= 1 and qd.d_max > 0");
    }
    if (q.eval_levels < 1 || q.emitters < 1 || q.batch_size < 0) {
        throw ConfigError("qd.eval_levels and qd.emitters must be >= 1, qd.batch_size >= 0");
    }

    const Json& h = m.at("harness");
    r.generator = h.at("generator").get<std::string>();
    r.control.metric = checked("harness", [&] { return metric_from_name(h.at("metric").get<std::string>()); });
    r.control.targets.clear();
    for (const auto& t : h.at("targets")) r.control.targets.push_back(t.get<double>());
    r.control.seeds = h.at("seeds").get<int>();
    if (r.control.seeds < 1) throw ConfigError("harness.seeds must be >= 1");
    r.control.seed = r.seed;
    r.control.init_solid_probability = h.at("init_solid_probability").get<double>();
    r.control.dims = r.env.dims;
    r.oracle.batches.clear();
    for (const auto& b : h.at("oracle")) {
        r.oracle.batches.push_back({dims_of(b.at("dims"), "harness.oracle.dims"), b.at("count").get<int>()});
    }
    r.oracle.door_fraction = h.at("door_fraction").get<double>();
    r.oracle.seed = r.seed;
    r.oracle.traverse = r.env.traverse;

    r.out_dir = m.at("io").at("out_dir").get<std::string>();
    return r;
}

}  // namespace voxpcg
