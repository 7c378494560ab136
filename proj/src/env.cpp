#include "voxpcg/env.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace voxpcg {

std::string_view scan_order_name(ScanOrder s) { return s == ScanOrder::kXZY ? "xzy" : "xyz"; }

ScanOrder scan_order_from_name(std::string_view name) {
    if (name == "xzy") return ScanOrder::kXZY;
    if (name == "xyz") return ScanOrder::kXYZ;
    throw std::invalid_argument(fmt::format("unknown scan order '{}'", name));
}

Environment::Environment(TaskSpec task, EnvConfig config) : task_(std::move(task)), config_(config) {
    validate_task(task_);
    validate_dims(config_.dims);
    if (config_.sweeps < 1) throw std::invalid_argument("sweeps must be >= 1");
}

Vec3 Environment::cursor_position(int cursor) const {
    const Dims d = config_.dims;
    const int x = cursor % d.width;
    const int rest = cursor / d.width;
    if (config_.scan_order == ScanOrder::kXZY) return {x, rest / d.depth, rest % d.depth};
    return {x, rest % d.height, rest / d.height};
}

int Environment::channel_count() const {
    return static_cast<int>(task_.action_tiles.size()) + 1 + 1 + static_cast<int>(task_.controllable.size());
}

double Environment::evaluate_loss(const Level& level, const TaskSpec& resolved) const {
    return loss(compute_metrics(level, resolved, config_.traverse), resolved, config_.loss_mode);
}

std::pair<EnvState, Observation> Environment::reset(std::uint64_t seed) const {
    Level level(config_.dims);
    if (task_.has_doors()) {
        const auto [entrance, exit] = sample_door_pair(config_.dims, derive_seed(seed, 0));
        level.set_doors(entrance, exit);
    }
    TaskSpec resolved = task_.controllable.empty() ? task_ : sample_targets(task_, derive_seed(seed, 1));
    return reset_from(std::move(level), std::move(resolved), seed);
}

std::pair<EnvState, Observation> Environment::reset_from(Level level, TaskSpec resolved, std::uint64_t seed) const {
    if (level.dims() != config_.dims) throw std::invalid_argument("level dims differ from the environment dims");
    EnvState s{std::move(level), 0, 0, config_.sweeps * config_.dims.volume(), std::move(resolved), 0.0, seed, {}};
    s.evaluation = evaluate_level(s.level, s.task, config_.traverse);
    s.prev_loss = loss(s.evaluation.metrics, s.task, config_.loss_mode);
    Observation obs = encode_observation(s);
    return {std::move(s), std::move(obs)};
}

StepResult Environment::step(EnvState& state, int action) const {
    if (state.done()) throw std::logic_error("step called on a finished episode");
    if (action < 0 || action >= static_cast<int>(state.task.action_tiles.size())) {
        throw std::out_of_range(fmt::format("action {} out of range", action));
    }
    const Vec3 p = cursor_position(state.cursor);
    const Tile tile = state.task.action_tiles[static_cast<std::size_t>(action)];
    double new_loss = state.prev_loss;
    if (state.level.at(p) != tile) {
        state.level.set(p, tile);
        state.evaluation = evaluate_level(state.level, state.task, config_.traverse);
        new_loss = loss(state.evaluation.metrics, state.task, config_.loss_mode);
    }
    StepResult r;
    r.reward = reward(state.prev_loss, new_loss, config_.reward_sign);
    state.prev_loss = new_loss;
    state.cursor = (state.cursor + 1) % state.level.volume();
    ++state.step_count;
    r.done = state.done();
    r.info.metrics = state.evaluation.metrics;
    r.info.loss = new_loss;
    r.info.connected = state.evaluation.metrics.connected;
    r.info.failure = state.task.has_doors() && !state.evaluation.metrics.connected;
    r.observation = encode_observation(state);
    return r;
}

Observation Environment::encode_observation(const EnvState& state) const {
    const Dims d = state.level.dims();
    Observation obs;
    obs.channels = channel_count();
    obs.extent = {2 * d.width - 1, 2 * d.height - 1, 2 * d.depth - 1};
    const std::size_t plane = static_cast<std::size_t>(obs.extent.volume());
    obs.data.assign(plane * static_cast<std::size_t>(obs.channels), 0.0f);

    const int tile_channels = static_cast<int>(state.task.action_tiles.size());
    auto channel_of = [&](Tile t) {
        if (t == Tile::kBorder) return tile_channels;
        const auto it = std::find(state.task.action_tiles.begin(), state.task.action_tiles.end(), t);
        if (it == state.task.action_tiles.end()) throw std::logic_error("tile outside the task's tile set");
        return static_cast<int>(it - state.task.action_tiles.begin());
    };
    const Vec3 cursor = cursor_position(state.cursor);
    const Vec3 center{d.width - 1, d.height - 1, d.depth - 1};
    auto offset = [&](int c, Vec3 w) {
        return static_cast<std::size_t>(c) * plane +
               static_cast<std::size_t>((w.y * obs.extent.depth + w.z) * obs.extent.width + w.x);
    };
    for (int wy = 0; wy < obs.extent.height; ++wy) {
        for (int wz = 0; wz < obs.extent.depth; ++wz) {
            for (int wx = 0; wx < obs.extent.width; ++wx) {
                const Vec3 w{wx, wy, wz};
                const Vec3 p = cursor + (w - center);
                if (!d.contains_framed(p)) continue;
                obs.data[offset(channel_of(state.level.voxel(p)), w)] = 1.0f;
            }
        }
    }
    const int path_channel = tile_channels + 1;
    for (const Vec3 p : state.evaluation.path.positions()) {
        const Vec3 w = p - cursor + center;
        if (w.x < 0 || w.y < 0 || w.z < 0 || w.x >= obs.extent.width || w.y >= obs.extent.height ||
            w.z >= obs.extent.depth) {
            continue;
        }
        obs.data[offset(path_channel, w)] = 1.0f;
    }
    for (std::size_t i = 0; i < state.task.controllable.size(); ++i) {
        const Metric m = state.task.controllable[i];
        const MetricSpec* spec = state.task.find(m);
        const double target = spec->target.kind == Target::Kind::kInterval ? 0.5 * (spec->target.lo + spec->target.hi)
                                                                            : spec->target.lo;
        const auto value = static_cast<float>(target - state.evaluation.metrics.at(m));
        const std::size_t begin = static_cast<std::size_t>(path_channel + 1 + static_cast<int>(i)) * plane;
        std::fill(obs.data.begin() + static_cast<std::ptrdiff_t>(begin),
                  obs.data.begin() + static_cast<std::ptrdiff_t>(begin + plane), value);
    }
    return obs;
}

int greedy_policy(const Environment& env, const EnvState& state) {
    if (state.done()) throw std::logic_error("greedy_policy on a finished episode");
    const Vec3 p = env.cursor_position(state.cursor);
    const Tile current = state.level.at(p);
    Level scratch = state.level;
    int best = 0;
    double best_loss = 0.0;
    for (int a = 0; a < static_cast<int>(state.task.action_tiles.size()); ++a) {
        const Tile t = state.task.action_tiles[static_cast<std::size_t>(a)];
        double l = state.prev_loss;
        if (t != current) {
            scratch.set(p, t);
            l = env.evaluate_loss(scratch, state.task);
            scratch.set(p, current);
        }
        if (a == 0 || l < best_loss) {
            best = a;
            best_loss = l;
        }
    }
    return best;
}

int random_policy(const Environment& env, Rng& rng) {
    return static_cast<int>(rng.below(env.task().action_tiles.size()));
}

Json trace_record_to_json(const TraceRecord& r) {
    Json j;
    j["cursor"] = r.cursor;
    j["action"] = r.action;
    j["reward"] = r.reward;
    j["loss"] = r.loss;
    Json m = Json::object();
    for (const auto& [k, v] : r.metrics.values) m[std::string(metric_name(k))] = v;
    j["metrics"] = std::move(m);
    return j;
}

}  // namespace voxpcg
