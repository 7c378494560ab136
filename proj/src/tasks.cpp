#include "voxpcg/tasks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "voxpcg/rng.hpp"

namespace voxpcg {

namespace {

constexpr std::array<std::string_view, 3> kTaskNames{"diameter", "doors", "dungeon"};
constexpr std::array<std::string_view, 6> kMetricNames{"n_jumps",  "diameter",  "path_length",
                                                       "n_chests", "n_enemies", "nearest_enemy"};
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_bound(double v) { return std::isinf(v) ? std::string("inf") : fmt::format("{}", v); }

double parse_bound(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (s == "inf" || s == "+inf") return kInf;
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument(fmt::format("bad number '{}'", s));
    return v;
}

}  // namespace

std::string_view task_name(TaskKind t) { return kTaskNames.at(static_cast<std::size_t>(t)); }

TaskKind task_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kTaskNames.size(); ++i) {
        if (kTaskNames[i] == name) return static_cast<TaskKind>(i);
    }
    throw std::invalid_argument(fmt::format("unknown task '{}'", name));
}

std::string_view metric_name(Metric m) { return kMetricNames.at(static_cast<std::size_t>(m)); }

Metric metric_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
        if (kMetricNames[i] == name) return static_cast<Metric>(i);
    }
    throw std::invalid_argument(fmt::format("unknown metric '{}'", name));
}

Target Target::interval(double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("interval target needs lo <= hi");
    return {Kind::kInterval, lo, hi};
}

double Target::distance(double m) const {
    switch (kind) {
        case Kind::kScalar: return std::abs(lo - m);
        case Kind::kInterval:
            if (m < lo) return lo - m;
            if (m > hi) return m - hi;
            return 0.0;
        case Kind::kMaximize: return std::abs(m);
    }
    return 0.0;
}

std::string Target::to_string() const {
    switch (kind) {
        case Kind::kScalar: return format_bound(lo);
        case Kind::kInterval: return fmt::format("[{},{}]", format_bound(lo), format_bound(hi));
        case Kind::kMaximize: return "max";
    }
    return {};
}

Target Target::parse(std::string_view text) {
    if (text == "max") return maximize();
    if (!text.empty() && text.front() == '[') {
        const auto close = text.find_first_of("])");
        const auto comma = text.find(',');
        if (close == std::string_view::npos || comma == std::string_view::npos || comma > close) {
            throw std::invalid_argument(fmt::format("bad interval target '{}'", text));
        }
        return interval(parse_bound(text.substr(1, comma - 1)), parse_bound(text.substr(comma + 1, close - comma - 1)));
    }
    return scalar(parse_bound(text));
}

const MetricSpec* TaskSpec::find(Metric m) const {
    for (const auto& s : metrics) {
        if (s.metric == m) return &s;
    }
    return nullptr;
}

MetricSpec* TaskSpec::find(Metric m) {
    for (auto& s : metrics) {
        if (s.metric == m) return &s;
    }
    return nullptr;
}

TaskSpec default_task(TaskKind kind) {
    TaskSpec t;
    t.task = kind;
    switch (kind) {
        case TaskKind::kDiameter:
            t.metrics = {{Metric::kNJumps, 1.0, Target::scalar(5)}, {Metric::kDiameter, 1.0, Target::maximize()}};
            t.action_tiles = {Tile::kAir, Tile::kSolid};
            break;
        case TaskKind::kDoors:
            t.metrics = {{Metric::kNJumps, 1.5, Target::scalar(5)},
                         {Metric::kDiameter, 1.0, Target::maximize()},
                         {Metric::kPathLength, 1.2, Target::maximize()}};
            t.action_tiles = {Tile::kAir, Tile::kSolid};
            break;
        case TaskKind::kDungeon:
            t.metrics = {{Metric::kNJumps, 1.0, Target::interval(2, 5)},
                         {Metric::kNChests, 3.0, Target::scalar(1)},
                         {Metric::kNEnemies, 1.0, Target::interval(2, 5)},
                         {Metric::kNearestEnemy, 2.0, Target::interval(5, kInf)},
                         {Metric::kPathLength, 1.0, Target::maximize()}};
            t.action_tiles = {Tile::kAir, Tile::kSolid, Tile::kChest, Tile::kEnemy};
            break;
    }
    for (const auto& m : t.metrics) {
        if (m.metric == Metric::kNJumps) t.target_ranges[m.metric] = {0.0, 10.0};
        if (m.metric == Metric::kDiameter || m.metric == Metric::kPathLength) t.target_ranges[m.metric] = {0.0, 50.0};
    }
    return t;
}

void validate_task(const TaskSpec& task) {
    if (task.metrics.empty()) throw std::invalid_argument("task has no metrics");
    for (const auto& m : task.metrics) {
        if (!(m.weight > 0.0)) throw std::invalid_argument(fmt::format("metric {} needs weight > 0", metric_name(m.metric)));
        if (m.target.kind == Target::Kind::kInterval && !(m.target.lo <= m.target.hi)) {
            throw std::invalid_argument(fmt::format("metric {} interval has lo > hi", metric_name(m.metric)));
        }
    }
    const bool dungeon = task.task == TaskKind::kDungeon;
    if (task.action_tiles.empty() || task.action_tiles.front() != Tile::kAir) {
        throw std::invalid_argument("action tiles must start with air");
    }
    for (Tile t : task.action_tiles) {
        if (t == Tile::kBorder) throw std::invalid_argument("border is not placeable");
        if (!dungeon && (t == Tile::kChest || t == Tile::kEnemy)) {
            throw std::invalid_argument("chest and enemy tiles belong to the dungeon task");
        }
    }
    for (Metric c : task.controllable) {
        if (!task.find(c)) throw std::invalid_argument(fmt::format("controllable metric {} not in task", metric_name(c)));
    }
}

double MetricVector::at(Metric m) const {
    const auto it = values.find(m);
    if (it == values.end()) throw std::out_of_range(fmt::format("metric {} not computed", metric_name(m)));
    return it->second;
}

namespace {

using NodeId = MoveGraph::NodeId;

LevelEvaluation evaluate_diameter(const Level& level, const TraverseOptions& opts) {
    const auto g = build_move_graph(level, opts);
    LevelEvaluation ev;
    ev.path = diameter(g);
    ev.metrics.values[Metric::kDiameter] = ev.path.length;
    ev.metrics.values[Metric::kNJumps] = ev.path.jumps;
    return ev;
}

LevelEvaluation evaluate_doors(const Level& level, const TraverseOptions& opts) {
    const auto g = build_move_graph(level, opts);
    const auto tree = shortest_path_tree(g, *g.entrance());
    const NodeId exit = *g.exit();
    NodeId far = tree.source;
    for (std::size_t v = 0; v < g.size(); ++v) {
        if (tree.dist[v] > tree.dist[static_cast<std::size_t>(far)]) far = static_cast<NodeId>(v);
    }
    const PathReport furthest = extract_path(g, tree, far);
    LevelEvaluation ev;
    ev.metrics.connected = tree.reached(exit);
    ev.metrics.values[Metric::kDiameter] = furthest.length;
    if (ev.metrics.connected) {
        ev.path = extract_path(g, tree, exit);
        ev.metrics.values[Metric::kPathLength] = ev.path.length;
    } else {
        ev.path = furthest;
        ev.metrics.values[Metric::kPathLength] = 0;
    }
    ev.metrics.values[Metric::kNJumps] = ev.path.jumps;
    return ev;
}

LevelEvaluation evaluate_dungeon(const Level& level, const TraverseOptions& opts) {
    const auto g = build_move_graph(level, opts);
    const NodeId entrance = *g.entrance();
    const NodeId exit = *g.exit();
    const auto from_entrance = shortest_path_tree(g, entrance);

    // Chest: nearest reachable from the entrance; otherwise the first
    // standable chest reachable from the exit.
    std::optional<NodeId> chest;
    for (std::size_t v = 0; v < g.size(); ++v) {
        const Vec3 p = g.position(static_cast<NodeId>(v));
        if (!level.dims().contains(p) || level.at(p) != Tile::kChest || !from_entrance.reached(static_cast<NodeId>(v))) {
            continue;
        }
        if (!chest || from_entrance.dist[v] < from_entrance.dist[static_cast<std::size_t>(*chest)]) {
            chest = static_cast<NodeId>(v);
        }
    }
    std::optional<ShortestPathTree> from_exit;
    if (!chest) {
        from_exit = shortest_path_tree(g, exit);
        for (std::size_t v = 0; v < g.size() && !chest; ++v) {
            const Vec3 p = g.position(static_cast<NodeId>(v));
            if (level.dims().contains(p) && level.at(p) == Tile::kChest && from_exit->reached(static_cast<NodeId>(v))) {
                chest = static_cast<NodeId>(v);
            }
        }
    }

    std::optional<PathReport> to_chest;
    std::optional<PathReport> to_exit;
    if (chest) {
        if (from_entrance.reached(*chest)) to_chest = extract_path(g, from_entrance, *chest);
        to_exit = shortest_path(g, *chest, exit);
    }

    LevelEvaluation ev;
    auto& v = ev.metrics.values;
    v[Metric::kNChests] = level.count(Tile::kChest);
    v[Metric::kNEnemies] = level.count(Tile::kEnemy);
    v[Metric::kPathLength] = (to_chest ? to_chest->length : 0) + (to_exit ? to_exit->length : 0);
    v[Metric::kNJumps] = (to_chest ? to_chest->jumps : 0) + (to_exit ? to_exit->jumps : 0);
    const auto enemy = nearest_enemy_distance(level, g, entrance);
    ev.metrics.enemy_status = enemy.status;
    v[Metric::kNearestEnemy] = enemy.length.value_or(0);
    ev.metrics.connected = to_chest.has_value() && to_exit.has_value();
    if (ev.metrics.connected) {
        auto moves = to_chest->moves;
        moves.insert(moves.end(), to_exit->moves.begin(), to_exit->moves.end());
        ev.path = make_path_report(to_chest->start, std::move(moves));
    }
    return ev;
}

}  // namespace

LevelEvaluation evaluate_level(const Level& level, const TaskSpec& task, const TraverseOptions& opts) {
    if (task.has_doors() && !level.doors()) {
        throw std::invalid_argument(fmt::format("task {} needs a level with doors", task_name(task.task)));
    }
    if (task.task != TaskKind::kDungeon && (level.count(Tile::kChest) > 0 || level.count(Tile::kEnemy) > 0)) {
        throw std::invalid_argument("chest and enemy tiles only appear in dungeon levels");
    }
    LevelEvaluation ev;
    switch (task.task) {
        case TaskKind::kDiameter: ev = evaluate_diameter(level, opts); break;
        case TaskKind::kDoors: ev = evaluate_doors(level, opts); break;
        case TaskKind::kDungeon: ev = evaluate_dungeon(level, opts); break;
    }
    // Keep exactly the task's metric names.
    std::map<Metric, double> kept;
    for (const auto& m : task.metrics) {
        const auto it = ev.metrics.values.find(m.metric);
        if (it == ev.metrics.values.end()) {
            throw std::invalid_argument(
                fmt::format("metric {} is not defined for task {}", metric_name(m.metric), task_name(task.task)));
        }
        kept.insert(*it);
    }
    ev.metrics.values = std::move(kept);
    return ev;
}

MetricVector compute_metrics(const Level& level, const TaskSpec& task, const TraverseOptions& opts) {
    return evaluate_level(level, task, opts).metrics;
}

double loss(const MetricVector& metrics, const TaskSpec& task, LossMode mode) {
    double total = 0.0;
    for (const auto& spec : task.metrics) {
        const double m = metrics.at(spec.metric);
        if (spec.target.kind == Target::Kind::kMaximize && mode == LossMode::kSigned) {
            total -= spec.weight * m;
        } else {
            total += spec.weight * spec.target.distance(m);
        }
    }
    return total;
}

double reward(double prev_loss, double new_loss, RewardSign sign) {
    return sign == RewardSign::kLossDecrease ? prev_loss - new_loss : new_loss - prev_loss;
}

TaskSpec sample_targets(const TaskSpec& task, std::uint64_t seed) {
    TaskSpec out = task;
    Rng rng(seed);
    for (Metric c : task.controllable) {
        const auto range = task.target_ranges.find(c);
        if (range == task.target_ranges.end()) {
            throw std::invalid_argument(fmt::format("controllable metric {} has no target range", metric_name(c)));
        }
        MetricSpec* spec = out.find(c);
        if (!spec) throw std::invalid_argument(fmt::format("controllable metric {} not in task", metric_name(c)));
        spec->target = Target::scalar(rng.uniform(range->second.first, range->second.second));
    }
    return out;
}

Json task_to_json(const TaskSpec& task) {
    Json j;
    j["task"] = task_name(task.task);
    Json metrics = Json::array();
    for (const auto& m : task.metrics) {
        Json mj;
        mj["name"] = metric_name(m.metric);
        mj["weight"] = m.weight;
        if (m.target.kind == Target::Kind::kScalar) {
            mj["target"] = m.target.lo;
        } else {
            mj["target"] = m.target.to_string();
        }
        metrics.push_back(std::move(mj));
    }
    j["metrics"] = std::move(metrics);
    Json tiles = Json::array();
    for (Tile t : task.action_tiles) tiles.push_back(tile_name(t));
    j["action_tiles"] = std::move(tiles);
    Json controllable = Json::array();
    for (Metric c : task.controllable) controllable.push_back(metric_name(c));
    j["controllable"] = std::move(controllable);
    Json ranges = Json::object();
    for (const auto& [m, r] : task.target_ranges) ranges[std::string(metric_name(m))] = Json::array({r.first, r.second});
    j["target_ranges"] = std::move(ranges);
    return j;
}

TaskSpec task_from_json(const Json& j) {
    static const std::array<std::string_view, 5> kKeys{"task", "metrics", "action_tiles", "controllable",
                                                       "target_ranges"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
            throw std::invalid_argument(fmt::format("unknown task key '{}'", key));
        }
    }
    TaskSpec t = default_task(task_from_name(j.at("task").get<std::string>()));
    if (j.contains("metrics") && !j["metrics"].is_null()) {
        t.metrics.clear();
        for (const auto& mj : j["metrics"]) {
            MetricSpec m{metric_from_name(mj.at("name").get<std::string>()), mj.at("weight").get<double>(), {}};
            const auto& tg = mj.at("target");
            m.target = tg.is_number() ? Target::scalar(tg.get<double>()) : Target::parse(tg.get<std::string>());
            t.metrics.push_back(m);
        }
    }
    if (j.contains("action_tiles") && !j["action_tiles"].is_null()) {
        t.action_tiles.clear();
        for (const auto& s : j["action_tiles"]) t.action_tiles.push_back(tile_from_name(s.get<std::string>()));
    }
    if (j.contains("controllable")) {
        t.controllable.clear();
        for (const auto& s : j["controllable"]) t.controllable.push_back(metric_from_name(s.get<std::string>()));
    }
    if (j.contains("target_ranges")) {
        for (const auto& [k, v] : j["target_ranges"].items()) {
            if (!v.is_array() || v.size() != 2) throw std::invalid_argument("target range must be [lo,hi]");
            t.target_ranges[metric_from_name(k)] = {v[0].get<double>(), v[1].get<double>()};
        }
    }
    validate_task(t);
    return t;
}

}  // namespace voxpcg
