#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "voxpcg/level.hpp"
#include "voxpcg/level_json.hpp"
#include "voxpcg/traverse.hpp"

namespace voxpcg {

enum class TaskKind : std::uint8_t { kDiameter = 0, kDoors, kDungeon };

std::string_view task_name(TaskKind t);
TaskKind task_from_name(std::string_view name);

enum class Metric : std::uint8_t { kNJumps = 0, kDiameter, kPathLength, kNChests, kNEnemies, kNearestEnemy };

std::string_view metric_name(Metric m);
Metric metric_from_name(std::string_view name);

struct Target {
    enum class Kind : std::uint8_t { kScalar, kInterval, kMaximize };
    Kind kind = Kind::kMaximize;
    double lo = 0.0;
    double hi = 0.0;

    static Target scalar(double v) { return {Kind::kScalar, v, v}; }
    static Target interval(double lo, double hi);
    static Target maximize() { return {}; }

    /// |g - m| for scalars; distance to the nearest endpoint (0 inside) for
    /// intervals. For MAXIMIZE this is m minus the metric minimum (0).
    double distance(double m) const;

    /// "5", "[2,5]", "[5,inf]", "max".
    std::string to_string() const;
    static Target parse(std::string_view text);

    friend bool operator==(const Target&, const Target&) = default;
};

struct MetricSpec {
    Metric metric;
    double weight;
    Target target;

    friend bool operator==(const MetricSpec&, const MetricSpec&) = default;
};

struct TaskSpec {
    TaskKind task = TaskKind::kDiameter;
    std::vector<MetricSpec> metrics;
    std::vector<Tile> action_tiles;
    /// Metrics whose target is resampled per episode.
    std::vector<Metric> controllable;
    /// Sampling range per controllable metric.
    std::map<Metric, std::pair<double, double>> target_ranges;

    bool has_doors() const { return task != TaskKind::kDiameter; }
    const MetricSpec* find(Metric m) const;
    MetricSpec* find(Metric m);

    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

/// Metric tables, tile sets and default target ranges for the three tasks.
TaskSpec default_task(TaskKind kind);

/// Validates weights > 0, interval ordering, tiles and controllables.
void validate_task(const TaskSpec& task);

struct MetricVector {
    std::map<Metric, double> values;
    /// DOORS: entrance reaches exit. DUNGEON: entrance -> chest -> exit
    /// exists. Always true for DIAMETER.
    bool connected = true;
    EnemyStatus enemy_status = EnemyStatus::kNoEnemies;

    double at(Metric m) const;
    friend bool operator==(const MetricVector&, const MetricVector&) = default;
};

/// Metrics plus the path the observation encoder marks.
struct LevelEvaluation {
    MetricVector metrics;
    PathReport path;
};

LevelEvaluation evaluate_level(const Level& level, const TaskSpec& task, const TraverseOptions& opts = {});
MetricVector compute_metrics(const Level& level, const TaskSpec& task, const TraverseOptions& opts = {});

enum class LossMode : std::uint8_t {
    /// MAXIMIZE terms enter as -w*m so growth lowers the loss.
    kSigned,
    /// Literal sum of w*|g_hat - m| with g_hat = 0 for MAXIMIZE.
    kDistanceOnly,
};

enum class RewardSign : std::uint8_t {
    /// prev - new: positive when the loss falls.
    kLossDecrease,
    /// new - prev.
    kLiteral,
};

double loss(const MetricVector& metrics, const TaskSpec& task, LossMode mode = LossMode::kSigned);
double reward(double prev_loss, double new_loss, RewardSign sign = RewardSign::kLossDecrease);

/// Replaces each controllable metric's target with SCALAR(u), u uniform
/// over its configured range.
TaskSpec sample_targets(const TaskSpec& task, std::uint64_t seed);

Json task_to_json(const TaskSpec& task);
TaskSpec task_from_json(const Json& j);

}  // namespace voxpcg
