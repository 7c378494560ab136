#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "voxpcg/level.hpp"
#include "voxpcg/level_json.hpp"
#include "voxpcg/rng.hpp"
#include "voxpcg/tasks.hpp"
#include "voxpcg/traverse.hpp"

namespace voxpcg {

/// Raster order of the scan cursor. Named fastest axis first.
enum class ScanOrder : std::uint8_t { kXZY = 0, kXYZ };

std::string_view scan_order_name(ScanOrder s);
ScanOrder scan_order_from_name(std::string_view name);

struct EnvConfig {
    Dims dims{};
    /// Episode length in full passes over the interior.
    int sweeps = 2;
    ScanOrder scan_order = ScanOrder::kXZY;
    LossMode loss_mode = LossMode::kSigned;
    RewardSign reward_sign = RewardSign::kLossDecrease;
    TraverseOptions traverse{};
};

struct EnvState {
    Level level;
    int cursor = 0;
    int step_count = 0;
    int max_steps = 0;
    TaskSpec task;
    double prev_loss = 0.0;
    std::uint64_t episode_seed = 0;
    LevelEvaluation evaluation;

    bool done() const { return step_count >= max_steps; }
};

/// Channels x (2w-1) x (2h-1) x (2d-1), stored channel-major then y, z, x
/// (x fastest). Window centered on the cursor voxel.
struct Observation {
    int channels = 0;
    Dims extent{};
    std::vector<float> data;

    float at(int c, int x, int y, int z) const {
        return data[static_cast<std::size_t>(((c * extent.height + y) * extent.depth + z) * extent.width + x)];
    }
    friend bool operator==(const Observation&, const Observation&) = default;
};

struct StepInfo {
    MetricVector metrics;
    double loss = 0.0;
    bool connected = true;
    /// Doors-style tasks: the required path does not exist.
    bool failure = false;
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

/// Narrow level-editing process: the cursor scans voxels in a fixed raster
/// order and each action writes one tile at the cursor.
class Environment {
public:
    Environment(TaskSpec task, EnvConfig config = {});

    const TaskSpec& task() const { return task_; }
    const EnvConfig& config() const { return config_; }

    /// Empty interior, doors sampled for door tasks, controllable targets
    /// sampled, cursor at 0.
    std::pair<EnvState, Observation> reset(std::uint64_t seed) const;
    /// Starts from a given level and an already-resolved task.
    std::pair<EnvState, Observation> reset_from(Level level, TaskSpec resolved, std::uint64_t seed) const;

    StepResult step(EnvState& state, int action) const;

    Observation encode_observation(const EnvState& state) const;

    Vec3 cursor_position(int cursor) const;
    int channel_count() const;

    double evaluate_loss(const Level& level, const TaskSpec& resolved) const;

private:
    TaskSpec task_;
    EnvConfig config_;
};

/// Lowest-loss tile for the cursor voxel; ties go to AIR, then lowest index.
int greedy_policy(const Environment& env, const EnvState& state);

/// Uniform random action.
int random_policy(const Environment& env, Rng& rng);

struct TraceRecord {
    int cursor = 0;
    int action = 0;
    double reward = 0.0;
    double loss = 0.0;
    MetricVector metrics;
};

Json trace_record_to_json(const TraceRecord& r);

}  // namespace voxpcg
