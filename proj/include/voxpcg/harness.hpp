#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "voxpcg/env.hpp"
#include "voxpcg/level.hpp"
#include "voxpcg/nca.hpp"
#include "voxpcg/tasks.hpp"
#include "voxpcg/traverse.hpp"

namespace voxpcg {

/// Produces a final level from (task, initial level, seed). Must be
/// deterministic per seed and must keep the initial doors.
class Generator {
public:
    virtual ~Generator() = default;
    virtual std::string id() const = 0;
    virtual Level generate(const TaskSpec& task, const Level& initial, std::uint64_t seed) const = 0;
    /// Whether the harness should hand it an empty or a random interior.
    virtual bool wants_random_init() const { return false; }
};

/// Fills the interior with one tile.
class FillGenerator final : public Generator {
public:
    explicit FillGenerator(Tile tile);
    std::string id() const override;
    Level generate(const TaskSpec& task, const Level& initial, std::uint64_t seed) const override;

private:
    Tile tile_;
};

/// One episode of the level-editing process under a fixed policy.
class PolicyGenerator final : public Generator {
public:
    enum class Policy : std::uint8_t { kGreedy, kRandom };
    PolicyGenerator(Policy policy, EnvConfig env);
    std::string id() const override;
    Level generate(const TaskSpec& task, const Level& initial, std::uint64_t seed) const override;

private:
    Policy policy_;
    EnvConfig env_;
};

/// NCA rollout. Ignores the seed and any targets.
class NcaGenerator final : public Generator {
public:
    NcaGenerator(GeneratorParams params, int steps, std::string id = "nca");
    std::string id() const override { return id_; }
    Level generate(const TaskSpec& task, const Level& initial, std::uint64_t seed) const override;
    bool wants_random_init() const override { return true; }

private:
    NcaModel model_;
    int steps_;
    std::string id_;
};

struct GeneratorOptions {
    EnvConfig env{};
    int nca_steps = 50;
};

/// Builtins: "air", "solid", "greedy", "random". Anything else is read as a
/// params file path. Unknown ids throw std::invalid_argument.
std::unique_ptr<Generator> make_generator(std::string_view spec, const GeneratorOptions& options = {});

struct SweepRecord {
    int pair_index = 0;
    Door entrance;
    Door exit;
    bool connected = false;
    /// 0 when disconnected.
    int path_length = 0;
    int n_jumps = 0;
    std::string generator_id;
    std::uint64_t seed = 0;

    friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

/// One episode per valid ordered door pair, starting from an empty
/// interior (or a random one for NCA generators). Pair i runs with seed
/// derive_seed(seed, i). Records come back in pair order.
std::vector<SweepRecord> door_sweep(const Generator& generator, const TaskSpec& task, Dims dims, std::uint64_t seed,
                                    double init_solid_probability = 0.5);

struct CollapsedCell {
    int dx = 0, dy = 0, dz = 0;
    int total = 0;
    int connected = 0;
    /// Mean over connected records; NaN when none.
    double mean_path_length = 0.0;
    /// failed / total; NaN when the group holds no pairs.
    double failure_rate = 0.0;
};

/// Every (|dx|, |dy|, |dz|) of door feet within the dims, dz fastest, then
/// dy, then dx. Groups without pairs are kept with total = 0.
std::vector<CollapsedCell> collapse_symmetric(const std::vector<SweepRecord>& records, Dims dims);

/// Position of a door along the side walls, walking z0 (x ascending), x1
/// (z ascending), z1 (x descending), x0 (z descending).
int circumference_index(const Door& door, Dims dims);
inline int circumference_length(Dims dims) { return 2 * dims.width + 2 * dims.depth; }

struct CircumferenceTables {
    int size = 0;
    /// Row = entrance position, column = exit position, row-major.
    std::vector<int> total;
    std::vector<double> mean_path_length;
    std::vector<double> failure_rate;
};

CircumferenceTables unravel_circumference(const std::vector<SweepRecord>& records, Dims dims);

struct ControlSweepConfig {
    Metric metric = Metric::kDiameter;
    std::vector<double> targets;
    int seeds = 20;
    std::uint64_t seed = 0;
    double init_solid_probability = 0.5;
    Dims dims{};
};

std::vector<double> default_control_targets();

struct ControlRow {
    double target = 0.0;
    double mean = 0.0;
    /// Population standard deviation.
    double std = 0.0;
    int n = 0;
};

struct ControlSweepResult {
    std::vector<ControlRow> rows;
    /// finals[t][s]: level for target t and seed s.
    std::vector<std::vector<Level>> finals;
    std::vector<std::vector<double>> achieved;
};

/// The metric's target is set to each value in turn; seed s is shared by
/// every target.
ControlSweepResult controllability_sweep(const Generator& generator, const TaskSpec& task, const ControlSweepConfig& config);

/// Recomputes the table from final levels alone.
std::vector<ControlRow> recompute_control_rows(const ControlSweepResult& result, const TaskSpec& task,
                                               const ControlSweepConfig& config);

enum class OracleFault : std::uint8_t { kNone, kPerturbEdgeCost };

struct OracleConfig {
    struct Batch {
        Dims dims;
        int count;
    };
    std::vector<Batch> batches{{Dims{5, 5, 5}, 1000}, {Dims{4, 4, 4}, 500}};
    double solid_probability = 0.5;
    /// Fraction of random levels that also get a door pair.
    double door_fraction = 0.5;
    std::uint64_t seed = 0;
    TraverseOptions traverse{};
    OracleFault fault = OracleFault::kNone;
};

struct OracleMismatch {
    Dims dims;
    std::uint64_t seed = 0;
    std::string what;
};

struct OracleReport {
    int levels = 0;
    long pairs = 0;
    std::vector<OracleMismatch> mismatches;
    bool passed() const { return mismatches.empty(); }
};

/// Naive all-pairs distances: adjacency from direct predicate loops, then
/// Floyd-Warshall. Entry [u * n + v], -1 when unreachable. Nodes in the
/// same order as the move graph.
struct NaiveGraph {
    std::vector<Vec3> nodes;
    std::vector<int> dist;
};

NaiveGraph naive_all_pairs(const Level& level, const TraverseOptions& opts = {}, OracleFault fault = OracleFault::kNone);

/// Compares node sets, every pairwise distance, extracted path costs and the
/// diameter. Includes all-AIR and all-SOLID levels for each batch dims.
OracleReport oracle_check(const OracleConfig& config);

struct CalibrationCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Fixed reference cases: empty-cube diameter, single-stair cost and the
/// default metric tables.
std::vector<CalibrationCheck> run_calibration();

// CSV and SVG output. CSV is normative; SVGs are rendered from CSV text only.

std::string door_sweep_csv(const std::vector<SweepRecord>& records);
std::string collapsed_csv(const std::vector<CollapsedCell>& cells);
/// Long format: entrance_pos, exit_pos, total, mean_path_length, failure_rate.
std::string circumference_csv(const CircumferenceTables& tables);
std::string control_csv(const std::vector<ControlRow>& rows);

/// Heatmap of a (row, col, value) CSV: `row_col` and `col_col` are integer
/// columns, `value_col` a number or empty. Viridis-like 5-stop colormap over
/// [min, max]; empty cells are white.
std::string heatmap_svg(const std::string& csv, const std::string& row_col, const std::string& col_col,
                        const std::string& value_col, const std::string& title);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Shortest decimal that round-trips; NaN prints as an empty field.
std::string csv_number(double v);

}  // namespace voxpcg
