#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "voxpcg/cma.hpp"
#include "voxpcg/level.hpp"
#include "voxpcg/nca.hpp"
#include "voxpcg/rng.hpp"
#include "voxpcg/tasks.hpp"
#include "voxpcg/traverse.hpp"

namespace voxpcg {

struct BehaviorDescriptor {
    double emptiness_mean = 0.0;
    double diameter_mean = 0.0;
    friend bool operator==(const BehaviorDescriptor&, const BehaviorDescriptor&) = default;
};

/// Components are each in [0, 1]; combined = validity + 0.1 reliability +
/// 0.01 diversity.
struct FitnessBreakdown {
    double validity = 0.0;
    double reliability = 0.0;
    double diversity = 0.0;
    double combined = 0.0;
    friend bool operator==(const FitnessBreakdown&, const FitnessBreakdown&) = default;
};

double combine_fitness(double validity, double reliability, double diversity);

struct EvalConfig {
    TaskSpec task = default_task(TaskKind::kDiameter);
    Dims dims{};
    int steps = 50;
    double init_solid_probability = 0.5;
    double jump_norm = 10.0;
    double d_max = 196.0;
    /// One initial level per seed, shared by every candidate.
    std::vector<std::uint64_t> seeds;
    TraverseOptions traverse{};
};

/// Default evaluation seeds for a run seed.
std::vector<std::uint64_t> evaluation_seeds(std::uint64_t run_seed, int count = 10);

/// UNIFORM_RANDOM(p) interiors, one per seed; door tasks get a sampled
/// door pair per seed.
std::vector<Level> initial_levels(const EvalConfig& config);

struct GeneratorEvaluation {
    FitnessBreakdown fitness;
    BehaviorDescriptor descriptor;
    std::vector<Level> levels;
};

/// Fitness and descriptor of a batch of final levels.
GeneratorEvaluation score_levels(std::vector<Level> finals, const EvalConfig& config);

/// Rolls the generator out on every initial level and scores the results.
GeneratorEvaluation evaluate_generator(const GeneratorParams& params, const EvalConfig& config,
                                       const std::vector<Level>& initial);
GeneratorEvaluation evaluate_generator(const GeneratorParams& params, const EvalConfig& config);

struct ArchiveConfig {
    int bins_emptiness = 20;
    int bins_diameter = 20;
    double d_max = 196.0;
    /// Replace by (validity, reliability, diversity) order instead of the
    /// combined score.
    bool lexicographic = false;
};

struct CellIndex {
    int emptiness = 0;
    int diameter = 0;
    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

struct Elite {
    GeneratorParams params;
    FitnessBreakdown fitness;
    BehaviorDescriptor descriptor;
    std::uint64_t id = 0;
    std::int64_t parent_id = -1;
};

enum class InsertOutcome : std::uint8_t { kNewCell, kImproved, kRejected };

std::string_view insert_outcome_name(InsertOutcome o);

struct InsertResult {
    InsertOutcome outcome = InsertOutcome::kRejected;
    CellIndex cell;
    /// Candidate fitness minus incumbent fitness (candidate fitness for a
    /// new cell).
    double improvement = 0.0;
    bool clamped = false;
};

/// MAP-Elites grid over (emptiness, diameter).
class Archive {
public:
    explicit Archive(ArchiveConfig config = {});

    const ArchiveConfig& config() const { return config_; }

    /// floor binning; the top edge maps to the last bin. Values outside the
    /// axis range clamp and set *clamped.
    CellIndex cell_of(const BehaviorDescriptor& d, bool* clamped = nullptr) const;

    InsertResult insert(Elite elite);

    const Elite* at(CellIndex c) const;
    int occupancy() const { return occupancy_; }
    std::size_t cell_count() const { return cells_.size(); }
    /// Occupied cells in (emptiness, diameter) row-major order.
    std::vector<const Elite*> elites() const;
    const Elite& random_elite(Rng& rng) const;
    std::optional<double> best_fitness() const;

    /// True when `a` should replace `b`.
    bool better(const FitnessBreakdown& a, const FitnessBreakdown& b) const;

private:
    std::size_t flat(CellIndex c) const {
        return static_cast<std::size_t>(c.emptiness) * static_cast<std::size_t>(config_.bins_diameter) +
               static_cast<std::size_t>(c.diameter);
    }

    ArchiveConfig config_;
    std::vector<std::optional<Elite>> cells_;
    int occupancy_ = 0;
};

/// CMA-ME improvement emitter. Candidates are ranked new cells first (by
/// fitness), then improvements (by gain), then rejections; restarts from a
/// random elite after a generation with no insertions or a degenerate
/// covariance.
class CmaMeEmitter {
public:
    CmaMeEmitter(double sigma0, int lambda, std::uint64_t seed);

    /// Throws when the archive is empty.
    std::vector<std::vector<float>> ask(const Archive& archive);
    void tell(const std::vector<InsertResult>& results, const std::vector<FitnessBreakdown>& fitness);

    int batch_size(int dimension) const;
    int restarts() const { return restarts_; }
    bool restart_pending() const { return restart_pending_; }
    std::int64_t parent_id() const { return parent_id_; }
    const CmaEs* strategy() const { return es_ ? &*es_ : nullptr; }

private:
    double sigma0_;
    int lambda_;
    Rng rng_;
    std::optional<CmaEs> es_;
    bool restart_pending_ = true;
    int restarts_ = 0;
    std::int64_t parent_id_ = -1;
};

/// Isotropic Gaussian mutation of random elites.
class GaussianEmitter {
public:
    GaussianEmitter(double sigma, int batch, std::uint64_t seed);
    std::vector<std::vector<float>> ask(const Archive& archive);
    const std::vector<std::int64_t>& parents() const { return parents_; }

private:
    double sigma_;
    int batch_;
    Rng rng_;
    std::vector<std::int64_t> parents_;
};

enum class EmitterKind : std::uint8_t { kCmaMe, kGaussian };

std::string_view emitter_name(EmitterKind e);
EmitterKind emitter_from_name(std::string_view name);

struct QdConfig {
    EvalConfig eval{};
    ArchiveConfig archive{};
    EmitterKind emitter = EmitterKind::kCmaMe;
    int hidden = 32;
    int budget = 10000;
    int init_count = 100;
    double init_sigma = 0.5;
    double sigma0 = 0.2;
    double gaussian_sigma = 0.1;
    /// 0 selects the CMA default lambda = 4 + floor(3 ln n).
    int batch_size = 0;
    int emitters = 1;
    int eval_levels = 10;
    std::uint64_t seed = 0;
};

struct QdProgress {
    int evaluations = 0;
    int occupancy = 0;
    double best_fitness = 0.0;
    int restarts = 0;
    friend bool operator==(const QdProgress&, const QdProgress&) = default;
};

struct QdResult {
    Archive archive;
    std::vector<QdProgress> progress;
    int evaluations = 0;
};

/// Random-theta initialization, then emitter batches until the budget is
/// spent. Batches are evaluated in parallel and inserted in ask order.
QdResult run_mapelites(const QdConfig& config, const std::function<void(const QdProgress&)>& on_progress = {});

/// archive.csv, elites/*.bin(+.json), heatmap_{fitness,diversity,occupancy}
/// .csv/.svg and progress.csv.
void save_archive(const std::filesystem::path& dir, const QdResult& result, const QdConfig& config);

}  // namespace voxpcg
