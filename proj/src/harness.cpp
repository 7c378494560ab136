#include "voxpcg/harness.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "voxpcg/rng.hpp"

namespace voxpcg {

FillGenerator::FillGenerator(Tile tile) : tile_(tile) {
    if (tile == Tile::kBorder) throw std::invalid_argument("cannot fill with BORDER");
}

std::string FillGenerator::id() const { return std::string(tile_name(tile_)); }

Level FillGenerator::generate(const TaskSpec&, const Level& initial, std::uint64_t) const {
    Level out = initial;
    out.fill(tile_);
    return out;
}

PolicyGenerator::PolicyGenerator(Policy policy, EnvConfig env) : policy_(policy), env_(env) {}

std::string PolicyGenerator::id() const { return policy_ == Policy::kGreedy ? "greedy" : "random"; }

Level PolicyGenerator::generate(const TaskSpec& task, const Level& initial, std::uint64_t seed) const {
    EnvConfig cfg = env_;
    cfg.dims = initial.dims();
    const Environment env(task, cfg);
    auto [state, obs] = env.reset_from(initial, task, seed);
    Rng rng(derive_seed(seed, 2));
    while (!state.done()) {
        const int a = policy_ == Policy::kGreedy ? greedy_policy(env, state) : random_policy(env, rng);
        env.step(state, a);
    }
    return state.level;
}

NcaGenerator::NcaGenerator(GeneratorParams params, int steps, std::string id)
    : model_(params), steps_(steps), id_(std::move(id)) {
    if (steps < 0) throw std::invalid_argument("NCA steps must be >= 0");
}

Level NcaGenerator::generate(const TaskSpec& task, const Level& initial, std::uint64_t) const {
    if (task.task != model_.arch().task) throw std::invalid_argument("NCA params were evolved for a different task");
    return rollout(model_, initial, steps_);
}

std::unique_ptr<Generator> make_generator(std::string_view spec, const GeneratorOptions& options) {
    if (spec == "air") return std::make_unique<FillGenerator>(Tile::kAir);
    if (spec == "solid") return std::make_unique<FillGenerator>(Tile::kSolid);
    if (spec == "greedy") return std::make_unique<PolicyGenerator>(PolicyGenerator::Policy::kGreedy, options.env);
    if (spec == "random") return std::make_unique<PolicyGenerator>(PolicyGenerator::Policy::kRandom, options.env);
    const std::filesystem::path path(spec);
    std::error_code ec;
    if (spec.empty() || !std::filesystem::is_regular_file(path, ec)) {
        throw std::invalid_argument(fmt::format("unknown generator '{}' (builtins: air, solid, greedy, random; or a params file)", spec));
    }
    return std::make_unique<NcaGenerator>(load_params(path), options.nca_steps, path.filename().string());
}

namespace {

Level sweep_initial(const Generator& g, Dims dims, std::uint64_t seed, double p) {
    return g.wants_random_init() ? new_level(dims, InitSpec::uniform(p, derive_seed(seed, 0))) : Level(dims);
}

}  // namespace

std::vector<SweepRecord> door_sweep(const Generator& generator, const TaskSpec& task, Dims dims, std::uint64_t seed,
                                    double init_solid_probability) {
    if (!task.has_doors()) throw std::invalid_argument("door sweep needs a task with doors");
    const auto pairs = valid_door_pairs(dims);
    std::vector<SweepRecord> records(pairs.size());
    const std::string gid = generator.id();
    const auto n = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& [entrance, exit] = pairs[static_cast<std::size_t>(i)];
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
        Level initial = sweep_initial(generator, dims, s, init_solid_probability);
        initial.set_doors(entrance, exit);
        const Level final_level = generator.generate(task, initial, s);
        const auto m = compute_metrics(final_level, task);
        auto& r = records[static_cast<std::size_t>(i)];
        r.pair_index = static_cast<int>(i);
        r.entrance = entrance;
        r.exit = exit;
        r.connected = m.connected;
        r.path_length = m.connected ? static_cast<int>(m.at(Metric::kPathLength)) : 0;
        r.n_jumps = static_cast<int>(m.at(Metric::kNJumps));
        r.generator_id = gid;
        r.seed = s;
    }
    return records;
}

std::vector<CollapsedCell> collapse_symmetric(const std::vector<SweepRecord>& records, Dims dims) {
    const int nx = dims.width, ny = dims.height - 1, nz = dims.depth;
    std::vector<CollapsedCell> cells(static_cast<std::size_t>(nx * ny * nz));
    std::vector<double> sum(cells.size(), 0.0);
    auto slot = [&](int dx, int dy, int dz) { return static_cast<std::size_t>((dx * ny + dy) * nz + dz); };
    for (int dx = 0; dx < nx; ++dx)
        for (int dy = 0; dy < ny; ++dy)
            for (int dz = 0; dz < nz; ++dz) {
                auto& c = cells[slot(dx, dy, dz)];
                c.dx = dx;
                c.dy = dy;
                c.dz = dz;
            }
    for (const auto& r : records) {
        const Vec3 d = r.entrance.foot - r.exit.foot;
        const int dx = std::abs(d.x), dy = std::abs(d.y), dz = std::abs(d.z);
        if (dx >= nx || dy >= ny || dz >= nz) throw std::invalid_argument("sweep record does not fit the dims");
        auto& c = cells[slot(dx, dy, dz)];
        ++c.total;
        if (r.connected) {
            ++c.connected;
            sum[slot(dx, dy, dz)] += r.path_length;
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        auto& c = cells[i];
        c.mean_path_length = c.connected > 0 ? sum[i] / c.connected : nan;
        c.failure_rate = c.total > 0 ? static_cast<double>(c.total - c.connected) / c.total : nan;
    }
    return cells;
}

int circumference_index(const Door& door, Dims dims) {
    const Vec3 f = door.foot;
    switch (door.wall) {
        case Wall::kZ0: return f.x;
        case Wall::kX1: return dims.width + f.z;
        case Wall::kZ1: return dims.width + dims.depth + (dims.width - 1 - f.x);
        case Wall::kX0: return 2 * dims.width + dims.depth + (dims.depth - 1 - f.z);
    }
    throw std::invalid_argument("bad wall");
}

CircumferenceTables unravel_circumference(const std::vector<SweepRecord>& records, Dims dims) {
    CircumferenceTables t;
    t.size = circumference_length(dims);
    const auto cells = static_cast<std::size_t>(t.size * t.size);
    t.total.assign(cells, 0);
    std::vector<int> connected(cells, 0);
    std::vector<double> sum(cells, 0.0);
    for (const auto& r : records) {
        const auto i = static_cast<std::size_t>(circumference_index(r.entrance, dims) * t.size +
                                                circumference_index(r.exit, dims));
        ++t.total[i];
        if (r.connected) {
            ++connected[i];
            sum[i] += r.path_length;
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    t.mean_path_length.assign(cells, nan);
    t.failure_rate.assign(cells, nan);
    for (std::size_t i = 0; i < cells; ++i) {
        if (connected[i] > 0) t.mean_path_length[i] = sum[i] / connected[i];
        if (t.total[i] > 0) t.failure_rate[i] = static_cast<double>(t.total[i] - connected[i]) / t.total[i];
    }
    return t;
}

std::vector<double> default_control_targets() {
    std::vector<double> t;
    for (int v = 0; v <= 50; v += 5) t.push_back(v);
    return t;
}

namespace {

ControlRow summarize(double target, const std::vector<double>& xs) {
    ControlRow row;
    row.target = target;
    row.n = static_cast<int>(xs.size());
    if (xs.empty()) return row;
    double s = 0.0;
    for (double x : xs) s += x;
    row.mean = s / row.n;
    double v = 0.0;
    for (double x : xs) v += (x - row.mean) * (x - row.mean);
    row.std = std::sqrt(v / row.n);
    return row;
}

TaskSpec with_target(const TaskSpec& task, Metric metric, double target) {
    TaskSpec t = task;
    MetricSpec* m = t.find(metric);
    if (m == nullptr) throw std::invalid_argument(fmt::format("task has no metric {}", metric_name(metric)));
    m->target = Target::scalar(target);
    return t;
}

}  // namespace

ControlSweepResult controllability_sweep(const Generator& generator, const TaskSpec& task, const ControlSweepConfig& config) {
    if (config.seeds < 1) throw std::invalid_argument("control sweep needs at least one seed");
    if (task.find(config.metric) == nullptr) {
        throw std::invalid_argument(fmt::format("task has no metric {}", metric_name(config.metric)));
    }
    const auto nt = config.targets.size();
    const auto ns = static_cast<std::size_t>(config.seeds);
    ControlSweepResult res;
    res.finals.assign(nt, std::vector<Level>(ns, Level(config.dims)));
    res.achieved.assign(nt, std::vector<double>(ns, 0.0));
    const auto jobs = static_cast<std::int64_t>(nt * ns);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t j = 0; j < jobs; ++j) {
        const auto ti = static_cast<std::size_t>(j) / ns, si = static_cast<std::size_t>(j) % ns;
        const TaskSpec resolved = with_target(task, config.metric, config.targets[ti]);
        const std::uint64_t s = derive_seed(config.seed, si);
        Level initial = sweep_initial(generator, config.dims, s, config.init_solid_probability);
        if (task.has_doors()) {
            const auto [entrance, exit] = sample_door_pair(config.dims, derive_seed(s, 1));
            initial.set_doors(entrance, exit);
        }
        Level final_level = generator.generate(resolved, initial, s);
        res.achieved[ti][si] = compute_metrics(final_level, resolved).at(config.metric);
        res.finals[ti][si] = std::move(final_level);
    }
    for (std::size_t ti = 0; ti < nt; ++ti) res.rows.push_back(summarize(config.targets[ti], res.achieved[ti]));
    return res;
}

std::vector<ControlRow> recompute_control_rows(const ControlSweepResult& result, const TaskSpec& task,
                                               const ControlSweepConfig& config) {
    std::vector<ControlRow> rows;
    for (std::size_t ti = 0; ti < result.finals.size(); ++ti) {
        const TaskSpec resolved = with_target(task, config.metric, config.targets[ti]);
        std::vector<double> xs;
        for (const auto& level : result.finals[ti]) xs.push_back(compute_metrics(level, resolved).at(config.metric));
        rows.push_back(summarize(config.targets[ti], xs));
    }
    return rows;
}

}  // namespace voxpcg
