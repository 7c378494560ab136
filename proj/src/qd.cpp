#include "voxpcg/qd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace voxpcg {

double combine_fitness(double validity, double reliability, double diversity) {
    return validity + 0.1 * reliability + 0.01 * diversity;
}

std::vector<std::uint64_t> evaluation_seeds(std::uint64_t run_seed, int count) {
    if (count < 1) throw std::invalid_argument("evaluation needs at least one level");
    const std::uint64_t base = derive_seed(run_seed, 0x6576616cull);
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < count; ++i) seeds.push_back(derive_seed(base, static_cast<std::uint64_t>(i)));
    return seeds;
}

std::vector<Level> initial_levels(const EvalConfig& config) {
    if (config.seeds.empty()) throw std::invalid_argument("evaluation config has no seeds");
    std::vector<Level> levels;
    levels.reserve(config.seeds.size());
    for (const auto seed : config.seeds) {
        Level level = new_level(config.dims, InitSpec::uniform(config.init_solid_probability, derive_seed(seed, 0)));
        if (config.task.has_doors()) {
            const auto [entrance, exit] = sample_door_pair(config.dims, derive_seed(seed, 1));
            level.set_doors(entrance, exit);
        }
        levels.push_back(std::move(level));
    }
    return levels;
}

namespace {

double population_variance(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(v.size());
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

GeneratorEvaluation score_levels(std::vector<Level> finals, const EvalConfig& config) {
    if (finals.empty()) throw std::invalid_argument("cannot score an empty batch");
    if (!(config.jump_norm > 0.0) || !(config.d_max > 0.0)) {
        throw std::invalid_argument("jump_norm and d_max must be > 0");
    }
    const MetricSpec* jumps = config.task.find(Metric::kNJumps);
    std::vector<double> empt, diam, valid;
    for (const auto& level : finals) {
        const auto ev = evaluate_level(level, config.task, config.traverse);
        const double d = config.task.find(Metric::kDiameter) != nullptr
                             ? ev.metrics.at(Metric::kDiameter)
                             : static_cast<double>(diameter(level, config.traverse).length);
        empt.push_back(emptiness(level));
        diam.push_back(d);
        if (jumps != nullptr) {
            const double miss = jumps->target.distance(ev.metrics.at(Metric::kNJumps));
            valid.push_back(1.0 - std::min(1.0, miss / config.jump_norm));
        } else {
            valid.push_back(1.0);
        }
    }
    std::vector<double> diam_norm;
    for (double d : diam) diam_norm.push_back(d / config.d_max);

    double hamming = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < finals.size(); ++i) {
        for (std::size_t j = i + 1; j < finals.size(); ++j) {
            hamming += hamming_distance(finals[i], finals[j]);
            ++pairs;
        }
    }

    GeneratorEvaluation out;
    out.fitness.validity = mean_of(valid);
    out.fitness.reliability = 1.0 / (1.0 + population_variance(empt) + population_variance(diam_norm));
    out.fitness.diversity = pairs > 0 ? hamming / pairs / finals.front().volume() : 0.0;
    out.fitness.combined = combine_fitness(out.fitness.validity, out.fitness.reliability, out.fitness.diversity);
    out.descriptor = {mean_of(empt), mean_of(diam)};
    out.levels = std::move(finals);
    return out;
}

GeneratorEvaluation evaluate_generator(const GeneratorParams& params, const EvalConfig& config,
                                       const std::vector<Level>& initial) {
    if (params.arch.task != config.task.task) throw std::invalid_argument("generator and task disagree");
    const NcaModel model(params);
    std::vector<Level> finals;
    finals.reserve(initial.size());
    for (const auto& level : initial) finals.push_back(rollout(model, level, config.steps));
    return score_levels(std::move(finals), config);
}

GeneratorEvaluation evaluate_generator(const GeneratorParams& params, const EvalConfig& config) {
    return evaluate_generator(params, config, initial_levels(config));
}

std::string_view insert_outcome_name(InsertOutcome o) {
    switch (o) {
        case InsertOutcome::kNewCell: return "new_cell";
        case InsertOutcome::kImproved: return "improved";
        case InsertOutcome::kRejected: return "rejected";
    }
    return "?";
}

Archive::Archive(ArchiveConfig config) : config_(config) {
    if (config_.bins_emptiness < 1 || config_.bins_diameter < 1) throw std::invalid_argument("archive needs >= 1 bin per axis");
    if (!(config_.d_max > 0.0)) throw std::invalid_argument("archive d_max must be > 0");
    cells_.resize(static_cast<std::size_t>(config_.bins_emptiness) * static_cast<std::size_t>(config_.bins_diameter));
}

namespace {

int bin(double value, double hi, int bins, bool& clamped) {
    if (!(value >= 0.0)) {
        clamped = true;
        return 0;
    }
    if (value > hi) {
        clamped = true;
        return bins - 1;
    }
    return std::min(bins - 1, static_cast<int>(std::floor(value / hi * bins)));
}

}  // namespace

CellIndex Archive::cell_of(const BehaviorDescriptor& d, bool* clamped) const {
    bool c = false;
    CellIndex idx{bin(d.emptiness_mean, 1.0, config_.bins_emptiness, c), bin(d.diameter_mean, config_.d_max, config_.bins_diameter, c)};
    if (clamped != nullptr) *clamped = c;
    return idx;
}

bool Archive::better(const FitnessBreakdown& a, const FitnessBreakdown& b) const {
    if (config_.lexicographic) {
        return std::tie(a.validity, a.reliability, a.diversity) > std::tie(b.validity, b.reliability, b.diversity);
    }
    return a.combined > b.combined;
}

InsertResult Archive::insert(Elite elite) {
    InsertResult r;
    r.cell = cell_of(elite.descriptor, &r.clamped);
    if (r.clamped) {
        spdlog::warn("descriptor (emptiness {}, diameter {}) lies outside the archive bounds; clamped to cell ({}, {})",
                     elite.descriptor.emptiness_mean, elite.descriptor.diameter_mean, r.cell.emptiness, r.cell.diameter);
    }
    auto& slot = cells_[flat(r.cell)];
    if (!slot) {
        r.outcome = InsertOutcome::kNewCell;
        r.improvement = elite.fitness.combined;
        slot = std::move(elite);
        ++occupancy_;
        return r;
    }
    r.improvement = elite.fitness.combined - slot->fitness.combined;
    if (better(elite.fitness, slot->fitness)) {
        r.outcome = InsertOutcome::kImproved;
        slot = std::move(elite);
    } else {
        r.outcome = InsertOutcome::kRejected;
    }
    return r;
}

const Elite* Archive::at(CellIndex c) const {
    if (c.emptiness < 0 || c.diameter < 0 || c.emptiness >= config_.bins_emptiness || c.diameter >= config_.bins_diameter) {
        throw std::out_of_range("archive cell out of range");
    }
    const auto& slot = cells_[flat(c)];
    return slot ? &*slot : nullptr;
}

std::vector<const Elite*> Archive::elites() const {
    std::vector<const Elite*> out;
    for (const auto& slot : cells_) {
        if (slot) out.push_back(&*slot);
    }
    return out;
}

const Elite& Archive::random_elite(Rng& rng) const {
    const auto all = elites();
    if (all.empty()) throw std::logic_error("archive is empty");
    return *all[rng.below(all.size())];
}

std::optional<double> Archive::best_fitness() const {
    std::optional<double> best;
    for (const auto& slot : cells_) {
        if (slot && (!best || slot->fitness.combined > *best)) best = slot->fitness.combined;
    }
    return best;
}

CmaMeEmitter::CmaMeEmitter(double sigma0, int lambda, std::uint64_t seed) : sigma0_(sigma0), lambda_(lambda), rng_(seed) {
    if (!(sigma0 > 0.0)) throw std::invalid_argument("emitter step size must be > 0");
}

int CmaMeEmitter::batch_size(int dimension) const { return lambda_ > 0 ? lambda_ : CmaEs::default_lambda(dimension); }

std::vector<std::vector<float>> CmaMeEmitter::ask(const Archive& archive) {
    if (restart_pending_) {
        const Elite& start = archive.random_elite(rng_);
        std::vector<double> mean(start.params.theta.begin(), start.params.theta.end());
        const int n = static_cast<int>(mean.size());
        if (es_) ++restarts_;
        es_.emplace(std::move(mean), sigma0_, batch_size(n));
        parent_id_ = static_cast<std::int64_t>(start.id);
        restart_pending_ = false;
    }
    const auto xs = es_->ask(rng_);
    std::vector<std::vector<float>> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.emplace_back(x.begin(), x.end());
    return out;
}

void CmaMeEmitter::tell(const std::vector<InsertResult>& results, const std::vector<FitnessBreakdown>& fitness) {
    if (!es_) throw std::logic_error("emitter tell before ask");
    if (results.size() != static_cast<std::size_t>(es_->lambda()) || fitness.size() != results.size()) {
        throw std::invalid_argument("emitter tell needs one result per asked candidate");
    }
    auto group = [](InsertOutcome o) {
        switch (o) {
            case InsertOutcome::kNewCell: return 0;
            case InsertOutcome::kImproved: return 1;
            case InsertOutcome::kRejected: return 2;
        }
        return 2;
    };
    auto key = [&](std::size_t i) {
        return results[i].outcome == InsertOutcome::kNewCell ? fitness[i].combined : results[i].improvement;
    };
    std::vector<int> ranking(results.size());
    std::iota(ranking.begin(), ranking.end(), 0);
    std::stable_sort(ranking.begin(), ranking.end(), [&](int a, int b) {
        const auto ia = static_cast<std::size_t>(a), ib = static_cast<std::size_t>(b);
        const int ga = group(results[ia].outcome), gb = group(results[ib].outcome);
        if (ga != gb) return ga < gb;
        return key(ia) > key(ib);
    });
    es_->tell(ranking);
    const bool any_insert = std::any_of(results.begin(), results.end(),
                                        [](const InsertResult& r) { return r.outcome != InsertOutcome::kRejected; });
    if (!any_insert || es_->degenerate()) restart_pending_ = true;
}

GaussianEmitter::GaussianEmitter(double sigma, int batch, std::uint64_t seed) : sigma_(sigma), batch_(batch), rng_(seed) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("mutation sigma must be >= 0");
    if (batch < 1) throw std::invalid_argument("mutation batch must be >= 1");
}

std::vector<std::vector<float>> GaussianEmitter::ask(const Archive& archive) {
    std::vector<std::vector<float>> out;
    parents_.clear();
    for (int k = 0; k < batch_; ++k) {
        const Elite& parent = archive.random_elite(rng_);
        std::vector<float> theta = parent.params.theta;
        for (auto& t : theta) t = static_cast<float>(t + sigma_ * rng_.normal());
        out.push_back(std::move(theta));
        parents_.push_back(static_cast<std::int64_t>(parent.id));
    }
    return out;
}

std::string_view emitter_name(EmitterKind e) { return e == EmitterKind::kCmaMe ? "cma_me" : "gaussian"; }

EmitterKind emitter_from_name(std::string_view name) {
    if (name == "cma_me") return EmitterKind::kCmaMe;
    if (name == "gaussian") return EmitterKind::kGaussian;
    throw std::invalid_argument(fmt::format("unknown emitter '{}'", name));
}

namespace {

std::vector<GeneratorEvaluation> evaluate_batch(const std::vector<std::vector<float>>& thetas, const NcaArchitecture& arch,
                                                const EvalConfig& eval, const std::vector<Level>& initial) {
    std::vector<GeneratorEvaluation> out(thetas.size());
    const int n = static_cast<int>(thetas.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < n; ++i) {
        const GeneratorParams p{arch, thetas[static_cast<std::size_t>(i)]};
        out[static_cast<std::size_t>(i)] = evaluate_generator(p, eval, initial);
    }
    return out;
}

}  // namespace

QdResult run_mapelites(const QdConfig& config, const std::function<void(const QdProgress&)>& on_progress) {
    if (config.init_count < 1) throw std::invalid_argument("initialization needs at least one candidate");
    if (config.budget < config.init_count) {
        throw std::invalid_argument(
            fmt::format("budget {} is smaller than the initialization size {}", config.budget, config.init_count));
    }
    if (config.emitters < 1) throw std::invalid_argument("need at least one emitter");
    validate_task(config.eval.task);

    EvalConfig eval = config.eval;
    if (eval.seeds.empty()) eval.seeds = evaluation_seeds(config.seed, config.eval_levels);
    const auto initial = initial_levels(eval);
    const NcaArchitecture arch{eval.task.task, config.hidden};
    const auto dim = static_cast<int>(param_count(arch));

    QdResult result{Archive(config.archive), {}, 0};
    Archive& archive = result.archive;
    std::uint64_t next_id = 0;

    auto insert_batch = [&](const std::vector<std::vector<float>>& thetas, const std::vector<std::int64_t>& parents) {
        const auto evals = evaluate_batch(thetas, arch, eval, initial);
        std::vector<InsertResult> results;
        std::vector<FitnessBreakdown> fitness;
        for (std::size_t i = 0; i < thetas.size(); ++i) {
            const int before = archive.occupancy();
            const CellIndex cell = archive.cell_of(evals[i].descriptor);
            const Elite* incumbent = archive.at(cell);
            const bool had = incumbent != nullptr;
            const FitnessBreakdown old = had ? incumbent->fitness : FitnessBreakdown{};
            Elite e{GeneratorParams{arch, thetas[i]}, evals[i].fitness, evals[i].descriptor, next_id++, parents[i]};
            results.push_back(archive.insert(std::move(e)));
            fitness.push_back(evals[i].fitness);
            const Elite* now = archive.at(cell);
            if (archive.occupancy() < before || now == nullptr ||
                (had && !config.archive.lexicographic && now->fitness.combined < old.combined)) {
                throw std::logic_error("archive monotonicity violated");
            }
        }
        result.evaluations += static_cast<int>(thetas.size());
        return std::pair{std::move(results), std::move(fitness)};
    };

    std::vector<CmaMeEmitter> cma;
    std::vector<GaussianEmitter> gauss;
    auto record = [&] {
        QdProgress p;
        p.evaluations = result.evaluations;
        p.occupancy = archive.occupancy();
        p.best_fitness = archive.best_fitness().value_or(0.0);
        for (const auto& e : cma) p.restarts += e.restarts();
        result.progress.push_back(p);
        if (on_progress) on_progress(p);
    };

    {
        Rng init_rng(derive_seed(config.seed, 1));
        std::vector<std::vector<float>> thetas(static_cast<std::size_t>(config.init_count));
        for (auto& t : thetas) {
            t.resize(static_cast<std::size_t>(dim));
            for (auto& v : t) v = static_cast<float>(init_rng.normal(0.0, config.init_sigma));
        }
        insert_batch(thetas, std::vector<std::int64_t>(thetas.size(), -1));
        record();
    }

    const int batch = config.batch_size > 0 ? config.batch_size : CmaEs::default_lambda(dim);
    for (int e = 0; e < config.emitters; ++e) {
        const auto s = derive_seed(config.seed, 100 + static_cast<std::uint64_t>(e));
        if (config.emitter == EmitterKind::kCmaMe) {
            cma.emplace_back(config.sigma0, batch, s);
        } else {
            gauss.emplace_back(config.gaussian_sigma, batch, s);
        }
    }

    for (std::size_t turn = 0; result.evaluations < config.budget; ++turn) {
        const int remaining = config.budget - result.evaluations;
        if (config.emitter == EmitterKind::kCmaMe) {
            auto& em = cma[turn % cma.size()];
            auto thetas = em.ask(archive);
            const bool partial = static_cast<int>(thetas.size()) > remaining;
            if (partial) thetas.resize(static_cast<std::size_t>(remaining));
            auto [results, fitness] = insert_batch(thetas, std::vector<std::int64_t>(thetas.size(), em.parent_id()));
            if (!partial) em.tell(results, fitness);
        } else {
            auto& em = gauss[turn % gauss.size()];
            auto thetas = em.ask(archive);
            auto parents = em.parents();
            if (static_cast<int>(thetas.size()) > remaining) {
                thetas.resize(static_cast<std::size_t>(remaining));
                parents.resize(thetas.size());
            }
            insert_batch(thetas, parents);
        }
        record();
    }
    return result;
}

}  // namespace voxpcg
