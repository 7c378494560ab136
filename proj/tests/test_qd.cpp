#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "generators.hpp"
#include "voxpcg/qd.hpp"

using namespace voxpcg;

namespace {

EvalConfig small_eval() {
    EvalConfig e;
    e.dims = {4, 4, 4};
    e.steps = 10;
    e.seeds = evaluation_seeds(3, 4);
    return e;
}

QdConfig small_qd(int budget) {
    QdConfig q;
    q.eval = small_eval();
    q.eval.seeds.clear();
    q.eval_levels = 4;
    q.hidden = 8;
    q.budget = budget;
    q.init_count = 20;
    q.batch_size = 10;
    q.seed = 5;
    return q;
}

Elite elite(double e, double d, double combined) {
    Elite x;
    x.descriptor = {e, d};
    x.fitness.combined = combined;
    return x;
}

double population_variance(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("combined fitness weights") {
    CHECK(combine_fitness(1.0, 1.0, 1.0) == doctest::Approx(1.11).epsilon(1e-15));
    CHECK(combine_fitness(0.5, 0.0, 0.0) == 0.5);
}

TEST_CASE("identical levels: zero diversity, full reliability") {
    Rng rng(71);
    const Level l = testgen::level(rng, {7, 7, 7}, 0.4, false);
    EvalConfig cfg;
    const auto g = score_levels(std::vector<Level>(10, l), cfg);
    CHECK(g.fitness.diversity == 0.0);
    CHECK(g.fitness.reliability == 1.0);
    CHECK(g.descriptor.emptiness_mean == doctest::Approx(emptiness(l)).epsilon(1e-15));
}

TEST_CASE("levels on the jump target are fully valid") {
    EvalConfig cfg;
    cfg.task.find(Metric::kNJumps)->target = Target::scalar(0);
    const auto g = score_levels(std::vector<Level>(3, Level({7, 7, 7})), cfg);
    CHECK(g.fitness.validity == 1.0);
    CHECK(g.descriptor.diameter_mean == 14.0);
    EvalConfig off;
    const auto h = score_levels(std::vector<Level>(3, Level({7, 7, 7})), off);
    CHECK(h.fitness.validity == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("diversity of two levels seven voxels apart") {
    Level a({7, 7, 7}), b({7, 7, 7});
    for (int i = 0; i < 7; ++i) b.set(i * 49, Tile::kSolid);
    const auto g = score_levels({a, b}, EvalConfig{});
    CHECK(g.fitness.diversity == doctest::Approx(7.0 / 343.0).epsilon(1e-15));
}

TEST_CASE("fitness components agree with a direct computation") {
    Rng rng(72);
    EvalConfig cfg;
    for (int t = 0; t < 10; ++t) {
        std::vector<Level> levels;
        for (int i = 0; i < 6; ++i) levels.push_back(testgen::level(rng, {7, 7, 7}, rng.uniform01(), false));
        const auto g = score_levels(levels, cfg);
        std::vector<double> em, dn;
        double validity = 0.0, pair_sum = 0.0;
        int pairs = 0;
        for (std::size_t i = 0; i < levels.size(); ++i) {
            const auto d = diameter(levels[i]);
            em.push_back(emptiness(levels[i]));
            dn.push_back(d.length / 196.0);
            validity += 1.0 - std::min(1.0, std::abs(d.jumps - 5.0) / 10.0);
            for (std::size_t j = i + 1; j < levels.size(); ++j) {
                pair_sum += hamming_distance(levels[i], levels[j]);
                ++pairs;
            }
        }
        validity /= static_cast<double>(levels.size());
        const double reliability = 1.0 / (1.0 + population_variance(em) + population_variance(dn));
        const double diversity = pair_sum / pairs / 343.0;
        CHECK(g.fitness.validity == doctest::Approx(validity).epsilon(1e-12));
        CHECK(g.fitness.reliability == doctest::Approx(reliability).epsilon(1e-12));
        CHECK(g.fitness.diversity == doctest::Approx(diversity).epsilon(1e-12));
        CHECK(g.fitness.combined == doctest::Approx(validity + 0.1 * reliability + 0.01 * diversity).epsilon(1e-12));
        for (double v : {g.fitness.validity, g.fitness.reliability, g.fitness.diversity}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("archive insert outcomes") {
    Archive a;
    CHECK(a.cell_count() == 400);
    const auto r1 = a.insert(elite(0.5, 50, 0.7));
    CHECK(r1.outcome == InsertOutcome::kNewCell);
    CHECK(r1.improvement == 0.7);
    CHECK(a.insert(elite(0.5, 50, 0.7)).outcome == InsertOutcome::kRejected);
    const auto r3 = a.insert(elite(0.52, 51, 0.8));
    CHECK(r3.outcome == InsertOutcome::kImproved);
    CHECK(r3.improvement == doctest::Approx(0.1));
    CHECK(a.insert(elite(0.5, 50, 0.75)).outcome == InsertOutcome::kRejected);
    CHECK(a.occupancy() == 1);
    CHECK(a.at(r1.cell)->fitness.combined == 0.8);
    CHECK(*a.best_fitness() == 0.8);
}

TEST_CASE("archive binning") {
    Archive a;
    CHECK(a.cell_of({0.0, 0.0}) == CellIndex{0, 0});
    CHECK(a.cell_of({1.0, 196.0}) == CellIndex{19, 19});
    CHECK(a.cell_of({0.5, 98.0}) == CellIndex{10, 10});
    CHECK(a.cell_of({0.0499, 9.79}) == CellIndex{0, 0});
    CHECK(a.cell_of({0.05, 9.8}) == CellIndex{1, 1});
    bool clamped = false;
    CHECK(a.cell_of({0.3, 250.0}, &clamped) == CellIndex{6, 19});
    CHECK(clamped);
    clamped = false;
    a.cell_of({0.3, 100.0}, &clamped);
    CHECK_FALSE(clamped);
    CHECK(a.insert(elite(0.3, 400.0, 0.1)).clamped);
}

TEST_CASE("binning round-trips for random descriptors") {
    Rng rng(73);
    Archive a;
    for (int i = 0; i < 2000; ++i) {
        const BehaviorDescriptor d{rng.uniform01(), rng.uniform(0, 196)};
        const auto c = a.cell_of(d);
        CHECK(c.emptiness == static_cast<int>(d.emptiness_mean * 20));
        CHECK(c.diameter == static_cast<int>(d.diameter_mean / 196.0 * 20));
        const auto r = a.insert(elite(d.emptiness_mean, d.diameter_mean, rng.uniform01()));
        CHECK(r.cell == c);
    }
    for (const Elite* e : a.elites()) CHECK(a.at(a.cell_of(e->descriptor)) == e);
}

TEST_CASE("lexicographic replacement") {
    ArchiveConfig cfg;
    cfg.lexicographic = true;
    const Archive a(cfg);
    FitnessBreakdown x{0.9, 0.1, 0.1, 0.0}, y{0.8, 1.0, 1.0, 5.0};
    CHECK(a.better(x, y));
    CHECK_FALSE(a.better(y, x));
    FitnessBreakdown z{0.9, 0.2, 0.0, 0.0};
    CHECK(a.better(z, x));
    CHECK_FALSE(a.better(x, x));
    const Archive plain;
    CHECK(plain.better(y, x));
}

TEST_CASE("emitter batches and restarts") {
    Archive a;
    CmaMeEmitter em(0.2, 0, 1);
    CHECK_THROWS(em.ask(a));
    Elite seed = elite(0.5, 20, 0.5);
    seed.params.arch = {TaskKind::kDiameter, 32};
    seed.params.theta.assign(2882, 0.0f);
    a.insert(seed);
    const auto batch = em.ask(a);
    CHECK(batch.size() == 27);
    for (const auto& t : batch) CHECK(t.size() == 2882);
    CHECK_FALSE(em.restart_pending());
    std::vector<InsertResult> rejected(27);
    std::vector<FitnessBreakdown> fit(27);
    em.tell(rejected, fit);
    CHECK(em.restart_pending());
    em.ask(a);
    CHECK(em.restarts() == 1);
}

TEST_CASE("tiny sigma Gaussian children reproduce their parents") {
    Rng rng(74);
    EvalConfig cfg = small_eval();
    cfg.dims = {7, 7, 7};
    cfg.steps = 50;
    cfg.seeds = evaluation_seeds(9, 3);
    Archive a;
    for (int i = 0; i < 4; ++i) {
        Elite e;
        e.params = testgen::params(rng, TaskKind::kDiameter, 32, 0.5);
        const auto ev = evaluate_generator(e.params, cfg);
        e.fitness = ev.fitness;
        e.descriptor = ev.descriptor;
        e.id = static_cast<std::uint64_t>(i);
        a.insert(e);
    }
    GaussianEmitter g(1e-6, 6, 2);
    const auto kids = g.ask(a);
    REQUIRE(kids.size() == 6);
    for (std::size_t k = 0; k < kids.size(); ++k) {
        const Elite* parent = nullptr;
        for (const Elite* e : a.elites())
            if (static_cast<std::int64_t>(e->id) == g.parents()[k]) parent = e;
        REQUIRE(parent);
        GeneratorParams child{parent->params.arch, kids[k]};
        const auto ev = evaluate_generator(child, cfg);
        const auto pv = evaluate_generator(parent->params, cfg);
        CHECK(ev.levels == pv.levels);
        CHECK(ev.descriptor == parent->descriptor);
    }
}

TEST_CASE("budget equal to the initialization holds only random elites") {
    QdConfig q = small_qd(20);
    const auto r = run_mapelites(q);
    CHECK(r.evaluations == 20);
    CHECK(r.progress.size() == 1);
    for (const Elite* e : r.archive.elites()) CHECK(e->parent_id == -1);
    q.budget = 10;
    CHECK_THROWS(run_mapelites(q));
}

TEST_CASE("runs are deterministic, monotone and reproducible") {
    for (auto kind : {EmitterKind::kCmaMe, EmitterKind::kGaussian}) {
        QdConfig q = small_qd(85);
        q.emitter = kind;
        const auto a = run_mapelites(q);
        const auto b = run_mapelites(q);
        CHECK(a.evaluations == 85);
        CHECK(a.progress == b.progress);
        const auto ea = a.archive.elites();
        const auto eb = b.archive.elites();
        REQUIRE(ea.size() == eb.size());
        for (std::size_t i = 0; i < ea.size(); ++i) {
            CHECK(ea[i]->params == eb[i]->params);
            CHECK(ea[i]->fitness == eb[i]->fitness);
            CHECK(ea[i]->id == eb[i]->id);
        }
        for (std::size_t i = 1; i < a.progress.size(); ++i) {
            CHECK(a.progress[i].occupancy >= a.progress[i - 1].occupancy);
            CHECK(a.progress[i].best_fitness >= a.progress[i - 1].best_fitness);
        }
        EvalConfig eval = q.eval;
        eval.seeds = evaluation_seeds(q.seed, q.eval_levels);
        for (const Elite* e : ea) {
            const auto ev = evaluate_generator(e->params, eval);
            CHECK(ev.fitness == e->fitness);
            CHECK(ev.descriptor == e->descriptor);
            CHECK(a.archive.at(a.archive.cell_of(ev.descriptor)) == e);
        }
    }
}

TEST_CASE("saved archives list every elite") {
    const QdConfig q = small_qd(40);
    const auto r = run_mapelites(q);
    const auto dir = std::filesystem::temp_directory_path() / "voxpcg_test_qd";
    std::filesystem::remove_all(dir);
    save_archive(dir, r, q);
    std::ifstream is(dir / "archive.csv");
    std::string line;
    int rows = -1;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == r.archive.occupancy());
    for (const char* f : {"progress.csv", "heatmap_fitness.csv", "heatmap_diversity.csv", "heatmap_occupancy.csv",
                          "heatmap_fitness.svg"}) {
        CHECK(std::filesystem::exists(dir / f));
    }
    for (const Elite* e : r.archive.elites()) {
        const auto c = r.archive.cell_of(e->descriptor);
        const auto bin = dir / "elites" / fmt::format("elite_{:02}_{:02}.bin", c.emptiness, c.diameter);
        REQUIRE(std::filesystem::exists(bin));
        CHECK(load_params(bin) == e->params);
    }
    std::filesystem::remove_all(dir);
}
