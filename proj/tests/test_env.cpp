#include <doctest.h>

#include "generators.hpp"
#include "voxpcg/env.hpp"

using namespace voxpcg;

namespace {

bool same_state(const EnvState& a, const EnvState& b) {
    return a.level == b.level && a.cursor == b.cursor && a.step_count == b.step_count && a.task == b.task &&
           a.prev_loss == b.prev_loss && a.episode_seed == b.episode_seed;
}

EnvConfig small_config() {
    EnvConfig c;
    c.dims = {4, 4, 4};
    return c;
}

}  // namespace

TEST_CASE("diameter reset starts from the empty room") {
    const Environment env(default_task(TaskKind::kDiameter));
    const auto [s, obs] = env.reset(1);
    CHECK(s.level == Level({7, 7, 7}));
    CHECK(s.cursor == 0);
    CHECK(s.max_steps == 2 * 343);
    CHECK(s.evaluation.metrics.at(Metric::kDiameter) == 14.0);
    CHECK(s.evaluation.metrics.at(Metric::kNJumps) == 0.0);
    CHECK(s.prev_loss == -9.0);
    CHECK(obs.channels == 4);
}

TEST_CASE("reset is deterministic") {
    for (auto k : {TaskKind::kDiameter, TaskKind::kDoors, TaskKind::kDungeon}) {
        TaskSpec t = default_task(k);
        t.controllable = {Metric::kNJumps};
        const Environment env(t);
        const auto a = env.reset(77);
        const auto b = env.reset(77);
        CHECK(same_state(a.first, b.first));
        CHECK(a.second == b.second);
    }
}

TEST_CASE("door resets always sample valid pairs") {
    const Environment env(default_task(TaskKind::kDoors));
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const auto [state, obs] = env.reset(s);
        REQUIRE(state.level.doors());
        REQUIRE(is_valid_door_pair(state.level.doors()->first, state.level.doors()->second));
    }
}

TEST_CASE("writing the tile already present gives zero reward") {
    const Environment env(default_task(TaskKind::kDiameter));
    auto [s, obs] = env.reset(0);
    const auto r = env.step(s, 0);
    CHECK(r.reward == 0.0);
    CHECK(s.cursor == 1);
    CHECK(s.step_count == 1);
}

TEST_CASE("a corner block lengthens the diameter and is rewarded") {
    const Environment env(default_task(TaskKind::kDiameter));
    auto [s, obs] = env.reset(0);
    const double before = s.prev_loss;
    const auto r = env.step(s, 1);
    CHECK(r.info.metrics.at(Metric::kDiameter) == 16.0);
    CHECK(r.info.loss == before - 2.0);
    CHECK(r.reward == 2.0);
}

TEST_CASE("all-air episode has zero total reward") {
    const Environment env(default_task(TaskKind::kDiameter));
    auto [s, obs] = env.reset(5);
    double total = 0.0;
    int steps = 0;
    while (!s.done()) {
        const auto r = env.step(s, 0);
        total += r.reward;
        ++steps;
        if (r.done) break;
    }
    CHECK(steps == 2 * 343);
    CHECK(total == 0.0);
    CHECK(s.level == Level({7, 7, 7}));
    CHECK_THROWS(env.step(s, 0));
}

TEST_CASE("action range is checked") {
    const Environment env(default_task(TaskKind::kDiameter));
    auto [s, obs] = env.reset(0);
    CHECK_THROWS(env.step(s, 2));
    CHECK_THROWS(env.step(s, -1));
}

TEST_CASE("random episodes telescope, stay deterministic and keep the frame") {
    Rng rng(41);
    for (auto k : {TaskKind::kDiameter, TaskKind::kDoors, TaskKind::kDungeon}) {
        const Environment env(default_task(k), small_config());
        for (int e = 0; e < 20; ++e) {
            const std::uint64_t seed = rng.next_u64();
            auto [s, obs] = env.reset(seed);
            auto [twin, twin_obs] = env.reset(seed);
            const auto doors = s.level.doors();
            const double l0 = s.prev_loss;
            double sum = 0.0;
            Rng actions(seed);
            while (!s.done()) {
                const int a = random_policy(env, actions);
                const auto r = env.step(s, a);
                env.step(twin, a);
                sum += r.reward;
                REQUIRE(r.observation.data.size() == obs.data.size());
                REQUIRE(r.observation.channels == obs.channels);
            }
            CHECK(std::abs(sum - (l0 - s.prev_loss)) <= 1e-9);
            CHECK(s.level == twin.level);
            CHECK(s.level.doors() == doors);
            for (int x = -1; x <= 4; ++x)
                for (int z = -1; z <= 4; ++z) CHECK(s.level.voxel({x, -1, z}) == Tile::kBorder);
        }
    }
}

TEST_CASE("observation layout") {
    const Environment env(default_task(TaskKind::kDiameter), small_config());
    auto [s, obs] = env.reset(0);
    CHECK(obs.channels == env.channel_count());
    CHECK(obs.extent == Dims{7, 7, 7});
    CHECK(obs.data.size() == static_cast<std::size_t>(obs.channels) * 343);
    // cursor at interior corner (0,0,0): window voxel (3,3,3) is the cursor
    CHECK(obs.at(0, 3, 3, 3) == 1.0f);
    // window x = 0..1 maps to x = -3..-2, beyond the frame: all zero
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 7; ++y)
            for (int z = 0; z < 7; ++z)
                for (int x = 0; x < 2; ++x) CHECK(obs.at(c, x, y, z) == 0.0f);
    // frame voxels are hot in the border channel
    CHECK(obs.at(2, 2, 3, 3) == 1.0f);
    CHECK(obs.at(2, 3, 2, 3) == 1.0f);
}

TEST_CASE("tile channels are one-hot on every real voxel") {
    Rng rng(42);
    TaskSpec t = default_task(TaskKind::kDungeon);
    t.controllable = {Metric::kPathLength};
    const Environment env(t, small_config());
    auto [s, obs] = env.reset(3);
    for (int step = 0; step < 40; ++step) {
        const auto r = env.step(s, random_policy(env, rng));
        const auto& o = r.observation;
        const Vec3 cur = env.cursor_position(s.cursor);
        const Vec3 center{3, 3, 3};
        for (int y = 0; y < 7; ++y)
            for (int z = 0; z < 7; ++z)
                for (int x = 0; x < 7; ++x) {
                    const Vec3 p = cur + (Vec3{x, y, z} - center);
                    float sum = 0.0f;
                    for (int c = 0; c < 5; ++c) sum += o.at(c, x, y, z);
                    CHECK(sum == (Dims{4, 4, 4}.contains_framed(p) ? 1.0f : 0.0f));
                }
        // control channel is constant
        const float v = o.at(6, 0, 0, 0);
        for (int i = 0; i < 343; ++i) CHECK(o.data[6 * 343 + static_cast<std::size_t>(i)] == v);
    }
}

TEST_CASE("path channel marks the diameter path") {
    const Environment env(default_task(TaskKind::kDiameter), small_config());
    auto [s, obs] = env.reset(0);
    int marked = 0;
    for (int i = 0; i < 343; ++i) marked += obs.data[3 * 343 + static_cast<std::size_t>(i)] == 1.0f ? 1 : 0;
    CHECK(marked == static_cast<int>(s.evaluation.path.positions().size()));
    CHECK(marked == 7);
}

TEST_CASE("scan order is x fastest, then z, then y") {
    const Environment env(default_task(TaskKind::kDiameter));
    CHECK(env.cursor_position(1) == Vec3{1, 0, 0});
    CHECK(env.cursor_position(7) == Vec3{0, 0, 1});
    CHECK(env.cursor_position(49) == Vec3{0, 1, 0});
    CHECK(env.cursor_position(73) == Vec3{3, 1, 3});
}

TEST_CASE("greedy picks air on ties") {
    const Environment env(default_task(TaskKind::kDiameter));
    auto [s, obs] = env.reset(0);
    s.cursor = 171;  // mid-air voxel (3,3,3)
    REQUIRE(env.cursor_position(s.cursor) == Vec3{3, 3, 3});
    CHECK(greedy_policy(env, s) == 0);
}

TEST_CASE("greedy keeps the doors connected") {
    const Environment env(default_task(TaskKind::kDoors));
    Level l({7, 7, 7});
    l.set_doors({Wall::kX0, {0, 0, 3}}, {Wall::kX1, {6, 0, 3}});
    for (int z = 0; z < 7; ++z)
        for (int y = 0; y < 2; ++y) l.set({3, y, z}, Tile::kSolid);
    l.set({3, 1, 3}, Tile::kAir);
    auto [s, obs] = env.reset_from(l, default_task(TaskKind::kDoors), 0);
    REQUIRE(s.evaluation.metrics.connected);
    s.cursor = 73;
    Level blocked = l;
    blocked.set({3, 1, 3}, Tile::kSolid);
    const TaskSpec task = default_task(TaskKind::kDoors);
    CHECK_FALSE(compute_metrics(blocked, task).connected);
    CHECK(env.evaluate_loss(blocked, task) > s.prev_loss);
    CHECK(greedy_policy(env, s) == 0);
}

TEST_CASE("greedy episode never shrinks the diameter") {
    const Environment env(default_task(TaskKind::kDiameter), small_config());
    auto [s, obs] = env.reset(0);
    const double start = s.evaluation.metrics.at(Metric::kDiameter);
    while (!s.done()) env.step(s, greedy_policy(env, s));
    CHECK(s.evaluation.metrics.at(Metric::kDiameter) >= start);
}

TEST_CASE("trace records serialize") {
    TraceRecord r{5, 1, 2.0, -3.0, {}};
    r.metrics.values[Metric::kDiameter] = 14;
    const Json j = trace_record_to_json(r);
    CHECK(j.at("cursor") == 5);
    CHECK(j.at("metrics").at("diameter") == 14.0);
}
