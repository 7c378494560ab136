#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "voxpcg/harness.hpp"
#include "voxpcg/rng.hpp"

namespace voxpcg {

namespace {

// Everything here is written against raw voxel reads only, so it shares no
// logic with the move-graph builder beyond Level::voxel.

bool pass(const Level& l, int x, int y, int z) { return is_passable(l.voxel({x, y, z})); }

bool stand(const Level& l, int x, int y, int z) {
    if (!l.dims().contains({x, y, z})) return false;
    return pass(l, x, y, z) && pass(l, x, y + 1, z) && !pass(l, x, y - 1, z);
}

constexpr int kInfinity = 1 << 28;

}  // namespace

NaiveGraph naive_all_pairs(const Level& level, const TraverseOptions& opts, OracleFault fault) {
    const Dims d = level.dims();
    NaiveGraph g;
    for (int y = 0; y < d.height; ++y)
        for (int z = 0; z < d.depth; ++z)
            for (int x = 0; x < d.width; ++x)
                if (stand(level, x, y, z)) g.nodes.push_back({x, y, z});
    if (level.doors()) {
        g.nodes.push_back(level.doors()->first.opening());
        g.nodes.push_back(level.doors()->second.opening());
    }
    const int n = static_cast<int>(g.nodes.size());
    std::vector<int> w(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), kInfinity);
    auto at = [&](int u, int v) -> int& { return w[static_cast<std::size_t>(u) * static_cast<std::size_t>(n) + static_cast<std::size_t>(v)]; };
    auto find = [&](Vec3 p) {
        for (int i = 0; i < n; ++i)
            if (g.nodes[static_cast<std::size_t>(i)] == p) return i;
        return -1;
    };
    const int dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

    // forward jump feasibility from a over the middle column to b
    auto jump_clear = [&](Vec3 a, int mx, int mz, Vec3 b) {
        for (int yy = a.y - 2; yy <= a.y + 2; ++yy)
            if (!pass(level, mx, yy, mz)) return false;
        return pass(level, a.x, a.y + 2, a.z) && pass(level, b.x, b.y + 2, b.z);
    };

    for (int u = 0; u < n; ++u) {
        const Vec3 a = g.nodes[static_cast<std::size_t>(u)];
        if (!d.contains(a)) continue;
        for (const auto& dir : dirs) {
            const int cx = a.x + dir[0], cz = a.z + dir[1];
            // flat
            if (stand(level, cx, a.y, cz)) at(u, find({cx, a.y, cz})) = kFlatCost;
            // up: headroom above own head
            if (stand(level, cx, a.y + 1, cz) && pass(level, a.x, a.y + 2, a.z)) {
                at(u, find({cx, a.y + 1, cz})) = kStairCost;
            }
            // down: headroom over the lower column
            if (stand(level, cx, a.y - 1, cz) && pass(level, cx, a.y + 1, cz)) {
                at(u, find({cx, a.y - 1, cz})) = kStairCost;
            }
            for (int dy = -1; dy <= 1; ++dy) {
                if (dy == 0 && !opts.level_jumps) continue;
                const Vec3 b{a.x + 2 * dir[0], a.y + dy, a.z + 2 * dir[1]};
                if (!stand(level, b.x, b.y, b.z)) continue;
                if (jump_clear(a, cx, cz, b) && jump_clear(b, cx, cz, a)) at(u, find(b)) = kJumpCost;
            }
        }
    }
    if (level.doors()) {
        for (const Door* door : {&level.doors()->first, &level.doors()->second}) {
            const Vec3 f = door->foot;
            if (!stand(level, f.x, f.y, f.z)) continue;
            const int dn = find(door->opening()), fn = find(f);
            at(dn, fn) = kFlatCost;
            at(fn, dn) = kFlatCost;
        }
    }
    if (fault == OracleFault::kPerturbEdgeCost) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] < kInfinity) {
                w[i] += 1;
                break;
            }
        }
    }
    for (int i = 0; i < n; ++i) at(i, i) = 0;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            const int ik = at(i, k);
            if (ik >= kInfinity) continue;
            for (int j = 0; j < n; ++j) {
                const int via = ik + at(k, j);
                if (via < at(i, j)) at(i, j) = via;
            }
        }
    for (auto& v : w)
        if (v >= kInfinity) v = -1;
    g.dist = std::move(w);
    return g;
}

namespace {

void compare_level(const Level& level, const OracleConfig& cfg, std::uint64_t seed, OracleReport& report) {
    ++report.levels;
    auto fail = [&](std::string what) { report.mismatches.push_back({level.dims(), seed, std::move(what)}); };
    const NaiveGraph naive = naive_all_pairs(level, cfg.traverse, cfg.fault);
    const MoveGraph graph = build_move_graph(level, cfg.traverse);
    const auto n = naive.nodes.size();
    if (graph.size() != n || !std::equal(naive.nodes.begin(), naive.nodes.end(), graph.positions().begin())) {
        fail(fmt::format("node sets differ ({} vs {})", graph.size(), n));
        return;
    }
    int best = -1;
    for (std::size_t s = 0; s < n; ++s) {
        const auto tree = shortest_path_tree(graph, static_cast<MoveGraph::NodeId>(s));
        for (std::size_t t = 0; t < n; ++t) {
            ++report.pairs;
            const int want = naive.dist[s * n + t];
            const int got = tree.dist[t];
            if (want != got) {
                fail(fmt::format("dist {}->{}: graph {} oracle {}", s, t, got, want));
                return;
            }
            if (got > 0) {
                const auto path = extract_path(graph, tree, static_cast<MoveGraph::NodeId>(t));
                if (path.cost() != got) {
                    fail(fmt::format("path {}->{} cost {} but distance {}", s, t, path.cost(), got));
                    return;
                }
            }
            best = std::max(best, want);
        }
    }
    const int want_len = n == 0 ? 0 : best + kPathBaseLength;
    const auto diam = diameter(graph);
    if (diam.length != want_len) fail(fmt::format("diameter {} but oracle {}", diam.length, want_len));
    if (serial::diameter(graph) != diam) fail("parallel and serial diameter paths differ");
}

}  // namespace

OracleReport oracle_check(const OracleConfig& cfg) {
    OracleReport report;
    for (std::size_t b = 0; b < cfg.batches.size(); ++b) {
        const auto& batch = cfg.batches[b];
        if (batch.dims.width > 5 || batch.dims.height > 5 || batch.dims.depth > 5) {
            throw std::invalid_argument("oracle levels are limited to 5 per side");
        }
        Level air(batch.dims), solid(batch.dims);
        solid.fill(Tile::kSolid);
        compare_level(air, cfg, 0, report);
        compare_level(solid, cfg, 0, report);
        const std::uint64_t base = derive_seed(cfg.seed, b);
        for (int i = 0; i < batch.count; ++i) {
            const std::uint64_t s = derive_seed(base, static_cast<std::uint64_t>(i));
            Level level = new_level(batch.dims, InitSpec::uniform(cfg.solid_probability, s));
            Rng rng(derive_seed(s, 1));
            if (rng.bernoulli(cfg.door_fraction)) {
                const auto [entrance, exit] = sample_door_pair(batch.dims, rng.next_u64());
                level.set_doors(entrance, exit);
            }
            compare_level(level, cfg, s, report);
        }
    }
    return report;
}

std::vector<CalibrationCheck> run_calibration() {
    std::vector<CalibrationCheck> out;

    {
        const Level empty(Dims{7, 7, 7});
        const int len = diameter(empty).length;
        out.push_back({"empty_7x7x7_diameter", len == 14, fmt::format("length {} (want 14)", len)});
    }

    {
        // floor raised by one for x >= 4; a single step up at x = 3 -> 4
        Level stair(Dims{7, 7, 7});
        for (int z = 0; z < 7; ++z)
            for (int x = 4; x < 7; ++x) stair.set({x, 0, z}, Tile::kSolid);
        const auto approach = shortest_path(stair, {0, 0, 3}, {3, 0, 3});
        const auto across = shortest_path(stair, {0, 0, 3}, {4, 1, 3});
        const bool ok = approach && across && across->length - approach->length == kStairCost;
        out.push_back({"single_stair_cost", ok,
                       fmt::format("across {} approach {}", across ? across->length : -1,
                                   approach ? approach->length : -1)});
    }

    {
        struct Row {
            TaskKind task;
            std::vector<std::pair<double, std::string>> metrics;
        };
        const std::vector<Row> table{
            {TaskKind::kDiameter, {{1.0, "5"}, {1.0, "max"}}},
            {TaskKind::kDoors, {{1.5, "5"}, {1.0, "max"}, {1.2, "max"}}},
            {TaskKind::kDungeon, {{1.0, "[2,5]"}, {3.0, "1"}, {1.0, "[2,5]"}, {2.0, "[5,inf]"}, {1.0, "max"}}},
        };
        for (const auto& row : table) {
            const TaskSpec t = default_task(row.task);
            bool ok = t.metrics.size() == row.metrics.size();
            for (std::size_t i = 0; ok && i < t.metrics.size(); ++i) {
                ok = t.metrics[i].weight == row.metrics[i].first && t.metrics[i].target.to_string() == row.metrics[i].second;
            }
            out.push_back({fmt::format("default_table_{}", task_name(row.task)), ok, ""});
        }
    }
    return out;
}

}  // namespace voxpcg
