#include "voxpcg/traverse.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <queue>
#include <stdexcept>

#include <fmt/format.h>

namespace voxpcg {

namespace {

constexpr std::array<std::string_view, 4> kMoveNames{"flat", "stair_up", "stair_down", "jump"};

constexpr Vec3 kUp{0, 1, 0};
// Horizontal directions in edge emission order.
constexpr std::array<Vec3, 4> kDirections{Vec3{-1, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 0, -1}, Vec3{0, 0, 1}};

Vec3 up(Vec3 p, int k) { return {p.x, p.y + k, p.z}; }

int framed_index(Dims d, Vec3 p) {
    return (p.x + 1) + (d.width + 2) * ((p.z + 1) + (d.depth + 2) * (p.y + 1));
}

// One-directional jump check from `from` to `to` over the column `mid`.
// Gap: the two voxels below the from-foot height at mid are passable.
// The player's body and extra head-room clear the mid column up to foot+2,
// and both endpoint columns have one passable voxel above the head.
bool jump_clearance(const Level& level, Vec3 from, Vec3 mid_column, Vec3 to) {
    const Vec3 mid{mid_column.x, from.y, mid_column.z};
    for (int k = -2; k <= 2; ++k) {
        if (!level.passable(up(mid, k))) return false;
    }
    return level.passable(up(from, 2)) && level.passable(up(to, 2));
}

using NodeId = MoveGraph::NodeId;

struct HeapEntry {
    std::int32_t dist;
    NodeId node;
    bool operator>(const HeapEntry& o) const { return dist != o.dist ? dist > o.dist : node > o.node; }
};

// Dijkstra with (dist, node id) ordering. Parents are fixed by the first
// strict improvement, so the tree is a pure function of the graph.
void run_dijkstra(const MoveGraph& g, NodeId source, std::vector<std::int32_t>& dist,
                  std::vector<NodeId>* parent, std::vector<MoveKind>* via,
                  std::vector<HeapEntry>& heap_storage) {
    const std::size_t n = g.size();
    dist.assign(n, -1);
    if (parent) parent->assign(n, -1);
    if (via) via->assign(n, MoveKind::kFlat);
    std::vector<std::uint8_t> done(n, 0);
    heap_storage.clear();
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap(std::greater<>{},
                                                                                std::move(heap_storage));
    dist[static_cast<std::size_t>(source)] = 0;
    heap.push({0, source});
    while (!heap.empty()) {
        const HeapEntry top = heap.top();
        heap.pop();
        const auto u = static_cast<std::size_t>(top.node);
        if (done[u]) continue;
        done[u] = 1;
        for (const auto& e : g.edges(top.node)) {
            const auto v = static_cast<std::size_t>(e.to);
            if (done[v]) continue;
            const std::int32_t nd = top.dist + move_cost(e.kind);
            if (dist[v] < 0 || nd < dist[v]) {
                dist[v] = nd;
                if (parent) (*parent)[v] = top.node;
                if (via) (*via)[v] = e.kind;
                heap.push({nd, e.to});
            }
        }
    }
}

struct SourceBest {
    std::int32_t cost = -1;
    NodeId target = -1;
};

SourceBest farthest(const std::vector<std::int32_t>& dist) {
    SourceBest best;
    for (std::size_t v = 0; v < dist.size(); ++v) {
        if (dist[v] > best.cost) {
            best.cost = dist[v];
            best.target = static_cast<NodeId>(v);
        }
    }
    return best;
}

PathReport report_for(const MoveGraph& g, NodeId source, NodeId target) {
    const auto tree = shortest_path_tree(g, source);
    return extract_path(g, tree, target);
}

}  // namespace

std::string_view move_kind_name(MoveKind k) { return kMoveNames.at(static_cast<std::size_t>(k)); }

std::vector<Vec3> PathReport::positions() const {
    std::vector<Vec3> out;
    if (length == 0) return out;
    out.push_back(start);
    for (const Move& m : moves) out.push_back(m.to);
    return out;
}

PathReport make_path_report(Vec3 start, std::vector<Move> moves) {
    PathReport r;
    r.start = start;
    r.length = kPathBaseLength;
    for (const Move& m : moves) {
        r.length += m.cost();
        if (m.kind == MoveKind::kJump) ++r.jumps;
    }
    r.moves = std::move(moves);
    return r;
}

std::optional<NodeId> MoveGraph::node_at(Vec3 p) const {
    if (!dims_.contains_framed(p) || lookup_.empty()) return std::nullopt;
    const auto n = lookup_[static_cast<std::size_t>(framed_index(dims_, p))];
    if (n < 0) return std::nullopt;
    return n;
}

bool is_standing_position(const Level& level, Vec3 foot) {
    return level.dims().contains(foot) && level.passable(foot) && level.passable(up(foot, 1)) &&
           level.solid(up(foot, -1));
}

std::vector<Vec3> standing_positions(const Level& level) {
    const auto g = build_move_graph(level);
    return {g.positions().begin(), g.positions().end()};
}

MoveGraph build_move_graph(const Level& level, const TraverseOptions& opts) {
    MoveGraph g;
    const Dims d = level.dims();
    g.dims_ = d;
    g.lookup_.assign(static_cast<std::size_t>((d.width + 2) * (d.height + 2) * (d.depth + 2)), -1);

    auto add_node = [&](Vec3 p) {
        const auto id = static_cast<NodeId>(g.positions_.size());
        g.positions_.push_back(p);
        g.lookup_[static_cast<std::size_t>(framed_index(d, p))] = id;
        return id;
    };
    for (int i = 0; i < level.volume(); ++i) {
        const Vec3 p = level.position(i);
        if (is_standing_position(level, p)) add_node(p);
    }
    if (level.doors()) {
        g.entrance_ = add_node(level.doors()->first.opening());
        g.exit_ = add_node(level.doors()->second.opening());
    }

    auto node = [&](Vec3 p) -> NodeId {
        if (!d.contains_framed(p)) return -1;
        return g.lookup_[static_cast<std::size_t>(framed_index(d, p))];
    };

    g.offsets_.reserve(g.positions_.size() + 1);
    g.offsets_.push_back(0);
    for (std::size_t id = 0; id < g.positions_.size(); ++id) {
        const Vec3 u = g.positions_[id];
        if (!d.contains(u)) {
            // Door node: single FLAT link to the column behind the opening.
            const Door& door = static_cast<NodeId>(id) == g.entrance_ ? level.doors()->first : level.doors()->second;
            const NodeId v = node(door.foot);
            if (v >= 0) g.edges_.push_back({v, MoveKind::kFlat});
            g.offsets_.push_back(static_cast<std::uint32_t>(g.edges_.size()));
            continue;
        }
        for (const Vec3 dir : kDirections) {
            const Vec3 c = u + dir;
            if (!d.contains(c)) continue;
            if (const NodeId v = node(c); v >= 0) g.edges_.push_back({v, MoveKind::kFlat});
            // Up: extra head-room above the player; the destination node
            // already implies solid support and clear foot/head.
            if (const NodeId v = node(up(c, 1)); v >= 0 && level.passable(up(u, 2))) {
                g.edges_.push_back({v, MoveKind::kStairUp});
            }
            // Down: clear voxel above the destination head (beside our head).
            if (const NodeId v = node(up(c, -1)); v >= 0 && level.passable(up(c, 1))) {
                g.edges_.push_back({v, MoveKind::kStairDown});
            }
            const Vec3 t = c + dir;
            if (!d.contains(t)) continue;
            for (int dy = -1; dy <= 1; ++dy) {
                if (dy == 0 && !opts.level_jumps) continue;
                const Vec3 to = up(t, dy);
                const NodeId v = node(to);
                if (v < 0 || !d.contains(to)) continue;
                // Keep only jumps that are valid in both directions.
                if (jump_clearance(level, u, c, to) && jump_clearance(level, to, c, u)) {
                    g.edges_.push_back({v, MoveKind::kJump});
                }
            }
        }
        if (level.doors()) {
            for (const Door* door : {&level.doors()->first, &level.doors()->second}) {
                if (door->foot == u) {
                    const NodeId v = node(door->opening());
                    g.edges_.push_back({v, MoveKind::kFlat});
                }
            }
        }
        g.offsets_.push_back(static_cast<std::uint32_t>(g.edges_.size()));
    }
    return g;
}

ShortestPathTree shortest_path_tree(const MoveGraph& graph, MoveGraph::NodeId source) {
    if (source < 0 || static_cast<std::size_t>(source) >= graph.size()) {
        throw std::out_of_range("shortest_path_tree: source is not a node");
    }
    ShortestPathTree t;
    t.source = source;
    std::vector<HeapEntry> heap;
    run_dijkstra(graph, source, t.dist, &t.parent, &t.via, heap);
    return t;
}

PathReport extract_path(const MoveGraph& graph, const ShortestPathTree& tree, MoveGraph::NodeId target) {
    if (!tree.reached(target)) throw std::invalid_argument("extract_path: target not reached");
    std::vector<Move> moves;
    for (NodeId v = target; v != tree.source;) {
        const NodeId p = tree.parent[static_cast<std::size_t>(v)];
        moves.push_back({tree.via[static_cast<std::size_t>(v)], graph.position(p), graph.position(v)});
        v = p;
    }
    std::reverse(moves.begin(), moves.end());
    return make_path_report(graph.position(tree.source), std::move(moves));
}

std::optional<PathReport> shortest_path(const MoveGraph& graph, MoveGraph::NodeId src, MoveGraph::NodeId dst) {
    const auto tree = shortest_path_tree(graph, src);
    if (!tree.reached(dst)) return std::nullopt;
    return extract_path(graph, tree, dst);
}

std::optional<PathReport> shortest_path(const Level& level, Vec3 src, Vec3 dst, const TraverseOptions& opts) {
    const auto g = build_move_graph(level, opts);
    const auto s = g.node_at(src);
    const auto t = g.node_at(dst);
    if (!s || !t) throw std::invalid_argument("shortest_path: endpoints must be standing positions");
    return shortest_path(g, *s, *t);
}

PathReport diameter(const MoveGraph& graph) {
    const auto n = static_cast<std::int64_t>(graph.size());
    if (n == 0) return {};
    std::vector<SourceBest> best(static_cast<std::size_t>(n));
#pragma omp parallel
    {
        std::vector<std::int32_t> dist;
        std::vector<HeapEntry> heap;
#pragma omp for schedule(dynamic, 8)
        for (std::int64_t s = 0; s < n; ++s) {
            run_dijkstra(graph, static_cast<NodeId>(s), dist, nullptr, nullptr, heap);
            best[static_cast<std::size_t>(s)] = farthest(dist);
        }
    }
    NodeId src = 0;
    for (std::int64_t s = 1; s < n; ++s) {
        if (best[static_cast<std::size_t>(s)].cost > best[static_cast<std::size_t>(src)].cost) {
            src = static_cast<NodeId>(s);
        }
    }
    return report_for(graph, src, best[static_cast<std::size_t>(src)].target);
}

PathReport diameter(const Level& level, const TraverseOptions& opts) {
    return diameter(build_move_graph(level, opts));
}

namespace serial {

PathReport diameter(const MoveGraph& graph) {
    if (graph.empty()) return {};
    std::vector<std::int32_t> dist;
    std::vector<HeapEntry> heap;
    SourceBest overall;
    NodeId src = -1;
    for (std::size_t s = 0; s < graph.size(); ++s) {
        run_dijkstra(graph, static_cast<NodeId>(s), dist, nullptr, nullptr, heap);
        const auto b = farthest(dist);
        if (b.cost > overall.cost) {
            overall = b;
            src = static_cast<NodeId>(s);
        }
    }
    return report_for(graph, src, overall.target);
}

}  // namespace serial

PathReport furthest_from(const MoveGraph& graph, MoveGraph::NodeId source) {
    const auto tree = shortest_path_tree(graph, source);
    const auto b = farthest(tree.dist);
    return extract_path(graph, tree, b.target);
}

EnemyDistance nearest_enemy_distance(const Level& level, const MoveGraph& graph, MoveGraph::NodeId entrance) {
    if (level.count(Tile::kEnemy) == 0) return {std::nullopt, EnemyStatus::kNoEnemies};
    const auto tree = shortest_path_tree(graph, entrance);
    std::optional<int> best;
    for (std::size_t v = 0; v < graph.size(); ++v) {
        const Vec3 p = graph.position(static_cast<NodeId>(v));
        if (!level.dims().contains(p) || level.at(p) != Tile::kEnemy || tree.dist[v] < 0) continue;
        const int len = tree.dist[v] + kPathBaseLength;
        if (!best || len < *best) best = len;
    }
    if (!best) return {std::nullopt, EnemyStatus::kUnreachable};
    return {best, EnemyStatus::kFound};
}

EnemyDistance nearest_enemy_distance(const Level& level, const Door& entrance, const TraverseOptions& opts) {
    const auto g = build_move_graph(level, opts);
    const auto s = g.node_at(entrance.opening());
    if (!s) throw std::invalid_argument("nearest_enemy_distance: entrance is not a door of this level");
    return nearest_enemy_distance(level, g, *s);
}

namespace {

Json vec_json(Vec3 p) { return Json::array({p.x, p.y, p.z}); }
Vec3 vec_from(const Json& j) { return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>()}; }

}  // namespace

Json path_to_json(const PathReport& path) {
    Json j;
    j["start"] = vec_json(path.start);
    Json moves = Json::array();
    for (const Move& m : path.moves) {
        Json mj;
        mj["kind"] = move_kind_name(m.kind);
        mj["from"] = vec_json(m.from);
        mj["to"] = vec_json(m.to);
        moves.push_back(std::move(mj));
    }
    j["moves"] = std::move(moves);
    j["length"] = path.length;
    j["jumps"] = path.jumps;
    return j;
}

PathReport path_from_json(const Json& j) {
    std::vector<Move> moves;
    for (const auto& mj : j.at("moves")) {
        const auto name = mj.at("kind").get<std::string>();
        const auto it = std::find(kMoveNames.begin(), kMoveNames.end(), name);
        if (it == kMoveNames.end()) throw std::invalid_argument(fmt::format("unknown move kind '{}'", name));
        moves.push_back({static_cast<MoveKind>(it - kMoveNames.begin()), vec_from(mj.at("from")), vec_from(mj.at("to"))});
    }
    const int length = j.at("length").get<int>();
    if (length == 0) return {};
    return make_path_report(vec_from(j.at("start")), std::move(moves));
}

}  // namespace voxpcg
