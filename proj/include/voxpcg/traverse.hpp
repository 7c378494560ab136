#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "voxpcg/level.hpp"
#include "voxpcg/level_json.hpp"

namespace voxpcg {

enum class MoveKind : std::uint8_t { kFlat = 0, kStairUp, kStairDown, kJump };

std::string_view move_kind_name(MoveKind k);

inline constexpr int kFlatCost = 1;
inline constexpr int kStairCost = 3;
inline constexpr int kJumpCost = 3;
/// Foot and head voxels of the starting position.
inline constexpr int kPathBaseLength = 2;

constexpr int move_cost(MoveKind k) {
    switch (k) {
        case MoveKind::kFlat: return kFlatCost;
        case MoveKind::kStairUp:
        case MoveKind::kStairDown: return kStairCost;
        case MoveKind::kJump: return kJumpCost;
    }
    return 0;
}

struct Move {
    MoveKind kind = MoveKind::kFlat;
    Vec3 from;
    Vec3 to;

    int cost() const { return move_cost(kind); }
    friend bool operator==(const Move&, const Move&) = default;
};

/// An explicit traversal. length = 2 + sum of move costs; the empty report
/// (no standing positions at all) has length 0.
struct PathReport {
    Vec3 start;
    std::vector<Move> moves;
    int length = 0;
    int jumps = 0;

    int cost() const { return length > 0 ? length - kPathBaseLength : 0; }
    /// Foot voxels visited, start first.
    std::vector<Vec3> positions() const;
    friend bool operator==(const PathReport&, const PathReport&) = default;
};

PathReport make_path_report(Vec3 start, std::vector<Move> moves);

struct TraverseOptions {
    /// Allow same-height jumps over a gap in addition to +-1 jumps.
    bool level_jumps = true;
};

/// Standing positions and the moves between them.
///
/// Node order: interior positions in storage order (x fastest, then z, then
/// y), followed by door nodes (entrance, then exit). Door nodes sit on the
/// frame opening voxel and link to the interior by a single FLAT edge when
/// the column behind the door is standable.
class MoveGraph {
public:
    using NodeId = std::int32_t;

    struct Edge {
        NodeId to;
        MoveKind kind;
    };

    MoveGraph() = default;

    std::size_t size() const { return positions_.size(); }
    bool empty() const { return positions_.empty(); }
    Vec3 position(NodeId n) const { return positions_[static_cast<std::size_t>(n)]; }
    std::span<const Vec3> positions() const { return positions_; }
    std::optional<NodeId> node_at(Vec3 p) const;
    std::span<const Edge> edges(NodeId n) const {
        const auto b = offsets_[static_cast<std::size_t>(n)];
        const auto e = offsets_[static_cast<std::size_t>(n) + 1];
        return {edges_.data() + b, e - b};
    }
    std::size_t edge_count() const { return edges_.size(); }

    /// Door nodes; empty when the level has no doors.
    std::optional<NodeId> entrance() const { return entrance_; }
    std::optional<NodeId> exit() const { return exit_; }

private:
    friend MoveGraph build_move_graph(const Level&, const TraverseOptions&);

    Dims dims_;
    std::vector<Vec3> positions_;
    std::vector<std::int32_t> lookup_;  // framed grid -> node or -1
    std::vector<std::uint32_t> offsets_;
    std::vector<Edge> edges_;
    std::optional<NodeId> entrance_;
    std::optional<NodeId> exit_;
};

/// foot passable, head passable, support solid.
bool is_standing_position(const Level& level, Vec3 foot);

/// Interior standing positions plus door opening voxels, in node order.
std::vector<Vec3> standing_positions(const Level& level);

MoveGraph build_move_graph(const Level& level, const TraverseOptions& opts = {});

/// Single-source shortest paths over the move graph.
struct ShortestPathTree {
    MoveGraph::NodeId source = -1;
    std::vector<std::int32_t> dist;  // cost, -1 when unreachable
    std::vector<MoveGraph::NodeId> parent;
    std::vector<MoveKind> via;

    bool reached(MoveGraph::NodeId n) const { return dist[static_cast<std::size_t>(n)] >= 0; }
};

ShortestPathTree shortest_path_tree(const MoveGraph& graph, MoveGraph::NodeId source);
PathReport extract_path(const MoveGraph& graph, const ShortestPathTree& tree, MoveGraph::NodeId target);

std::optional<PathReport> shortest_path(const MoveGraph& graph, MoveGraph::NodeId src, MoveGraph::NodeId dst);
/// Throws std::invalid_argument when src or dst is not a standing position.
std::optional<PathReport> shortest_path(const Level& level, Vec3 src, Vec3 dst, const TraverseOptions& opts = {});

/// Longest shortest path over all ordered node pairs. Ties go to the first
/// source, then first target, in node order. Sources run in parallel.
PathReport diameter(const MoveGraph& graph);
PathReport diameter(const Level& level, const TraverseOptions& opts = {});

/// Furthest node reachable from `source` (ties: lowest node id).
PathReport furthest_from(const MoveGraph& graph, MoveGraph::NodeId source);

namespace serial {
/// Single-threaded diameter, kept as the reference for the parallel one.
PathReport diameter(const MoveGraph& graph);
}  // namespace serial

enum class EnemyStatus : std::uint8_t { kFound, kNoEnemies, kUnreachable };

struct EnemyDistance {
    std::optional<int> length;
    EnemyStatus status = EnemyStatus::kNoEnemies;
};

/// Shortest path length from the entrance door node to any standing
/// position whose foot voxel is ENEMY.
EnemyDistance nearest_enemy_distance(const Level& level, const Door& entrance, const TraverseOptions& opts = {});
EnemyDistance nearest_enemy_distance(const Level& level, const MoveGraph& graph, MoveGraph::NodeId entrance);

Json path_to_json(const PathReport& path);
PathReport path_from_json(const Json& j);

}  // namespace voxpcg
