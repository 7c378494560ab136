#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace voxpcg {

enum class Tile : std::uint8_t { kAir = 0, kSolid, kChest, kEnemy, kBorder };

std::string_view tile_name(Tile t);
Tile tile_from_name(std::string_view name);

/// Passable voxels hold the player's foot or head: AIR, CHEST, ENEMY.
constexpr bool is_passable(Tile t) { return t == Tile::kAir || t == Tile::kChest || t == Tile::kEnemy; }
/// SOLID and BORDER both support a player.
constexpr bool is_solid(Tile t) { return t == Tile::kSolid || t == Tile::kBorder; }

struct Vec3 {
    int x = 0;
    int y = 0;
    int z = 0;

    friend constexpr auto operator<=>(const Vec3&, const Vec3&) = default;
    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
};

constexpr int chebyshev(Vec3 a, Vec3 b) {
    auto ab = [](int v) { return v < 0 ? -v : v; };
    const int dx = ab(a.x - b.x), dy = ab(a.y - b.y), dz = ab(a.z - b.z);
    return dx > dy ? (dx > dz ? dx : dz) : (dy > dz ? dy : dz);
}

/// Interior voxel counts. y is up.
struct Dims {
    int width = 7;
    int height = 7;
    int depth = 7;

    constexpr int volume() const { return width * height * depth; }
    constexpr bool contains(Vec3 p) const {
        return p.x >= 0 && p.y >= 0 && p.z >= 0 && p.x < width && p.y < height && p.z < depth;
    }
    /// Interior plus the one-voxel frame.
    constexpr bool contains_framed(Vec3 p) const {
        return p.x >= -1 && p.y >= -1 && p.z >= -1 && p.x <= width && p.y <= height && p.z <= depth;
    }
    friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

void validate_dims(Dims dims);

/// Side walls only; the floor and ceiling never carry doors.
enum class Wall : std::uint8_t { kX0 = 0, kX1, kZ0, kZ1 };
enum class DoorRole : std::uint8_t { kEntrance = 0, kExit };

std::string_view wall_name(Wall w);
Wall wall_from_name(std::string_view name);

/// A two-voxel opening in the side frame.
///
/// `foot` is given in interior coordinates of the column the door faces:
/// for wall x0 it is (0, y, z), for x1 (width-1, y, z), and likewise for the
/// z walls. The opening voxels themselves sit one step outside, at
/// `opening()` and `opening() + up`.
struct Door {
    Wall wall = Wall::kX0;
    Vec3 foot;
    DoorRole role = DoorRole::kEntrance;

    Vec3 outward() const;
    Vec3 opening() const { return foot + outward(); }
    Vec3 opening_head() const { return opening() + Vec3{0, 1, 0}; }

    friend bool operator==(const Door&, const Door&) = default;
};

bool is_valid_door(const Door& d, Dims dims);

/// False when the feet are within Chebyshev distance 1 (overlapping or
/// edge-sharing openings).
bool is_valid_door_pair(const Door& a, const Door& b);

/// All door positions ordered by wall (x0, x1, z0, z1), column along the
/// wall, then foot height. Roles are set to ENTRANCE.
std::vector<Door> valid_door_positions(Dims dims);

/// Every ordered valid pair (first = ENTRANCE, second = EXIT), in the
/// nested order of valid_door_positions.
std::vector<std::pair<Door, Door>> valid_door_pairs(Dims dims);

/// Uniform over valid_door_pairs(dims).
std::pair<Door, Door> sample_door_pair(Dims dims, std::uint64_t seed);

struct InitSpec {
    enum class Mode : std::uint8_t { kEmpty, kUniformRandom };
    Mode mode = Mode::kEmpty;
    double solid_probability = 0.5;
    std::uint64_t seed = 0;

    static InitSpec empty() { return {}; }
    static InitSpec uniform(double p, std::uint64_t seed) { return {Mode::kUniformRandom, p, seed}; }
};

/// Dense interior grid plus implicit BORDER frame.
///
/// Interior storage is x fastest, then z, then y. Frame voxels are BORDER
/// except door openings, which read as AIR.
class Level {
public:
    explicit Level(Dims dims = {});

    Dims dims() const { return dims_; }
    int volume() const { return dims_.volume(); }

    int index(Vec3 p) const { return p.x + dims_.width * (p.z + dims_.depth * p.y); }
    Vec3 position(int index) const;

    Tile at(Vec3 p) const { return tiles_[static_cast<std::size_t>(index(p))]; }
    Tile at(int index) const { return tiles_[static_cast<std::size_t>(index)]; }
    /// Rejects BORDER and positions outside the interior.
    void set(Vec3 p, Tile t);
    void set(int index, Tile t);
    void fill(Tile t);

    /// Tile at any coordinate: interior, frame, or beyond (read as BORDER).
    Tile voxel(Vec3 p) const;
    bool passable(Vec3 p) const { return is_passable(voxel(p)); }
    bool solid(Vec3 p) const { return is_solid(voxel(p)); }

    std::span<const Tile> tiles() const { return tiles_; }

    const std::optional<std::pair<Door, Door>>& doors() const { return doors_; }
    /// Validates both doors and the pair; forces ENTRANCE/EXIT roles.
    void set_doors(Door entrance, Door exit);
    void clear_doors() { doors_.reset(); }

    int count(Tile t) const;

    friend bool operator==(const Level&, const Level&) = default;

private:
    bool is_door_opening(Vec3 p) const;

    Dims dims_;
    std::vector<Tile> tiles_;
    std::optional<std::pair<Door, Door>> doors_;
};

Level new_level(Dims dims, const InitSpec& init);

/// Fraction of interior voxels that are AIR (CHEST and ENEMY are not).
double emptiness(const Level& level);

/// Number of interior voxels whose tiles differ. Dims must match.
int hamming_distance(const Level& a, const Level& b);

}  // namespace voxpcg
