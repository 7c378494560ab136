#include "voxpcg/level.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "voxpcg/rng.hpp"

namespace voxpcg {

namespace {

constexpr std::array<std::string_view, 5> kTileNames{"air", "solid", "chest", "enemy", "border"};
constexpr std::array<std::string_view, 4> kWallNames{"x0", "x1", "z0", "z1"};

}  // namespace

std::string_view tile_name(Tile t) { return kTileNames.at(static_cast<std::size_t>(t)); }

Tile tile_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kTileNames.size(); ++i) {
        if (kTileNames[i] == name) return static_cast<Tile>(i);
    }
    throw std::invalid_argument(fmt::format("unknown tile name '{}'", name));
}

std::string_view wall_name(Wall w) { return kWallNames.at(static_cast<std::size_t>(w)); }

Wall wall_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kWallNames.size(); ++i) {
        if (kWallNames[i] == name) return static_cast<Wall>(i);
    }
    throw std::invalid_argument(fmt::format("unknown wall name '{}'", name));
}

void validate_dims(Dims dims) {
    if (dims.width < 3 || dims.height < 3 || dims.depth < 3) {
        throw std::invalid_argument(
            fmt::format("level dims must be >= 3 on every axis, got {}x{}x{}", dims.width, dims.height, dims.depth));
    }
}

Vec3 Door::outward() const {
    switch (wall) {
        case Wall::kX0: return {-1, 0, 0};
        case Wall::kX1: return {1, 0, 0};
        case Wall::kZ0: return {0, 0, -1};
        case Wall::kZ1: return {0, 0, 1};
    }
    return {};
}

bool is_valid_door(const Door& d, Dims dims) {
    if (!dims.contains(d.foot)) return false;
    if (d.foot.y > dims.height - 2) return false;
    switch (d.wall) {
        case Wall::kX0: return d.foot.x == 0;
        case Wall::kX1: return d.foot.x == dims.width - 1;
        case Wall::kZ0: return d.foot.z == 0;
        case Wall::kZ1: return d.foot.z == dims.depth - 1;
    }
    return false;
}

bool is_valid_door_pair(const Door& a, const Door& b) { return chebyshev(a.foot, b.foot) > 1; }

std::vector<Door> valid_door_positions(Dims dims) {
    validate_dims(dims);
    std::vector<Door> out;
    out.reserve(static_cast<std::size_t>(2 * (dims.width + dims.depth) * (dims.height - 1)));
    for (Wall wall : {Wall::kX0, Wall::kX1, Wall::kZ0, Wall::kZ1}) {
        const bool along_z = wall == Wall::kX0 || wall == Wall::kX1;
        const int columns = along_z ? dims.depth : dims.width;
        for (int c = 0; c < columns; ++c) {
            for (int y = 0; y <= dims.height - 2; ++y) {
                Vec3 foot;
                switch (wall) {
                    case Wall::kX0: foot = {0, y, c}; break;
                    case Wall::kX1: foot = {dims.width - 1, y, c}; break;
                    case Wall::kZ0: foot = {c, y, 0}; break;
                    case Wall::kZ1: foot = {c, y, dims.depth - 1}; break;
                }
                out.push_back(Door{wall, foot, DoorRole::kEntrance});
            }
        }
    }
    return out;
}

std::vector<std::pair<Door, Door>> valid_door_pairs(Dims dims) {
    const auto positions = valid_door_positions(dims);
    std::vector<std::pair<Door, Door>> pairs;
    for (const Door& a : positions) {
        for (const Door& b : positions) {
            if (!is_valid_door_pair(a, b)) continue;
            Door exit = b;
            exit.role = DoorRole::kExit;
            pairs.emplace_back(a, exit);
        }
    }
    return pairs;
}

std::pair<Door, Door> sample_door_pair(Dims dims, std::uint64_t seed) {
    const auto pairs = valid_door_pairs(dims);
    Rng rng(seed);
    return pairs[rng.below(pairs.size())];
}

Level::Level(Dims dims) : dims_(dims) {
    validate_dims(dims);
    tiles_.assign(static_cast<std::size_t>(dims.volume()), Tile::kAir);
}

Vec3 Level::position(int index) const {
    const int x = index % dims_.width;
    const int rest = index / dims_.width;
    return {x, rest / dims_.depth, rest % dims_.depth};
}

void Level::set(Vec3 p, Tile t) {
    if (!dims_.contains(p)) {
        throw std::out_of_range(fmt::format("({},{},{}) is not an interior voxel", p.x, p.y, p.z));
    }
    set(index(p), t);
}

void Level::set(int index, Tile t) {
    if (t == Tile::kBorder) throw std::invalid_argument("BORDER cannot be placed in the interior");
    if (index < 0 || index >= volume()) throw std::out_of_range("interior index out of range");
    tiles_[static_cast<std::size_t>(index)] = t;
}

void Level::fill(Tile t) {
    if (t == Tile::kBorder) throw std::invalid_argument("BORDER cannot be placed in the interior");
    std::fill(tiles_.begin(), tiles_.end(), t);
}

bool Level::is_door_opening(Vec3 p) const {
    if (!doors_) return false;
    for (const Door* d : {&doors_->first, &doors_->second}) {
        if (p == d->opening() || p == d->opening_head()) return true;
    }
    return false;
}

Tile Level::voxel(Vec3 p) const {
    if (dims_.contains(p)) return at(p);
    if (is_door_opening(p)) return Tile::kAir;
    return Tile::kBorder;
}

void Level::set_doors(Door entrance, Door exit) {
    if (!is_valid_door(entrance, dims_) || !is_valid_door(exit, dims_)) {
        throw std::invalid_argument("door position is not on a side wall");
    }
    if (!is_valid_door_pair(entrance, exit)) {
        throw std::invalid_argument("doors overlap or share an edge");
    }
    entrance.role = DoorRole::kEntrance;
    exit.role = DoorRole::kExit;
    doors_ = std::make_pair(entrance, exit);
}

int Level::count(Tile t) const { return static_cast<int>(std::count(tiles_.begin(), tiles_.end(), t)); }

Level new_level(Dims dims, const InitSpec& init) {
    Level level(dims);
    if (init.mode == InitSpec::Mode::kUniformRandom) {
        if (!(init.solid_probability >= 0.0 && init.solid_probability <= 1.0)) {
            throw std::invalid_argument("solid_probability must lie in [0, 1]");
        }
        Rng rng(init.seed);
        for (int i = 0; i < level.volume(); ++i) {
            level.set(i, rng.uniform01() < init.solid_probability ? Tile::kSolid : Tile::kAir);
        }
    }
    return level;
}

double emptiness(const Level& level) {
    return static_cast<double>(level.count(Tile::kAir)) / static_cast<double>(level.volume());
}

int hamming_distance(const Level& a, const Level& b) {
    if (a.dims() != b.dims()) throw std::invalid_argument("hamming_distance: dims differ");
    int d = 0;
    const auto ta = a.tiles();
    const auto tb = b.tiles();
    for (std::size_t i = 0; i < ta.size(); ++i) d += ta[i] != tb[i] ? 1 : 0;
    return d;
}

}  // namespace voxpcg
