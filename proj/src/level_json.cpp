#include "voxpcg/level_json.hpp"

#include <stdexcept>

namespace voxpcg {

Json door_to_json(const Door& d) {
    Json j;
    j["wall"] = wall_name(d.wall);
    j["foot"] = Json::array({d.foot.x, d.foot.y, d.foot.z});
    j["role"] = d.role == DoorRole::kEntrance ? "entrance" : "exit";
    return j;
}

Door door_from_json(const Json& j) {
    Door d;
    d.wall = wall_from_name(j.at("wall").get<std::string>());
    const auto& f = j.at("foot");
    if (!f.is_array() || f.size() != 3) throw std::invalid_argument("door foot must be [x,y,z]");
    d.foot = {f[0].get<int>(), f[1].get<int>(), f[2].get<int>()};
    const auto role = j.at("role").get<std::string>();
    if (role == "entrance") {
        d.role = DoorRole::kEntrance;
    } else if (role == "exit") {
        d.role = DoorRole::kExit;
    } else {
        throw std::invalid_argument("door role must be 'entrance' or 'exit'");
    }
    return d;
}

Json level_to_json(const Level& level) {
    const Dims dims = level.dims();
    Json j;
    j["dims"] = Json::array({dims.width, dims.height, dims.depth});
    Json tiles = Json::array();
    for (Tile t : level.tiles()) tiles.push_back(tile_name(t));
    j["tiles"] = std::move(tiles);
    Json doors = Json::array();
    if (level.doors()) {
        doors.push_back(door_to_json(level.doors()->first));
        doors.push_back(door_to_json(level.doors()->second));
    }
    j["doors"] = std::move(doors);
    return j;
}

Level level_from_json(const Json& j) {
    const auto& d = j.at("dims");
    if (!d.is_array() || d.size() != 3) throw std::invalid_argument("dims must be [w,h,d]");
    Level level(Dims{d[0].get<int>(), d[1].get<int>(), d[2].get<int>()});
    const auto& tiles = j.at("tiles");
    if (!tiles.is_array() || static_cast<int>(tiles.size()) != level.volume()) {
        throw std::invalid_argument("tiles length does not match dims");
    }
    for (int i = 0; i < level.volume(); ++i) {
        level.set(i, tile_from_name(tiles[static_cast<std::size_t>(i)].get<std::string>()));
    }
    const auto& doors = j.at("doors");
    if (!doors.is_array() || (doors.size() != 0 && doors.size() != 2)) {
        throw std::invalid_argument("doors must hold zero or two entries");
    }
    if (doors.size() == 2) {
        Door a = door_from_json(doors[0]);
        Door b = door_from_json(doors[1]);
        if (a.role == DoorRole::kExit) std::swap(a, b);
        if (a.role != DoorRole::kEntrance || b.role != DoorRole::kExit) {
            throw std::invalid_argument("doors need one entrance and one exit");
        }
        level.set_doors(a, b);
    }
    return level;
}

std::string encode_level(const Level& level) { return level_to_json(level).dump(); }

Level decode_level(const std::string& text) { return level_from_json(Json::parse(text)); }

}  // namespace voxpcg
