#pragma once

#include <string>

#include <json.hpp>

#include "voxpcg/level.hpp"

namespace voxpcg {

using Json = nlohmann::ordered_json;

/// {"dims":[w,h,d],"tiles":[...],"doors":[{"wall","foot","role"}...]}
/// Tiles are interior only, x fastest, then z, then y.
Json level_to_json(const Level& level);
Level level_from_json(const Json& j);

Json door_to_json(const Door& d);
Door door_from_json(const Json& j);

std::string encode_level(const Level& level);
Level decode_level(const std::string& text);

}  // namespace voxpcg
