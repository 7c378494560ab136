#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "voxpcg/env.hpp"
#include "voxpcg/harness.hpp"
#include "voxpcg/level_json.hpp"
#include "voxpcg/qd.hpp"
#include "voxpcg/tasks.hpp"

namespace voxpcg {

/// Raised for anything the user can fix in a config file or flag.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The full defaults tree. Every accepted key appears here.
Json default_config();

/// Overlays `user` onto the defaults. Unknown keys and type changes throw
/// ConfigError. A null default accepts any value.
Json merge_config(const Json& defaults, const Json& user);

/// Applies `a.b.c=value`; value is parsed as JSON when it parses, else
/// taken as a string.
void apply_override(Json& config, std::string_view assignment);

Json load_config_file(const std::filesystem::path& path);

struct RunConfig {
    std::uint64_t seed = 0;
    TaskSpec task;
    EnvConfig env;
    int nca_hidden = 32;
    int nca_steps = 50;
    QdConfig qd;
    ControlSweepConfig control;
    std::string generator;
    OracleConfig oracle;
    std::filesystem::path out_dir;
};

/// Typed view of a merged tree. Throws ConfigError on bad values.
RunConfig parse_run_config(const Json& merged);

}  // namespace voxpcg
