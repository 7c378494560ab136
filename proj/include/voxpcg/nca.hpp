#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "voxpcg/level.hpp"
#include "voxpcg/level_json.hpp"
#include "voxpcg/tasks.hpp"

namespace voxpcg {

/// Three-layer 3D NCA: 3x3x3 conv (pad 1) + ReLU, 1x1x1 conv + ReLU,
/// 1x1x1 conv + sigmoid. Channels follow the task's action tiles; door
/// tasks add one input channel marking interior voxels beside a door
/// opening.
struct NcaArchitecture {
    TaskKind task = TaskKind::kDiameter;
    int hidden = 32;

    std::vector<Tile> tiles() const;
    bool door_channel() const { return task != TaskKind::kDiameter; }
    int in_channels() const;
    int out_channels() const;

    friend bool operator==(const NcaArchitecture&, const NcaArchitecture&) = default;
};

std::size_t param_count(int in_channels, int hidden, int out_channels);
std::size_t param_count(const NcaArchitecture& arch);

/// Offsets into theta. Layer order; each layer stores weights then bias.
/// Layer 1 weights are [hidden][in][27] with the 27 kernel taps ordered
/// x fastest, then z, then y (offsets -1..1). Layers 2 and 3 are
/// [out][in] row-major.
struct ParamLayout {
    std::size_t w1, b1, w2, b2, w3, b3, total;
    static ParamLayout of(int in_channels, int hidden, int out_channels);
};

inline constexpr int kKernelTaps = 27;

constexpr int kernel_tap(int dx, int dy, int dz) { return (dy + 1) * 9 + (dz + 1) * 3 + (dx + 1); }

struct GeneratorParams {
    NcaArchitecture arch;
    std::vector<float> theta;

    /// Throws when |theta| != param_count(arch).
    void validate() const;
    friend bool operator==(const GeneratorParams&, const GeneratorParams&) = default;
};

/// Voxel-major dense input: data[index * channels + c], interior storage
/// order.
struct OneHotGrid {
    Dims dims{};
    int channels = 0;
    std::vector<float> data;
};

OneHotGrid encode_onehot(const Level& level, const NcaArchitecture& arch);

/// Prepared weights for repeated steps. Layers run over voxels in parallel.
class NcaModel {
public:
    explicit NcaModel(const GeneratorParams& params);

    const NcaArchitecture& arch() const { return arch_; }

    /// Sigmoid outputs, voxel-major [index * out + c].
    std::vector<float> forward(const OneHotGrid& input) const;

    /// One update; tiles by argmax (ties to the lowest channel). Doors are
    /// carried over unchanged.
    Level step(const Level& level) const;

private:
    NcaArchitecture arch_;
    int in_ = 0, hidden_ = 0, out_ = 0;
    std::vector<float> w1t_;  // [in][27][hidden]
    std::vector<float> b1_;
    std::vector<float> w2t_;  // [hidden][hidden] (input-major)
    std::vector<float> b2_;
    std::vector<float> w3t_;  // [hidden][out] (input-major)
    std::vector<float> b3_;
};

std::vector<float> nca_forward(const GeneratorParams& params, const OneHotGrid& input);
Level nca_step(const GeneratorParams& params, const Level& level);

/// Applies `steps` updates. Stops early once a step reproduces its input,
/// since every later step would too.
Level rollout(const NcaModel& model, const Level& initial, int steps = 50);
Level rollout(const GeneratorParams& params, const Level& initial, int steps = 50);

/// Decodes sigmoid outputs into tiles for a level of the given dims.
void apply_argmax(std::span<const float> outputs, const NcaArchitecture& arch, Level& level);

namespace reference {
/// Straight nested-loop forward pass over the raw theta layout, serial.
std::vector<float> nca_forward(const GeneratorParams& params, const OneHotGrid& input);
}  // namespace reference

inline constexpr std::uint32_t kParamsLayoutVersion = 1;

/// Binary params file: "VNCA", u32 layout version, u32 task, u32 in,
/// u32 hidden, u32 out, u32 count, then count little-endian float32.
void save_params(const std::filesystem::path& path, const GeneratorParams& params);
GeneratorParams load_params(const std::filesystem::path& path);

/// Writes the binary file plus `<path>.json` with metadata.
void save_params_with_sidecar(const std::filesystem::path& path, const GeneratorParams& params, const Json& metadata);

}  // namespace voxpcg
