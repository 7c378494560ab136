#include "voxpcg/nca.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace voxpcg {

std::vector<Tile> NcaArchitecture::tiles() const { return default_task(task).action_tiles; }

int NcaArchitecture::in_channels() const { return static_cast<int>(tiles().size()) + (door_channel() ? 1 : 0); }

int NcaArchitecture::out_channels() const { return static_cast<int>(tiles().size()); }

ParamLayout ParamLayout::of(int in, int hidden, int out) {
    ParamLayout l{};
    const auto i = static_cast<std::size_t>(in), h = static_cast<std::size_t>(hidden),
               o = static_cast<std::size_t>(out);
    l.w1 = 0;
    l.b1 = l.w1 + h * i * kKernelTaps;
    l.w2 = l.b1 + h;
    l.b2 = l.w2 + h * h;
    l.w3 = l.b2 + h;
    l.b3 = l.w3 + o * h;
    l.total = l.b3 + o;
    return l;
}

std::size_t param_count(int in_channels, int hidden, int out_channels) {
    return ParamLayout::of(in_channels, hidden, out_channels).total;
}

std::size_t param_count(const NcaArchitecture& arch) {
    return param_count(arch.in_channels(), arch.hidden, arch.out_channels());
}

void GeneratorParams::validate() const {
    if (arch.hidden < 1) throw std::invalid_argument("NCA hidden width must be >= 1");
    if (theta.size() != param_count(arch)) {
        throw std::invalid_argument(
            fmt::format("params hold {} values, architecture needs {}", theta.size(), param_count(arch)));
    }
}

OneHotGrid encode_onehot(const Level& level, const NcaArchitecture& arch) {
    const auto tiles = arch.tiles();
    OneHotGrid g;
    g.dims = level.dims();
    g.channels = arch.in_channels();
    g.data.assign(static_cast<std::size_t>(level.volume() * g.channels), 0.0f);
    for (int i = 0; i < level.volume(); ++i) {
        const auto it = std::find(tiles.begin(), tiles.end(), level.at(i));
        if (it == tiles.end()) throw std::invalid_argument("level holds a tile outside the NCA's tile set");
        g.data[static_cast<std::size_t>(i * g.channels) + static_cast<std::size_t>(it - tiles.begin())] = 1.0f;
    }
    if (arch.door_channel() && level.doors()) {
        const int c = g.channels - 1;
        for (const Door* d : {&level.doors()->first, &level.doors()->second}) {
            for (const Vec3 p : {d->foot, d->foot + Vec3{0, 1, 0}}) {
                g.data[static_cast<std::size_t>(level.index(p) * g.channels + c)] = 1.0f;
            }
        }
    }
    return g;
}

NcaModel::NcaModel(const GeneratorParams& params) : arch_(params.arch) {
    params.validate();
    in_ = arch_.in_channels();
    hidden_ = arch_.hidden;
    out_ = arch_.out_channels();
    const auto L = ParamLayout::of(in_, hidden_, out_);
    const auto H = static_cast<std::size_t>(hidden_), C = static_cast<std::size_t>(in_),
               O = static_cast<std::size_t>(out_);
    const float* t = params.theta.data();
    w1t_.resize(C * kKernelTaps * H);
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t k = 0; k < kKernelTaps; ++k) {
                w1t_[(c * kKernelTaps + k) * H + h] = t[L.w1 + (h * C + c) * kKernelTaps + k];
            }
        }
    }
    b1_.assign(t + L.b1, t + L.b1 + H);
    w2t_.resize(H * H);
    for (std::size_t o = 0; o < H; ++o) {
        for (std::size_t i = 0; i < H; ++i) w2t_[i * H + o] = t[L.w2 + o * H + i];
    }
    b2_.assign(t + L.b2, t + L.b2 + H);
    w3t_.resize(H * O);
    for (std::size_t o = 0; o < O; ++o) {
        for (std::size_t i = 0; i < H; ++i) w3t_[i * O + o] = t[L.w3 + o * H + i];
    }
    b3_.assign(t + L.b3, t + L.b3 + O);
}

std::vector<float> NcaModel::forward(const OneHotGrid& input) const {
    if (input.channels != in_) throw std::invalid_argument("NCA input channel count mismatch");
    const Dims d = input.dims;
    if (input.data.size() != static_cast<std::size_t>(d.volume() * in_)) {
        throw std::invalid_argument("NCA input size does not match its dims");
    }
    const int V = d.volume();
    const auto H = static_cast<std::size_t>(hidden_), O = static_cast<std::size_t>(out_),
               C = static_cast<std::size_t>(in_);
    std::vector<float> out(static_cast<std::size_t>(V) * O);
#pragma omp parallel
    {
        std::vector<double> h1(H), h2(H), acc(O);
#pragma omp for schedule(static)
        for (int v = 0; v < V; ++v) {
            const int x = v % d.width;
            const int rest = v / d.width;
            const int z = rest % d.depth;
            const int y = rest / d.depth;
            std::copy(b1_.begin(), b1_.end(), h1.begin());
            for (int dy = -1; dy <= 1; ++dy) {
                const int ny = y + dy;
                if (ny < 0 || ny >= d.height) continue;
                for (int dz = -1; dz <= 1; ++dz) {
                    const int nz = z + dz;
                    if (nz < 0 || nz >= d.depth) continue;
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx;
                        if (nx < 0 || nx >= d.width) continue;
                        const std::size_t k = static_cast<std::size_t>(kernel_tap(dx, dy, dz));
                        const float* in = &input.data[static_cast<std::size_t>(nx + d.width * (nz + d.depth * ny)) * C];
                        for (std::size_t c = 0; c < C; ++c) {
                            const double a = in[c];
                            if (a == 0.0) continue;
                            const float* w = &w1t_[(c * kKernelTaps + k) * H];
                            for (std::size_t h = 0; h < H; ++h) h1[h] += a * w[h];
                        }
                    }
                }
            }
            std::copy(b2_.begin(), b2_.end(), h2.begin());
            for (std::size_t i = 0; i < H; ++i) {
                const double a = h1[i] > 0.0 ? h1[i] : 0.0;
                if (a == 0.0) continue;
                const float* w = &w2t_[i * H];
                for (std::size_t o = 0; o < H; ++o) h2[o] += a * w[o];
            }
            std::copy(b3_.begin(), b3_.end(), acc.begin());
            for (std::size_t i = 0; i < H; ++i) {
                const double a = h2[i] > 0.0 ? h2[i] : 0.0;
                if (a == 0.0) continue;
                const float* w = &w3t_[i * O];
                for (std::size_t o = 0; o < O; ++o) acc[o] += a * w[o];
            }
            float* dst = &out[static_cast<std::size_t>(v) * O];
            for (std::size_t o = 0; o < O; ++o) dst[o] = static_cast<float>(1.0 / (1.0 + std::exp(-acc[o])));
        }
    }
    return out;
}

void apply_argmax(std::span<const float> outputs, const NcaArchitecture& arch, Level& level) {
    const auto tiles = arch.tiles();
    const std::size_t O = tiles.size();
    if (outputs.size() != static_cast<std::size_t>(level.volume()) * O) {
        throw std::invalid_argument("NCA output size does not match the level");
    }
    for (int v = 0; v < level.volume(); ++v) {
        const float* o = &outputs[static_cast<std::size_t>(v) * O];
        std::size_t best = 0;
        for (std::size_t c = 1; c < O; ++c) {
            if (o[c] > o[best]) best = c;
        }
        level.set(v, tiles[best]);
    }
}

Level NcaModel::step(const Level& level) const {
    const auto outputs = forward(encode_onehot(level, arch_));
    Level next = level;
    apply_argmax(outputs, arch_, next);
    return next;
}

std::vector<float> nca_forward(const GeneratorParams& params, const OneHotGrid& input) {
    return NcaModel(params).forward(input);
}

Level nca_step(const GeneratorParams& params, const Level& level) { return NcaModel(params).step(level); }

Level rollout(const NcaModel& model, const Level& initial, int steps) {
    if (steps < 0) throw std::invalid_argument("rollout steps must be >= 0");
    Level current = initial;
    for (int s = 0; s < steps; ++s) {
        Level next = model.step(current);
        if (next == current) break;
        current = std::move(next);
    }
    return current;
}

Level rollout(const GeneratorParams& params, const Level& initial, int steps) {
    return rollout(NcaModel(params), initial, steps);
}

namespace {

constexpr std::array<char, 4> kMagic{'V', 'N', 'C', 'A'};

void put_u32(std::ofstream& os, std::uint32_t v) {
    std::array<unsigned char, 4> b{static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                   static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b.data()), 4);
}

std::uint32_t get_u32(std::ifstream& is) {
    std::array<unsigned char, 4> b{};
    is.read(reinterpret_cast<char*>(b.data()), 4);
    if (!is) throw std::runtime_error("params file truncated");
    return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) | (std::uint32_t{b[3]} << 24);
}

}  // namespace

void save_params(const std::filesystem::path& path, const GeneratorParams& params) {
    params.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    os.write(kMagic.data(), kMagic.size());
    put_u32(os, kParamsLayoutVersion);
    put_u32(os, static_cast<std::uint32_t>(params.arch.task));
    put_u32(os, static_cast<std::uint32_t>(params.arch.in_channels()));
    put_u32(os, static_cast<std::uint32_t>(params.arch.hidden));
    put_u32(os, static_cast<std::uint32_t>(params.arch.out_channels()));
    put_u32(os, static_cast<std::uint32_t>(params.theta.size()));
    for (float f : params.theta) put_u32(os, std::bit_cast<std::uint32_t>(f));
}

GeneratorParams load_params(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error(fmt::format("cannot open params file {}", path.string()));
    std::array<char, 4> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kMagic) throw std::runtime_error(fmt::format("{} is not a params file", path.string()));
    if (get_u32(is) != kParamsLayoutVersion) throw std::runtime_error("unsupported params layout version");
    GeneratorParams p;
    const auto task = get_u32(is);
    if (task > 2) throw std::runtime_error("params file names an unknown task");
    p.arch.task = static_cast<TaskKind>(task);
    const auto in = get_u32(is);
    p.arch.hidden = static_cast<int>(get_u32(is));
    const auto out = get_u32(is);
    const auto count = get_u32(is);
    if (static_cast<int>(in) != p.arch.in_channels() || static_cast<int>(out) != p.arch.out_channels()) {
        throw std::runtime_error("params header channel counts disagree with the task");
    }
    p.theta.resize(count);
    for (auto& f : p.theta) f = std::bit_cast<float>(get_u32(is));
    p.validate();
    return p;
}

void save_params_with_sidecar(const std::filesystem::path& path, const GeneratorParams& params, const Json& metadata) {
    save_params(path, params);
    Json side;
    side["layout_version"] = kParamsLayoutVersion;
    side["task"] = task_name(params.arch.task);
    side["in_channels"] = params.arch.in_channels();
    side["hidden"] = params.arch.hidden;
    side["out_channels"] = params.arch.out_channels();
    side["param_count"] = params.theta.size();
    side["metadata"] = metadata;
    std::ofstream os(path.string() + ".json");
    if (!os) throw std::runtime_error(fmt::format("cannot write sidecar for {}", path.string()));
    os << side.dump(2) << '\n';
}

}  // namespace voxpcg
