#include <cmath>
#include <stdexcept>

#include "voxpcg/nca.hpp"

namespace voxpcg::reference {

std::vector<float> nca_forward(const GeneratorParams& params, const OneHotGrid& input) {
    params.validate();
    const int C = params.arch.in_channels();
    const int H = params.arch.hidden;
    const int O = params.arch.out_channels();
    if (input.channels != C) throw std::invalid_argument("NCA input channel count mismatch");
    const auto L = ParamLayout::of(C, H, O);
    const auto& t = params.theta;
    const Dims d = input.dims;
    const int V = d.volume();
    auto in_at = [&](int x, int y, int z, int c) -> float {
        if (x < 0 || y < 0 || z < 0 || x >= d.width || y >= d.height || z >= d.depth) return 0.0f;
        return input.data[static_cast<std::size_t>((x + d.width * (z + d.depth * y)) * C + c)];
    };

    std::vector<double> h1(static_cast<std::size_t>(V * H));
    for (int y = 0; y < d.height; ++y)
        for (int z = 0; z < d.depth; ++z)
            for (int x = 0; x < d.width; ++x) {
                const int v = x + d.width * (z + d.depth * y);
                for (int h = 0; h < H; ++h) {
                    double acc = t[L.b1 + static_cast<std::size_t>(h)];
                    for (int c = 0; c < C; ++c)
                        for (int ky = -1; ky <= 1; ++ky)
                            for (int kz = -1; kz <= 1; ++kz)
                                for (int kx = -1; kx <= 1; ++kx) {
                                    const auto w = t[L.w1 + static_cast<std::size_t>((h * C + c) * kKernelTaps +
                                                                                      kernel_tap(kx, ky, kz))];
                                    acc += static_cast<double>(w) * in_at(x + kx, y + ky, z + kz, c);
                                }
                    h1[static_cast<std::size_t>(v * H + h)] = std::max(acc, 0.0);
                }
            }

    std::vector<double> h2(static_cast<std::size_t>(V * H));
    for (int v = 0; v < V; ++v)
        for (int o = 0; o < H; ++o) {
            double acc = t[L.b2 + static_cast<std::size_t>(o)];
            for (int i = 0; i < H; ++i) acc += t[L.w2 + static_cast<std::size_t>(o * H + i)] * h1[static_cast<std::size_t>(v * H + i)];
            h2[static_cast<std::size_t>(v * H + o)] = std::max(acc, 0.0);
        }

    std::vector<float> out(static_cast<std::size_t>(V * O));
    for (int v = 0; v < V; ++v)
        for (int o = 0; o < O; ++o) {
            double acc = t[L.b3 + static_cast<std::size_t>(o)];
            for (int i = 0; i < H; ++i) acc += t[L.w3 + static_cast<std::size_t>(o * H + i)] * h2[static_cast<std::size_t>(v * H + i)];
            out[static_cast<std::size_t>(v * O + o)] = static_cast<float>(1.0 / (1.0 + std::exp(-acc)));
        }
    return out;
}

}  // namespace voxpcg::reference
