#include <benchmark/benchmark.h>

#include "voxpcg/nca.hpp"
#include "voxpcg/rng.hpp"
#include "voxpcg/traverse.hpp"

using namespace voxpcg;

namespace {

GeneratorParams random_params(std::uint64_t seed) {
    GeneratorParams p;
    p.arch = NcaArchitecture{TaskKind::kDiameter, 32};
    Rng rng(seed);
    p.theta.resize(param_count(p.arch));
    for (auto& t : p.theta) t = static_cast<float>(rng.normal(0.0, 0.5));
    return p;
}

Level random_level(int side, std::uint64_t seed) { return new_level({side, side, side}, InitSpec::uniform(0.5, seed)); }

void BM_NcaForward(benchmark::State& state) {
    const auto p = random_params(1);
    const NcaModel model(p);
    const auto in = encode_onehot(random_level(static_cast<int>(state.range(0)), 2), p.arch);
    for (auto _ : state) benchmark::DoNotOptimize(model.forward(in));
}

void BM_NcaForwardReference(benchmark::State& state) {
    const auto p = random_params(1);
    const auto in = encode_onehot(random_level(static_cast<int>(state.range(0)), 2), p.arch);
    for (auto _ : state) benchmark::DoNotOptimize(reference::nca_forward(p, in));
}

void BM_Diameter(benchmark::State& state) {
    const auto g = build_move_graph(random_level(static_cast<int>(state.range(0)), 3));
    for (auto _ : state) benchmark::DoNotOptimize(diameter(g));
}

void BM_DiameterSerial(benchmark::State& state) {
    const auto g = build_move_graph(random_level(static_cast<int>(state.range(0)), 3));
    for (auto _ : state) benchmark::DoNotOptimize(serial::diameter(g));
}

void BM_Rollout(benchmark::State& state) {
    const auto p = random_params(4);
    const NcaModel model(p);
    const Level init = random_level(7, 5);
    for (auto _ : state) benchmark::DoNotOptimize(rollout(model, init, 50));
}

}  // namespace

BENCHMARK(BM_NcaForward)->Arg(7)->Arg(15);
BENCHMARK(BM_NcaForwardReference)->Arg(7)->Arg(15);
BENCHMARK(BM_Diameter)->Arg(7)->Arg(11);
BENCHMARK(BM_DiameterSerial)->Arg(7)->Arg(11);
BENCHMARK(BM_Rollout);

BENCHMARK_MAIN();
