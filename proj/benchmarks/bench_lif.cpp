#include <benchmark/benchmark.h>

#include "evpr/lif.hpp"
#include "evpr/ops.hpp"
#include "evpr/rng.hpp"

using namespace evpr;

static void BM_LifUnrollForward(benchmark::State& state) {
    const int timesteps = static_cast<int>(state.range(0));
    Rng rng(4);
    LifParams p;
    std::vector<TensorPtr> drives;
    for (int t = 0; t < timesteps; ++t) drives.push_back(Tensor::randn({16, 16, 16, 16}, rng, 0.5));
    for (auto _ : state) {
        Graph g;
        auto spikes = lif_unroll(g, drives, p);
        benchmark::DoNotOptimize(spikes.back()->value.data());
    }
    state.SetItemsProcessed(state.iterations() * timesteps * 16 * 16 * 16 * 16);
}
BENCHMARK(BM_LifUnrollForward)->Arg(10)->Arg(50);

static void BM_LifUnrollBackward(benchmark::State& state) {
    const int timesteps = static_cast<int>(state.range(0));
    Rng rng(5);
    LifParams p;
    std::vector<TensorPtr> drives;
    for (int t = 0; t < timesteps; ++t) {
        drives.push_back(Tensor::randn({16, 16, 16, 16}, rng, 0.5, true));
    }
    for (auto _ : state) {
        Graph g;
        auto spikes = lif_unroll(g, drives, p);
        TensorPtr total = spikes[0];
        for (size_t t = 1; t < spikes.size(); ++t) total = add(g, total, spikes[t]);
        g.backward(sum(g, total));
        for (auto& d : drives) d->grad.clear();
    }
}
BENCHMARK(BM_LifUnrollBackward)->Arg(10);
