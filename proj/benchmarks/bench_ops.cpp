#include <benchmark/benchmark.h>

#include "evpr/graph.hpp"
#include "evpr/ops.hpp"
#include "evpr/rng.hpp"

using namespace evpr;

static void BM_Conv2dForward(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(1);
    auto x = Tensor::randn({n, 16, 32, 32}, rng);
    auto w = Tensor::randn({32, 16, 3, 3}, rng);
    auto b = Tensor::zeros({32});
    for (auto _ : state) {
        Graph g;
        auto y = conv2d(g, x, w, b, 2, 1);
        benchmark::DoNotOptimize(y->value.data());
    }
    const int64_t macs = int64_t(n) * 32 * 16 * 16 * 16 * 9;
    state.SetItemsProcessed(state.iterations() * macs);
}
BENCHMARK(BM_Conv2dForward)->Arg(1)->Arg(8)->Arg(16);

static void BM_Conv2dTrainStep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(2);
    auto x = Tensor::randn({n, 16, 32, 32}, rng);
    auto w = Tensor::randn({32, 16, 3, 3}, rng, 0.05, true);
    auto b = Tensor::zeros({32}, true);
    for (auto _ : state) {
        Graph g;
        auto y = conv2d(g, x, w, b, 2, 1);
        auto loss = sum(g, mul(g, y, y));
        g.backward(loss);
        w->grad.clear();
        b->grad.clear();
        benchmark::DoNotOptimize(loss->value[0]);
    }
}
BENCHMARK(BM_Conv2dTrainStep)->Arg(8)->Arg(16);

static void BM_Linear(benchmark::State& state) {
    Rng rng(3);
    auto x = Tensor::randn({16, 1024}, rng);
    auto w = Tensor::randn({64, 1024}, rng);
    auto b = Tensor::zeros({64});
    for (auto _ : state) {
        Graph g;
        auto y = linear(g, x, w, b);
        benchmark::DoNotOptimize(y->value.data());
    }
}
BENCHMARK(BM_Linear);
