#include <benchmark/benchmark.h>

#include "evpr/retrieval.hpp"
#include "evpr/rng.hpp"

using namespace evpr;

namespace {

ReferenceDatabase random_db(int n, Rng& rng) {
    ReferenceDatabase db;
    db.seq_len = 5;
    db.dim = 16;
    for (int i = 0; i < n; ++i) {
        LatentSequence s;
        s.rows = 5;
        s.cols = 16;
        s.data.resize(80);
        for (double& v : s.data) v = rng.normal();
        s.x_m = 0.01 * i;
        db.sequences.push_back(std::move(s));
    }
    return db;
}

}  // namespace

static void BM_LocalizeScan(benchmark::State& state) {
    Rng rng(6);
    const ReferenceDatabase db = random_db(static_cast<int>(state.range(0)), rng);
    LatentSequence q = db.sequences[db.sequences.size() / 2];
    for (auto _ : state) {
        auto r = localize(q, db);
        benchmark::DoNotOptimize(r.index);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LocalizeScan)->Arg(1500)->Arg(15000);

BENCHMARK_MAIN();
