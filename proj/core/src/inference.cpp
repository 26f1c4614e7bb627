#include "evpr/inference.hpp"

#include <algorithm>

#include "evpr/errors.hpp"

namespace evpr {

namespace {

// evaluation never needs the tape; dropping requires_grad keeps forward
// passes from recording nodes
struct FrozenScope {
    std::vector<TensorPtr> params;
    std::vector<bool> saved;
    explicit FrozenScope(const GvaeModel& m) : params(m.all_params()) {
        saved.reserve(params.size());
        for (auto& p : params) {
            saved.push_back(p->requires_grad);
            p->requires_grad = false;
        }
    }
    ~FrozenScope() {
        for (size_t i = 0; i < params.size(); ++i) params[i]->requires_grad = saved[i];
    }
};

}  // namespace

TensorPtr encode_dataset_mu(const GvaeModel& model, const SampleDataset& ds, int batch_size) {
    if (ds.samples.empty()) throw ConfigError("encode_dataset_mu: dataset is empty");
    if (batch_size < 1) throw ConfigError("encode_dataset_mu: batch_size must be >= 1");
    const int n = static_cast<int>(ds.samples.size());
    const int latent = model.arch().latent_dim;

    FrozenScope frozen(model);
    auto mu_all = Tensor::zeros({n, latent});
    for (int start = 0; start < n; start += batch_size) {
        const int count = std::min(batch_size, n - start);
        std::vector<int> idx(count);
        for (int i = 0; i < count; ++i) idx[i] = start + i;
        Graph g;
        auto enc = model.encode(g, batch_timesteps(ds, idx));
        std::copy(enc.mu->value.begin(), enc.mu->value.end(),
                  mu_all->value.begin() + static_cast<ptrdiff_t>(start) * latent);
    }
    return mu_all;
}

double excitation_accuracy(const GvaeModel& model, const SampleDataset& ds, int batch_size) {
    TensorPtr mu = encode_dataset_mu(model, ds, batch_size);
    FrozenScope frozen(model);
    Graph g;
    TensorPtr logits = model.classify_excitation(g, model.excitation_slice(g, mu));
    const std::vector<int> pred = argmax_rows(*logits);
    int hits = 0;
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        if (pred[i] == ds.samples[i].cell) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ds.samples.size());
}

}  // namespace evpr
