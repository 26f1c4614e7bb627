#include "evpr/probe.hpp"

#include <algorithm>

#include "evpr/adam.hpp"
#include "evpr/errors.hpp"
#include "evpr/graph.hpp"
#include "evpr/ops.hpp"
#include "evpr/rng.hpp"

namespace evpr {

namespace {

double accuracy_of(const TensorPtr& logits, const std::vector<int>& labels) {
    const std::vector<int> pred = argmax_rows(*logits);
    int hits = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (pred[i] == labels[i]) ++hits;
    }
    return labels.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(labels.size());
}

TensorPtr rows_subset(const TensorPtr& x, const std::vector<int>& rows) {
    const int d = x->shape[1];
    auto out = Tensor::zeros({static_cast<int>(rows.size()), d});
    for (size_t r = 0; r < rows.size(); ++r) {
        std::copy_n(x->value.begin() + static_cast<ptrdiff_t>(rows[r]) * d, d,
                    out->value.begin() + static_cast<ptrdiff_t>(r) * d);
    }
    return out;
}

}  // namespace

TensorPtr feature_block(const TensorPtr& x, int c0, int c1) {
    if (x->shape.size() != 2) throw ShapeError("feature_block: need a [n,d] matrix");
    Graph g;  // throwaway; the slice is a constant
    return slice_cols(g, x, c0, c1);
}

ProbeResult train_probe(const TensorPtr& train_x, const std::vector<int>& train_y,
                        const TensorPtr& eval_x, const std::vector<int>& eval_y,
                        int num_classes, const ProbeConfig& cfg) {
    if (train_x->shape.size() != 2 || train_x->shape[0] != static_cast<int>(train_y.size())) {
        throw ShapeError("train_probe: features/labels disagree");
    }
    const int dim = train_x->shape[1];
    if (eval_x->shape.size() != 2 || eval_x->shape[1] != dim) {
        throw ShapeError("train_probe: eval features must be [n," + std::to_string(dim) + "]");
    }

    Rng rng(cfg.seed);
    auto make_w = [&rng](int rows, int cols) {
        const double bound = std::sqrt(6.0 / cols);
        return Tensor::rand_uniform({rows, cols}, rng, bound, true);
    };
    TensorPtr w1 = make_w(cfg.hidden, dim);
    TensorPtr b1 = Tensor::zeros({cfg.hidden}, true);
    TensorPtr w2 = make_w(num_classes, cfg.hidden);
    TensorPtr b2 = Tensor::zeros({num_classes}, true);
    const std::vector<TensorPtr> params{w1, b1, w2, b2};

    auto forward = [&](Graph& g, const TensorPtr& x) {
        return linear(g, relu(g, linear(g, x, w1, b1)), w2, b2);
    };

    Adam opt({cfg.lr});
    const int n = static_cast<int>(train_y.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;

    ProbeResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int count = std::min(cfg.batch_size, n - start);
            std::vector<int> rows(order.begin() + start, order.begin() + start + count);
            std::vector<int> labels(count);
            for (int i = 0; i < count; ++i) labels[i] = train_y[rows[i]];

            Graph g;
            TensorPtr logits = forward(g, rows_subset(train_x, rows));
            TensorPtr loss = ce_logits_mean(g, logits, one_hot_rows(labels, num_classes));
            g.backward(loss);
            opt.step(params);
            for (const auto& p : params) p->grad.clear();
            result.final_loss = loss->item();
        }
    }

    for (const auto& p : params) p->requires_grad = false;
    {
        Graph g;
        result.train_accuracy = accuracy_of(forward(g, train_x), train_y);
    }
    {
        Graph g;
        result.eval_accuracy = accuracy_of(forward(g, eval_x), eval_y);
    }
    return result;
}

}  // namespace evpr
