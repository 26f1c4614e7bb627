#include "evpr/gradcheck.hpp"

#include <cmath>

#include "evpr/rng.hpp"

namespace evpr {

namespace {

double weighted_eval(const GradCheckFn& fn, const std::vector<TensorPtr>& inputs,
                     const std::vector<double>& probe) {
    Graph g;
    TensorPtr out = fn(g, inputs);
    double acc = 0.0;
    for (size_t i = 0; i < out->value.size(); ++i) acc += probe[i] * out->value[i];
    return acc;
}

}  // namespace

double grad_check(const GradCheckFn& fn, const std::vector<TensorPtr>& inputs, GradCheckOptions opts) {
    // one forward to size the probe vector
    std::vector<double> probe;
    {
        Graph g;
        TensorPtr out = fn(g, inputs);
        Rng rng(opts.probe_seed);
        probe.resize(out->value.size());
        for (double& p : probe) p = rng.uniform(0.25, 1.0);
    }

    // AD gradients of the probe-weighted scalar
    for (const auto& in : inputs) {
        in->requires_grad = true;
        in->grad.clear();
    }
    {
        Graph g;
        TensorPtr out = fn(g, inputs);
        auto probe_t = Tensor::from(out->shape, probe);
        // weighted reduction recorded on the same tape
        auto weighted = Tensor::scalar(0.0);
        double acc = 0.0;
        for (size_t i = 0; i < out->value.size(); ++i) acc += probe[i] * out->value[i];
        weighted->value[0] = acc;
        g.record("probe_reduce", {out, probe_t}, weighted, [](const Node& nd) {
            const double go = nd.output->grad[0];
            auto& target = nd.inputs[0];
            const auto& w = nd.inputs[1]->value;
            if (!target->requires_grad) return;
            target->ensure_grad();
            for (size_t i = 0; i < w.size(); ++i) target->grad[i] += go * w[i];
        });
        g.backward(weighted);
    }

    double max_rel = 0.0;
    for (const auto& in : inputs) {
        for (size_t i = 0; i < in->value.size(); ++i) {
            const double saved = in->value[i];
            in->value[i] = saved + opts.fd_step;
            const double fp = weighted_eval(fn, inputs, probe);
            in->value[i] = saved - opts.fd_step;
            const double fm = weighted_eval(fn, inputs, probe);
            in->value[i] = saved;
            const double fd = (fp - fm) / (2.0 * opts.fd_step);
            const double ad = in->grad.empty() ? 0.0 : in->grad[i];
            const double rel = std::abs(ad - fd) / std::max(std::abs(fd), 1e-8);
            if (rel > max_rel) max_rel = rel;
        }
    }
    return max_rel;
}

}  // namespace evpr
