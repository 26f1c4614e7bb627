#include "evpr/lif.hpp"

#include <cmath>

#include "evpr/errors.hpp"
#include "evpr/ops.hpp"

namespace evpr {

void LifParams::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw ConfigError("lif: alpha must be in (0,1], got " + std::to_string(alpha));
    }
    if (!(threshold > 0.0)) {
        throw ConfigError("lif: threshold must be > 0, got " + std::to_string(threshold));
    }
    if (!(surrogate_slope > 0.0)) {
        throw ConfigError("lif: surrogate_slope must be > 0, got " + std::to_string(surrogate_slope));
    }
}

double surrogate_derivative(double u, double slope) {
    const double d = 1.0 + slope * std::abs(u);
    return 1.0 / (d * d);
}

TensorPtr spike(Graph& g, const TensorPtr& u, double slope, SpikeMode mode) {
    auto out = Tensor::zeros(u->shape);
    const int64_t n = u->numel();
    if (mode == SpikeMode::binary) {
        for (int64_t i = 0; i < n; ++i) out->value[i] = u->value[i] >= 0.0 ? 1.0 : 0.0;
    } else {
        for (int64_t i = 0; i < n; ++i) {
            const double x = u->value[i];
            out->value[i] = x / (1.0 + slope * std::abs(x));
        }
    }
    return g.record("spike", {u}, out, [slope](const Node& nd) {
        const auto& go = nd.output->grad;
        const auto& x = nd.inputs[0]->value;
        nd.inputs[0]->ensure_grad();
        auto& gi = nd.inputs[0]->grad;
        for (size_t i = 0; i < go.size(); ++i) gi[i] += go[i] * surrogate_derivative(x[i], slope);
    });
}

LifStepResult lif_step(Graph& g, const TensorPtr& v, const TensorPtr& drive, const LifParams& p,
                       SpikeMode mode) {
    if (v->shape != drive->shape) {
        throw ShapeError("lif_step: membrane shape " + shape_str(v->shape) +
                         " != drive shape " + shape_str(drive->shape));
    }
    p.validate();

    TensorPtr v_pre = add(g, scale(g, v, p.alpha), drive);
    TensorPtr u = add_scalar(g, v_pre, -p.threshold);
    TensorPtr s = spike(g, u, p.surrogate_slope, mode);

    TensorPtr v_next;
    if (p.reset == ResetMode::subtract) {
        v_next = sub(g, v_pre, scale(g, s, p.threshold));
    } else {
        // v_pre * (1 - spikes)
        TensorPtr keep = add_scalar(g, scale(g, s, -1.0), 1.0);
        v_next = mul(g, v_pre, keep);
    }
    return {s, v_next};
}

std::vector<TensorPtr> lif_unroll(Graph& g, const std::vector<TensorPtr>& drives, const LifParams& p,
                                  SpikeMode mode) {
    if (drives.empty()) throw ShapeError("lif_unroll: drive sequence is empty");
    TensorPtr v = Tensor::zeros(drives[0]->shape);
    std::vector<TensorPtr> spikes;
    spikes.reserve(drives.size());
    for (const auto& d : drives) {
        LifStepResult r = lif_step(g, v, d, p, mode);
        spikes.push_back(r.spikes);
        v = r.v_next;
    }
    return spikes;
}

}  // namespace evpr
