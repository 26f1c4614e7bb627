#include "evpr/losses.hpp"

#include <algorithm>

#include "evpr/errors.hpp"

namespace evpr {

TensorPtr reconstruction_target(const SampleDataset& ds, const std::vector<int>& indices, int clip_cap) {
    if (clip_cap < 1) throw ConfigError("reconstruction_target: clip_cap must be >= 1");
    const int n = static_cast<int>(indices.size());
    const int T = ds.frames_per_sample;
    const int C = ds.channels;
    const size_t plane = static_cast<size_t>(ds.height) * ds.width;
    const size_t per_step = static_cast<size_t>(C) * plane;

    auto target = Tensor::zeros({n, C, ds.height, ds.width});
    for (int b = 0; b < n; ++b) {
        const EventSample& s = ds.samples.at(indices[b]);
        double* dst = target->value.data() + per_step * b;
        for (int t = 0; t < T; ++t) {
            const uint8_t* src = s.frames.data() + per_step * t;
            for (size_t i = 0; i < per_step; ++i) {
                const double v = static_cast<double>(src[i]);
                if (v > dst[i]) dst[i] = v;
            }
        }
        if (clip_cap > 1) {
            const double inv = 1.0 / clip_cap;
            for (size_t i = 0; i < per_step; ++i) dst[i] = std::min(dst[i] * inv, 1.0);
        }
    }
    return target;
}

VaeLossParts beta_vae_loss(Graph& g, const TensorPtr& recon, const TensorPtr& target,
                           const TensorPtr& mu, const TensorPtr& logvar, double beta) {
    if (beta < 0.0) throw ConfigError("beta_vae_loss: beta must be >= 0");
    VaeLossParts parts;
    parts.recon = bce_sum_mean(g, recon, target);
    parts.kl = gaussian_kl_mean(g, mu, logvar);
    parts.total = add(g, parts.recon, scale(g, parts.kl, beta));
    return parts;
}

TensorPtr excitation_loss(Graph& g, const TensorPtr& logits, const std::vector<int>& labels,
                          int num_classes) {
    if (logits->shape.size() != 2 || logits->shape[0] != static_cast<int>(labels.size()) ||
        logits->shape[1] != num_classes) {
        throw ShapeError("excitation_loss: logits " + shape_str(logits->shape) + " do not match " +
                         std::to_string(labels.size()) + " labels x " + std::to_string(num_classes) +
                         " classes");
    }
    return ce_logits_mean(g, logits, one_hot_rows(labels, num_classes));
}

InhibitionLosses inhibition_losses(Graph& g, const TensorPtr& logits, const std::vector<int>& labels,
                                   const UniformTarget& uniform) {
    InhibitionLosses out;
    out.classifier_loss = excitation_loss(g, logits, labels, uniform.num_classes);
    out.encoder_adv_loss = ce_logits_mean(g, logits, uniform.rows(logits->shape[0]));
    return out;
}

TensorPtr overall_loss(Graph& g, const TensorPtr& beta_vae_total, const TensorPtr& exc_loss,
                       const TensorPtr& inh_encoder_adv_loss, const OverallWeights& w) {
    if (w.lambda_exc < 0.0 || w.lambda_inh_adv < 0.0) {
        throw ConfigError("overall_loss: loss weights must be >= 0");
    }
    TensorPtr total = beta_vae_total;
    if (exc_loss && w.lambda_exc > 0.0) total = add(g, total, scale(g, exc_loss, w.lambda_exc));
    if (inh_encoder_adv_loss && w.lambda_inh_adv > 0.0) {
        total = add(g, total, scale(g, inh_encoder_adv_loss, w.lambda_inh_adv));
    }
    return total;
}

}  // namespace evpr
