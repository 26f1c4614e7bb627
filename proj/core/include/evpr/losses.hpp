#pragma once

#include "evpr/ops.hpp"
#include "evpr/samples.hpp"

namespace evpr {

// Uniform "no target" distribution over the arena cells; the adversarial
// target for the inhibition branch.
struct UniformTarget {
    int num_classes = 16;

    TensorPtr rows(int n) const { return uniform_rows(n, num_classes); }
};

// Time aggregation of a sample's frames (elementwise max over T, scaled by
// the clip cap so values land in [0,1]); the decoder's reconstruction
// target. Constant w.r.t. the graph.
TensorPtr reconstruction_target(const SampleDataset& ds, const std::vector<int>& indices,
                                int clip_cap = 1);

struct VaeLossParts {
    TensorPtr total;  // recon + beta * kl
    TensorPtr recon;  // BCE summed over pixels, batch mean
    TensorPtr kl;     // 0.5*sum(mu^2 + e^logvar - 1 - logvar), batch mean
};

VaeLossParts beta_vae_loss(Graph& g, const TensorPtr& recon, const TensorPtr& target,
                           const TensorPtr& mu, const TensorPtr& logvar, double beta);

// Softmax cross entropy against the true cell labels, batch mean.
TensorPtr excitation_loss(Graph& g, const TensorPtr& logits, const std::vector<int>& labels,
                          int num_classes);

struct InhibitionLosses {
    TensorPtr classifier_loss;   // CE vs the true label; updates the classifier phase
    TensorPtr encoder_adv_loss;  // CE vs the uniform target; updates the encoder phase
};

// Both adversarial readings of the inhibition logits. Gradient routing is
// done by the caller freezing the counterpart's parameters per phase.
InhibitionLosses inhibition_losses(Graph& g, const TensorPtr& logits, const std::vector<int>& labels,
                                   const UniformTarget& uniform);

struct OverallWeights {
    double lambda_exc = 1.0;
    double lambda_inh_adv = 1.0;
};

// L = L_betaVAE + lambda_exc * L_exc + lambda_inh_adv * L_inh(encoder phase).
// Null parts are skipped, which is exactly the unguided ablation.
TensorPtr overall_loss(Graph& g, const TensorPtr& beta_vae_total, const TensorPtr& exc_loss,
                       const TensorPtr& inh_encoder_adv_loss, const OverallWeights& w);

}  // namespace evpr
