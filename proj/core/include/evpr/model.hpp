#pragma once

#include <string>
#include <vector>

#include "evpr/lif.hpp"
#include "evpr/ops.hpp"
#include "evpr/rng.hpp"

namespace evpr {

struct ArchConfig {
    std::vector<int> channels{32, 64, 128, 128};
    std::vector<int> strides{2, 2, 2, 2};
    int kernel = 3;
    int timesteps = 50;
    int latent_dim = 64;
    int excitation_dim = 16;
    int input_hw = 128;
    int input_channels = 2;
    int num_classes = 16;
    int classifier_hidden = 64;
    double integrator_decay = 0.9;
    // init gain on the spiking conv weights; unit-gain Kaiming leaves the
    // LIF stack silent at threshold 1 on sparse binary frames
    double snn_init_gain = 6.0;

    void validate() const;
    int padding() const { return kernel / 2; }
    // spatial side lengths: [input_hw, after conv0, after conv1, ...]
    std::vector<int> feature_sizes() const;
    int encoder_flat_dim() const;
    int inhibition_dim() const { return latent_dim - excitation_dim; }
};

struct NamedParam {
    std::string name;
    TensorPtr tensor;
};

// Spiking convolutional encoder -> Gaussian latent heads -> transposed
// convolutional decoder, plus the excitation/inhibition classifier heads.
// The latent vector is partitioned positionally: dimensions [0,k) are the
// excitation block, [k,latent_dim) the inhibition block.
class GvaeModel {
public:
    GvaeModel(ArchConfig arch, LifParams lif);

    void init_params(Rng& rng);  // Kaiming-uniform weights, zero biases

    const ArchConfig& arch() const { return arch_; }
    const LifParams& lif_params() const { return lif_; }

    struct EncodeResult {
        TensorPtr mu;      // [N, latent_dim]
        TensorPtr logvar;  // [N, latent_dim]
    };

    // frames_by_step: timesteps tensors of shape [N,C,H,W]. Each timestep
    // drives the conv+LIF stack; a non-spiking leaky integrator pools the
    // last layer's spikes, and two linear heads read out mu / logvar.
    EncodeResult encode(Graph& g, const std::vector<TensorPtr>& frames_by_step,
                        SpikeMode mode = SpikeMode::binary) const;

    // z = mu + exp(0.5*logvar) * eps
    TensorPtr reparameterize(Graph& g, const TensorPtr& mu, const TensorPtr& logvar,
                             const TensorPtr& eps) const;

    // z:[N,latent_dim] -> [N,C,H,W] in (0,1)
    TensorPtr decode(Graph& g, const TensorPtr& z) const;

    TensorPtr classify_excitation(Graph& g, const TensorPtr& z_exc) const;
    TensorPtr classify_inhibition(Graph& g, const TensorPtr& z_inh) const;

    TensorPtr excitation_slice(Graph& g, const TensorPtr& z) const;
    TensorPtr inhibition_slice(Graph& g, const TensorPtr& z) const;

    std::vector<TensorPtr> encoder_params() const;
    std::vector<TensorPtr> decoder_params() const;
    std::vector<TensorPtr> excitation_params() const;
    std::vector<TensorPtr> inhibition_params() const;
    std::vector<TensorPtr> main_params() const;  // encoder + decoder + excitation head
    std::vector<TensorPtr> all_params() const;
    std::vector<NamedParam> named_params() const;
    TensorPtr param(const std::string& name) const;

    int64_t param_count() const;
    int64_t neuron_count() const;

private:
    ArchConfig arch_;
    LifParams lif_;

    std::vector<TensorPtr> conv_w_, conv_b_;
    TensorPtr mu_w_, mu_b_, logvar_w_, logvar_b_;
    TensorPtr dec_fc_w_, dec_fc_b_;
    std::vector<TensorPtr> dect_w_, dect_b_;  // in application order, latent side first
    TensorPtr exc_w1_, exc_b1_, exc_w2_, exc_b2_;
    TensorPtr inh_w1_, inh_b1_, inh_w2_, inh_b2_;

    std::vector<int> dect_output_padding_;
};

void freeze(const std::vector<TensorPtr>& params);
void unfreeze(const std::vector<TensorPtr>& params);
void zero_grads(const std::vector<TensorPtr>& params);

}  // namespace evpr
