#include "evpr/model.hpp"

#include <cmath>

#include "evpr/errors.hpp"

namespace evpr {

void ArchConfig::validate() const {
    if (channels.empty()) throw ConfigError("arch: channel list is empty");
    if (channels.size() != strides.size()) {
        throw ConfigError("arch: channels (" + std::to_string(channels.size()) + ") and strides (" +
                          std::to_string(strides.size()) + ") must have equal length");
    }
    for (int c : channels) {
        if (c < 1) throw ConfigError("arch: channel counts must be positive");
    }
    for (int s : strides) {
        if (s < 1) throw ConfigError("arch: strides must be >= 1");
    }
    if (kernel < 1 || kernel % 2 == 0) throw ConfigError("arch: kernel must be odd and positive");
    if (timesteps < 1) throw ConfigError("arch: timesteps must be >= 1");
    if (latent_dim < 2) throw ConfigError("arch: latent_dim must be >= 2");
    if (excitation_dim < 1 || excitation_dim >= latent_dim) {
        throw ConfigError("arch: excitation_dim must be in [1, latent_dim)");
    }
    if (input_hw < 1 || input_channels < 1) throw ConfigError("arch: input geometry must be positive");
    if (num_classes < 2) throw ConfigError("arch: num_classes must be >= 2");
    if (classifier_hidden < 1) throw ConfigError("arch: classifier_hidden must be >= 1");
    if (!(integrator_decay > 0.0 && integrator_decay < 1.0)) {
        throw ConfigError("arch: integrator_decay must be in (0,1)");
    }
    if (!(snn_init_gain > 0.0)) throw ConfigError("arch: snn_init_gain must be positive");
    const auto sizes = feature_sizes();
    if (sizes.back() < 4) {
        throw ConfigError("arch: conv stack reduces the map to " + std::to_string(sizes.back()) +
                          "; it must stay >= 4");
    }
}

std::vector<int> ArchConfig::feature_sizes() const {
    std::vector<int> sizes{input_hw};
    int h = input_hw;
    for (size_t i = 0; i < channels.size(); ++i) {
        h = (h + 2 * padding() - kernel) / strides[i] + 1;
        if (h < 1) {
            throw ConfigError("arch: conv layer " + std::to_string(i) +
                              " shrinks the map below 1 pixel");
        }
        sizes.push_back(h);
    }
    return sizes;
}

int ArchConfig::encoder_flat_dim() const {
    const int h = feature_sizes().back();
    return channels.back() * h * h;
}

GvaeModel::GvaeModel(ArchConfig arch, LifParams lif) : arch_(std::move(arch)), lif_(lif) {
    arch_.validate();
    lif_.validate();

    const int k = arch_.kernel;
    const int n = static_cast<int>(arch_.channels.size());
    const auto sizes = arch_.feature_sizes();

    auto zeros = [](const Shape& s) { return Tensor::zeros(s, true); };

    int cin = arch_.input_channels;
    for (int i = 0; i < n; ++i) {
        conv_w_.push_back(zeros({arch_.channels[i], cin, k, k}));
        conv_b_.push_back(zeros({arch_.channels[i]}));
        cin = arch_.channels[i];
    }

    const int flat = arch_.encoder_flat_dim();
    mu_w_ = zeros({arch_.latent_dim, flat});
    mu_b_ = zeros({arch_.latent_dim});
    logvar_w_ = zeros({arch_.latent_dim, flat});
    logvar_b_ = zeros({arch_.latent_dim});

    dec_fc_w_ = zeros({flat, arch_.latent_dim});
    dec_fc_b_ = zeros({flat});

    // transposed stack mirrors the conv stack; output_padding recovers the
    // exact encoder sizes layer by layer
    for (int j = 0; j < n; ++j) {
        const int enc_layer = n - 1 - j;  // conv layer being inverted
        const int c_in = arch_.channels[enc_layer];
        const int c_out = enc_layer == 0 ? arch_.input_channels : arch_.channels[enc_layer - 1];
        dect_w_.push_back(zeros({c_in, c_out, k, k}));
        dect_b_.push_back(zeros({c_out}));
        const int h_small = sizes[enc_layer + 1];
        const int h_big = sizes[enc_layer];
        const int base = (h_small - 1) * arch_.strides[enc_layer] - 2 * arch_.padding() + k;
        const int op = h_big - base;
        if (op < 0 || op >= arch_.strides[enc_layer]) {
            throw ConfigError("arch: conv layer " + std::to_string(enc_layer) +
                              " is not invertible by a transposed convolution (output_padding " +
                              std::to_string(op) + ")");
        }
        dect_output_padding_.push_back(op);
    }

    exc_w1_ = zeros({arch_.classifier_hidden, arch_.excitation_dim});
    exc_b1_ = zeros({arch_.classifier_hidden});
    exc_w2_ = zeros({arch_.num_classes, arch_.classifier_hidden});
    exc_b2_ = zeros({arch_.num_classes});
    inh_w1_ = zeros({arch_.classifier_hidden, arch_.inhibition_dim()});
    inh_b1_ = zeros({arch_.classifier_hidden});
    inh_w2_ = zeros({arch_.num_classes, arch_.classifier_hidden});
    inh_b2_ = zeros({arch_.num_classes});
}

void GvaeModel::init_params(Rng& rng) {
    auto kaiming = [&rng](const TensorPtr& w, int fan_in, double gain = 1.0) {
        const double bound = gain * std::sqrt(6.0 / fan_in);
        for (double& v : w->value) v = rng.uniform(-bound, bound);
    };
    const int k2 = arch_.kernel * arch_.kernel;
    for (size_t i = 0; i < conv_w_.size(); ++i) {
        kaiming(conv_w_[i], conv_w_[i]->shape[1] * k2, arch_.snn_init_gain);
    }
    kaiming(mu_w_, mu_w_->shape[1]);
    kaiming(logvar_w_, logvar_w_->shape[1]);
    kaiming(dec_fc_w_, dec_fc_w_->shape[1]);
    for (size_t j = 0; j < dect_w_.size(); ++j) {
        kaiming(dect_w_[j], dect_w_[j]->shape[1] * k2);
    }
    kaiming(exc_w1_, exc_w1_->shape[1]);
    kaiming(exc_w2_, exc_w2_->shape[1]);
    kaiming(inh_w1_, inh_w1_->shape[1]);
    kaiming(inh_w2_, inh_w2_->shape[1]);
    // biases stay zero
}

GvaeModel::EncodeResult GvaeModel::encode(Graph& g, const std::vector<TensorPtr>& frames_by_step,
                                          SpikeMode mode) const {
    if (static_cast<int>(frames_by_step.size()) != arch_.timesteps) {
        throw ShapeError("encode: got " + std::to_string(frames_by_step.size()) +
                         " timesteps, arch expects " + std::to_string(arch_.timesteps));
    }
    const int n_batch = frames_by_step[0]->shape.at(0);
    for (const auto& f : frames_by_step) {
        const Shape want{n_batch, arch_.input_channels, arch_.input_hw, arch_.input_hw};
        if (f->shape != want) {
            throw ShapeError("encode: frame tensor shape " + shape_str(f->shape) +
                             " does not match " + shape_str(want));
        }
    }

    const int n_layers = static_cast<int>(arch_.channels.size());
    const auto sizes = arch_.feature_sizes();

    std::vector<TensorPtr> membrane(n_layers);
    for (int i = 0; i < n_layers; ++i) {
        membrane[i] = Tensor::zeros({n_batch, arch_.channels[i], sizes[i + 1], sizes[i + 1]});
    }
    TensorPtr integ = Tensor::zeros({n_batch, arch_.channels.back(), sizes.back(), sizes.back()});

    for (const auto& frame : frames_by_step) {
        TensorPtr x = frame;
        for (int i = 0; i < n_layers; ++i) {
            TensorPtr drive = conv2d(g, x, conv_w_[i], conv_b_[i], arch_.strides[i], arch_.padding());
            LifStepResult r = lif_step(g, membrane[i], drive, lif_, mode);
            membrane[i] = r.v_next;
            x = r.spikes;
        }
        // leaky integrator in moving-average form: the read-out stays a
        // bounded spike-rate estimate regardless of T
        integ = add(g, scale(g, integ, arch_.integrator_decay),
                    scale(g, x, 1.0 - arch_.integrator_decay));
    }

    TensorPtr flat = reshape(g, integ, {n_batch, arch_.encoder_flat_dim()});
    EncodeResult out;
    out.mu = linear(g, flat, mu_w_, mu_b_);
    out.logvar = linear(g, flat, logvar_w_, logvar_b_);
    return out;
}

TensorPtr GvaeModel::reparameterize(Graph& g, const TensorPtr& mu, const TensorPtr& logvar,
                                    const TensorPtr& eps) const {
    if (mu->shape != logvar->shape || mu->shape != eps->shape) {
        throw ShapeError("reparameterize: mu/logvar/eps shapes disagree");
    }
    TensorPtr sigma = exp(g, scale(g, logvar, 0.5));
    return add(g, mu, mul(g, sigma, eps));
}

TensorPtr GvaeModel::decode(Graph& g, const TensorPtr& z) const {
    if (z->shape.size() != 2 || z->shape[1] != arch_.latent_dim) {
        throw ShapeError("decode: z must be [N," + std::to_string(arch_.latent_dim) + "], got " +
                         shape_str(z->shape));
    }
    const int n_batch = z->shape[0];
    const int n = static_cast<int>(arch_.channels.size());
    const auto sizes = arch_.feature_sizes();

    TensorPtr x = relu(g, linear(g, z, dec_fc_w_, dec_fc_b_));
    x = reshape(g, x, {n_batch, arch_.channels.back(), sizes.back(), sizes.back()});
    for (int j = 0; j < n; ++j) {
        const int enc_layer = n - 1 - j;
        x = conv_transpose2d(g, x, dect_w_[j], dect_b_[j], arch_.strides[enc_layer], arch_.padding(),
                             dect_output_padding_[j]);
        x = (j + 1 < n) ? relu(g, x) : sigmoid(g, x);
    }
    return x;
}

TensorPtr GvaeModel::classify_excitation(Graph& g, const TensorPtr& z_exc) const {
    if (z_exc->shape.size() != 2 || z_exc->shape[1] != arch_.excitation_dim) {
        throw ShapeError("classify_excitation: input must be [N," +
                         std::to_string(arch_.excitation_dim) + "], got " + shape_str(z_exc->shape));
    }
    TensorPtr h = relu(g, linear(g, z_exc, exc_w1_, exc_b1_));
    return linear(g, h, exc_w2_, exc_b2_);
}

TensorPtr GvaeModel::classify_inhibition(Graph& g, const TensorPtr& z_inh) const {
    if (z_inh->shape.size() != 2 || z_inh->shape[1] != arch_.inhibition_dim()) {
        throw ShapeError("classify_inhibition: input must be [N," +
                         std::to_string(arch_.inhibition_dim()) + "], got " + shape_str(z_inh->shape));
    }
    TensorPtr h = relu(g, linear(g, z_inh, inh_w1_, inh_b1_));
    return linear(g, h, inh_w2_, inh_b2_);
}

TensorPtr GvaeModel::excitation_slice(Graph& g, const TensorPtr& z) const {
    return slice_cols(g, z, 0, arch_.excitation_dim);
}

TensorPtr GvaeModel::inhibition_slice(Graph& g, const TensorPtr& z) const {
    return slice_cols(g, z, arch_.excitation_dim, arch_.latent_dim);
}

std::vector<TensorPtr> GvaeModel::encoder_params() const {
    std::vector<TensorPtr> out;
    for (size_t i = 0; i < conv_w_.size(); ++i) {
        out.push_back(conv_w_[i]);
        out.push_back(conv_b_[i]);
    }
    out.insert(out.end(), {mu_w_, mu_b_, logvar_w_, logvar_b_});
    return out;
}

std::vector<TensorPtr> GvaeModel::decoder_params() const {
    std::vector<TensorPtr> out{dec_fc_w_, dec_fc_b_};
    for (size_t j = 0; j < dect_w_.size(); ++j) {
        out.push_back(dect_w_[j]);
        out.push_back(dect_b_[j]);
    }
    return out;
}

std::vector<TensorPtr> GvaeModel::excitation_params() const {
    return {exc_w1_, exc_b1_, exc_w2_, exc_b2_};
}

std::vector<TensorPtr> GvaeModel::inhibition_params() const {
    return {inh_w1_, inh_b1_, inh_w2_, inh_b2_};
}

std::vector<TensorPtr> GvaeModel::main_params() const {
    auto out = encoder_params();
    auto dec = decoder_params();
    auto exc = excitation_params();
    out.insert(out.end(), dec.begin(), dec.end());
    out.insert(out.end(), exc.begin(), exc.end());
    return out;
}

std::vector<TensorPtr> GvaeModel::all_params() const {
    auto out = main_params();
    auto inh = inhibition_params();
    out.insert(out.end(), inh.begin(), inh.end());
    return out;
}

std::vector<NamedParam> GvaeModel::named_params() const {
    std::vector<NamedParam> out;
    for (size_t i = 0; i < conv_w_.size(); ++i) {
        out.push_back({"enc.conv" + std::to_string(i) + ".w", conv_w_[i]});
        out.push_back({"enc.conv" + std::to_string(i) + ".b", conv_b_[i]});
    }
    out.push_back({"enc.mu.w", mu_w_});
    out.push_back({"enc.mu.b", mu_b_});
    out.push_back({"enc.logvar.w", logvar_w_});
    out.push_back({"enc.logvar.b", logvar_b_});
    out.push_back({"dec.fc.w", dec_fc_w_});
    out.push_back({"dec.fc.b", dec_fc_b_});
    for (size_t j = 0; j < dect_w_.size(); ++j) {
        out.push_back({"dec.convt" + std::to_string(j) + ".w", dect_w_[j]});
        out.push_back({"dec.convt" + std::to_string(j) + ".b", dect_b_[j]});
    }
    out.push_back({"cls.exc.fc1.w", exc_w1_});
    out.push_back({"cls.exc.fc1.b", exc_b1_});
    out.push_back({"cls.exc.fc2.w", exc_w2_});
    out.push_back({"cls.exc.fc2.b", exc_b2_});
    out.push_back({"cls.inh.fc1.w", inh_w1_});
    out.push_back({"cls.inh.fc1.b", inh_b1_});
    out.push_back({"cls.inh.fc2.w", inh_w2_});
    out.push_back({"cls.inh.fc2.b", inh_b2_});
    return out;
}

TensorPtr GvaeModel::param(const std::string& name) const {
    for (const auto& p : named_params()) {
        if (p.name == name) return p.tensor;
    }
    throw ConfigError("no parameter named '" + name + "'");
}

int64_t GvaeModel::param_count() const {
    int64_t n = 0;
    for (const auto& p : named_params()) n += p.tensor->numel();
    return n;
}

int64_t GvaeModel::neuron_count() const {
    const auto sizes = arch_.feature_sizes();
    const int n = static_cast<int>(arch_.channels.size());
    int64_t count = 0;
    // LIF units
    for (int i = 0; i < n; ++i) {
        count += static_cast<int64_t>(arch_.channels[i]) * sizes[i + 1] * sizes[i + 1];
    }
    // integrator units
    count += static_cast<int64_t>(arch_.channels.back()) * sizes.back() * sizes.back();
    // decoder activations: fc ReLU, hidden convT ReLU maps, sigmoid output
    count += arch_.encoder_flat_dim();
    for (int j = 0; j < n - 1; ++j) {
        const int enc_layer = n - 1 - j;
        count += static_cast<int64_t>(arch_.channels[enc_layer - 1]) * sizes[enc_layer] * sizes[enc_layer];
    }
    count += static_cast<int64_t>(arch_.input_channels) * arch_.input_hw * arch_.input_hw;
    return count;
}

void freeze(const std::vector<TensorPtr>& params) {
    for (const auto& p : params) p->requires_grad = false;
}

void unfreeze(const std::vector<TensorPtr>& params) {
    for (const auto& p : params) p->requires_grad = true;
}

void zero_grads(const std::vector<TensorPtr>& params) {
    for (const auto& p : params) p->grad.clear();
}

}  // namespace evpr
