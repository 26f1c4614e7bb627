#include "evpr/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "evpr/adam.hpp"
#include "evpr/checkpoint.hpp"
#include "evpr/errors.hpp"
#include "evpr/rng.hpp"

namespace evpr {

void TrainConfig::validate() const {
    if (beta < 0.0) throw ConfigError("train: beta must be >= 0");
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (lr <= 0.0) throw ConfigError("train: lr must be positive");
    if (lambda_exc < 0.0 || lambda_inh_adv < 0.0) throw ConfigError("train: loss weights must be >= 0");
    if (inh_steps_per_batch < 1) throw ConfigError("train: inh_steps_per_batch must be >= 1");
    if (val_fraction < 0.0 || val_fraction >= 1.0) throw ConfigError("train: val_fraction must be in [0,1)");
    if (clip_cap < 1) throw ConfigError("train: clip_cap must be >= 1");
}

std::string metrics_csv(const std::vector<EpochMetrics>& history) {
    std::string out = "epoch,recon,kl,exc_loss,inh_cls_loss,exc_acc,inh_cls_acc,wall_s\n";
    char line[256];
    for (const EpochMetrics& m : history) {
        std::snprintf(line, sizeof(line), "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.3f\n", m.epoch,
                      m.recon, m.kl, m.exc_loss, m.inh_cls_loss, m.exc_acc, m.inh_cls_acc, m.wall_s);
        out += line;
    }
    return out;
}

namespace {

void check_term(const TensorPtr& t, const char* term, int epoch, size_t batch) {
    if (!std::isfinite(t->item())) {
        throw NumericsError(std::string("training aborted: non-finite ") + term + " at epoch " +
                            std::to_string(epoch) + ", batch " + std::to_string(batch));
    }
}

std::vector<int> labels_of(const SampleDataset& ds, const std::vector<int>& idx) {
    std::vector<int> out(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) out[i] = ds.samples[idx[i]].cell;
    return out;
}

struct ValMetrics {
    double exc_acc = 0.0;
    double inh_cls_acc = 0.0;
    double objective = 0.0;  // recon + beta*kl + lambda_exc*exc on validation
};

ValMetrics evaluate_validation(GvaeModel& model, const SampleDataset& ds, const std::vector<int>& val_idx,
                               const TrainConfig& cfg) {
    ValMetrics vm;
    if (val_idx.empty()) return vm;

    const auto params = model.all_params();
    freeze(params);

    const int n = static_cast<int>(val_idx.size());
    int exc_hits = 0, inh_hits = 0;
    double recon_sum = 0.0, kl_sum = 0.0, exc_sum = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += cfg.batch_size) {
        const int count = std::min(cfg.batch_size, n - start);
        std::vector<int> idx(val_idx.begin() + start, val_idx.begin() + start + count);
        const std::vector<int> labels = labels_of(ds, idx);

        Graph g;
        auto enc = model.encode(g, batch_timesteps(ds, idx));
        // decode from mu: validation tracks the noise-free objective
        TensorPtr recon = model.decode(g, enc.mu);
        TensorPtr target = reconstruction_target(ds, idx, cfg.clip_cap);
        VaeLossParts parts = beta_vae_loss(g, recon, target, enc.mu, enc.logvar, cfg.beta);
        recon_sum += parts.recon->item() * count;
        kl_sum += parts.kl->item() * count;

        TensorPtr exc_logits = model.classify_excitation(g, model.excitation_slice(g, enc.mu));
        TensorPtr inh_logits = model.classify_inhibition(g, model.inhibition_slice(g, enc.mu));
        if (cfg.lambda_exc > 0.0) {
            exc_sum += excitation_loss(g, exc_logits, labels, model.arch().num_classes)->item() * count;
        }
        const auto exc_pred = argmax_rows(*exc_logits);
        const auto inh_pred = argmax_rows(*inh_logits);
        for (int i = 0; i < count; ++i) {
            if (exc_pred[i] == labels[i]) ++exc_hits;
            if (inh_pred[i] == labels[i]) ++inh_hits;
        }
        ++batches;
    }
    unfreeze(params);

    vm.exc_acc = static_cast<double>(exc_hits) / n;
    vm.inh_cls_acc = static_cast<double>(inh_hits) / n;
    vm.objective = (recon_sum + cfg.beta * kl_sum + cfg.lambda_exc * exc_sum) / n;
    return vm;
}

}  // namespace

TrainResult train(GvaeModel& model, const SampleDataset& dataset, const TrainConfig& cfg,
                  const std::filesystem::path& checkpoint_path, const EpochCallback& on_epoch) {
    cfg.validate();
    if (dataset.samples.empty()) throw ConfigError("train: dataset is empty");
    const ArchConfig& arch = model.arch();
    if (dataset.frames_per_sample != arch.timesteps || dataset.height != arch.input_hw ||
        dataset.width != arch.input_hw || dataset.channels != arch.input_channels) {
        throw ConfigError("train: dataset geometry T=" + std::to_string(dataset.frames_per_sample) +
                          " C=" + std::to_string(dataset.channels) + " " +
                          std::to_string(dataset.height) + "x" + std::to_string(dataset.width) +
                          " does not match the architecture");
    }
    for (const auto& s : dataset.samples) {
        if (s.cell < 0 || s.cell >= arch.num_classes) {
            throw ConfigError("train: sample cell " + std::to_string(s.cell) +
                              " outside [0," + std::to_string(arch.num_classes) + ")");
        }
    }

    Rng base(cfg.seed);
    Rng split_rng = base.fork(1);
    Rng shuffle_rng = base.fork(2);
    Rng eps_rng = base.fork(3);

    // deterministic validation split
    const int n = static_cast<int>(dataset.samples.size());
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    split_rng.shuffle(perm);
    const int n_val = static_cast<int>(std::floor(cfg.val_fraction * n));
    std::vector<int> val_idx(perm.begin(), perm.begin() + n_val);
    std::vector<int> train_idx(perm.begin() + n_val, perm.end());
    if (train_idx.empty()) throw ConfigError("train: validation split leaves no training samples");
    std::sort(val_idx.begin(), val_idx.end());

    Adam adam_main({cfg.lr});
    Adam adam_inh({cfg.lr});
    const auto main_params = model.main_params();
    const auto inh_params = model.inhibition_params();
    const auto all_params = model.all_params();
    const UniformTarget uniform{arch.num_classes};
    const int latent = arch.latent_dim;

    TrainResult result;
    result.best_val_objective = std::numeric_limits<double>::infinity();
    const auto t_start = std::chrono::steady_clock::now();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(train_idx);

        double recon_sum = 0.0, kl_sum = 0.0, exc_sum = 0.0, inh_cls_sum = 0.0;
        size_t n_batches = 0;

        for (size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
            const size_t count = std::min<size_t>(cfg.batch_size, train_idx.size() - start);
            std::vector<int> idx(train_idx.begin() + start, train_idx.begin() + start + count);
            const std::vector<int> labels = labels_of(dataset, idx);
            const auto frames = batch_timesteps(dataset, idx);
            const int nb = static_cast<int>(count);

            // (a) inhibition-classifier phase: counterpart frozen, so its
            // parameter gradients are identically zero. With the encoder
            // frozen its forward is shared across the inner steps.
            if (cfg.guided()) {
                freeze(main_params);
                TensorPtr z_frozen;
                {
                    Graph g;
                    auto enc = model.encode(g, frames);
                    TensorPtr eps = Tensor::randn({nb, latent}, eps_rng);
                    z_frozen = model.reparameterize(g, enc.mu, enc.logvar, eps);
                }
                for (int step = 0; step < cfg.inh_steps_per_batch; ++step) {
                    Graph g;
                    TensorPtr logits =
                        model.classify_inhibition(g, model.inhibition_slice(g, z_frozen));
                    InhibitionLosses il = inhibition_losses(g, logits, labels, uniform);
                    check_term(il.classifier_loss, "inhibition classifier loss", epoch, n_batches);
                    g.backward(il.classifier_loss);
                    adam_inh.step(inh_params);
                    zero_grads(all_params);
                    inh_cls_sum += il.classifier_loss->item();
                }
                unfreeze(main_params);
            }

            // (b) encoder/decoder/excitation phase
            if (cfg.guided()) freeze(inh_params);
            {
                Graph g;
                auto enc = model.encode(g, frames);
                TensorPtr eps = Tensor::randn({nb, latent}, eps_rng);
                TensorPtr z = model.reparameterize(g, enc.mu, enc.logvar, eps);
                TensorPtr recon = model.decode(g, z);
                TensorPtr target = reconstruction_target(dataset, idx, cfg.clip_cap);
                VaeLossParts parts = beta_vae_loss(g, recon, target, enc.mu, enc.logvar, cfg.beta);
                check_term(parts.recon, "reconstruction loss", epoch, n_batches);
                check_term(parts.kl, "KL term", epoch, n_batches);

                TensorPtr exc_l, inh_adv_l;
                if (cfg.lambda_exc > 0.0) {
                    TensorPtr logits = model.classify_excitation(g, model.excitation_slice(g, z));
                    exc_l = excitation_loss(g, logits, labels, arch.num_classes);
                    check_term(exc_l, "excitation loss", epoch, n_batches);
                    exc_sum += exc_l->item();
                }
                if (cfg.lambda_inh_adv > 0.0) {
                    TensorPtr logits = model.classify_inhibition(g, model.inhibition_slice(g, z));
                    inh_adv_l = inhibition_losses(g, logits, labels, uniform).encoder_adv_loss;
                    check_term(inh_adv_l, "inhibition adversarial loss", epoch, n_batches);
                }
                TensorPtr total =
                    overall_loss(g, parts.total, exc_l, inh_adv_l, {cfg.lambda_exc, cfg.lambda_inh_adv});
                g.backward(total);
                adam_main.step(main_params);
                zero_grads(all_params);

                recon_sum += parts.recon->item();
                kl_sum += parts.kl->item();
            }
            if (cfg.guided()) unfreeze(inh_params);
            ++n_batches;
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.recon = recon_sum / n_batches;
        m.kl = kl_sum / n_batches;
        m.exc_loss = cfg.lambda_exc > 0.0 ? exc_sum / n_batches : 0.0;
        m.inh_cls_loss =
            cfg.guided() ? inh_cls_sum / (n_batches * cfg.inh_steps_per_batch) : 0.0;

        const ValMetrics vm = evaluate_validation(model, dataset, val_idx, cfg);
        m.exc_acc = vm.exc_acc;
        m.inh_cls_acc = vm.inh_cls_acc;
        m.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        result.history.push_back(m);
        if (on_epoch) on_epoch(m);

        // best-by-validation checkpoint; falls back to the training
        // objective when there is no validation split
        const double objective = val_idx.empty()
                                     ? m.recon + cfg.beta * m.kl + cfg.lambda_exc * m.exc_loss
                                     : vm.objective;
        if (objective < result.best_val_objective) {
            result.best_val_objective = objective;
            result.best_epoch = epoch;
            if (!checkpoint_path.empty()) save_checkpoint(checkpoint_path, model);
        }
    }
    return result;
}

}  // namespace evpr
