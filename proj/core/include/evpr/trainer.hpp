#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "evpr/losses.hpp"
#include "evpr/model.hpp"
#include "evpr/samples.hpp"

namespace evpr {

struct TrainConfig {
    double beta = 1.0;
    int epochs = 50;
    int batch_size = 16;
    double lr = 3e-4;
    uint64_t seed = 42;
    double lambda_exc = 1.0;
    double lambda_inh_adv = 1.0;
    int inh_steps_per_batch = 1;  // adversarial alternation ratio
    double val_fraction = 0.1;
    int clip_cap = 1;  // cap the frames were clipped with; scales the targets

    bool guided() const { return lambda_exc > 0.0 || lambda_inh_adv > 0.0; }
    void validate() const;
};

struct EpochMetrics {
    int epoch = 0;         // 1-based
    double recon = 0.0;    // epoch means over training batches
    double kl = 0.0;
    double exc_loss = 0.0;
    double inh_cls_loss = 0.0;
    double exc_acc = 0.0;  // validation accuracies on mu
    double inh_cls_acc = 0.0;
    double wall_s = 0.0;   // cumulative wall clock
};

struct TrainResult {
    std::vector<EpochMetrics> history;
    int best_epoch = 0;             // 1-based epoch of the saved checkpoint
    double best_val_objective = 0.0;
};

// CSV schema: epoch,recon,kl,exc_loss,inh_cls_loss,exc_acc,inh_cls_acc,wall_s.
// All columns except wall_s are deterministic for a fixed (config, seed).
std::string metrics_csv(const std::vector<EpochMetrics>& history);

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Alternating adversarial schedule per batch: (a) inhibition-classifier
// step(s) against the true labels with everything else frozen, then (b) one
// encoder/decoder/excitation step on the overall loss with the inhibition
// classifier frozen, its adversarial target being the uniform distribution.
// Freezing makes the counterpart's parameter gradients identically zero.
//
// The model must be initialized by the caller. The best checkpoint by
// validation objective is written to checkpoint_path unless it is empty.
// A non-finite loss term aborts with a diagnostic naming the term.
TrainResult train(GvaeModel& model, const SampleDataset& dataset, const TrainConfig& cfg,
                  const std::filesystem::path& checkpoint_path,
                  const EpochCallback& on_epoch = nullptr);

}  // namespace evpr
