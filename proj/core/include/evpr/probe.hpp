#pragma once

#include <cstdint>
#include <vector>

#include "evpr/tensor.hpp"

namespace evpr {

struct ProbeConfig {
    int epochs = 60;
    int batch_size = 32;
    double lr = 3e-3;
    int hidden = 64;
    uint64_t seed = 123;
};

struct ProbeResult {
    double train_accuracy = 0.0;
    double eval_accuracy = 0.0;
    double final_loss = 0.0;
};

// Trains a fresh hidden-layer softmax classifier on frozen feature vectors
// and reports accuracy on a held-out set. Used to measure how much class
// signal a latent block carries, independently of the model's own heads.
ProbeResult train_probe(const TensorPtr& train_x, const std::vector<int>& train_y,
                        const TensorPtr& eval_x, const std::vector<int>& eval_y,
                        int num_classes, const ProbeConfig& cfg = {});

// Column block [c0, c1) of a feature matrix as a fresh constant tensor.
TensorPtr feature_block(const TensorPtr& x, int c0, int c1);

}  // namespace evpr
