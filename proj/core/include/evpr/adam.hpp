#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "evpr/tensor.hpp"

namespace evpr {

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Standard Adam with bias correction. State is keyed per parameter tensor;
// a parameter with empty grad is treated as grad == 0 (moments still decay).
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(const std::vector<TensorPtr>& params);
    void reset() { state_.clear(); }

    const AdamConfig& config() const { return cfg_; }

private:
    struct State {
        std::vector<double> m, v;
        int64_t t = 0;
    };
    AdamConfig cfg_;
    std::unordered_map<const Tensor*, State> state_;
};

}  // namespace evpr
