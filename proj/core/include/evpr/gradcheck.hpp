#pragma once

#include <functional>
#include <vector>

#include "evpr/graph.hpp"

namespace evpr {

// Builds the computation under test from the given inputs; the result may
// have any shape, the checker reduces it to a scalar with fixed random
// weights so that asymmetric gradient errors cannot cancel.
using GradCheckFn = std::function<TensorPtr(Graph&, const std::vector<TensorPtr>&)>;

struct GradCheckOptions {
    double fd_step = 1e-5;
    uint64_t probe_seed = 0x9e3779b9;
};

// Max over all elements of all inputs of |AD - central FD| / max(|FD|, 1e-8).
// Runs entirely in 64-bit precision.
double grad_check(const GradCheckFn& fn, const std::vector<TensorPtr>& inputs,
                  GradCheckOptions opts = {});

}  // namespace evpr
