#pragma once

#include <string>
#include <vector>

#include "evpr/graph.hpp"

namespace evpr {

enum class ResetMode { subtract, zero };
enum class SpikeMode {
    binary,  // heaviside forward, surrogate derivative backward
    smooth   // surrogate integral u/(1+slope|u|) forward; for gradient verification
};

struct LifParams {
    double alpha = 0.9;            // membrane decay per step, in (0,1]
    double threshold = 1.0;        // > 0
    ResetMode reset = ResetMode::subtract;
    double surrogate_slope = 10.0; // > 0

    void validate() const;
};

// Fast-sigmoid surrogate: 1/(1 + slope*|u|)^2. Peaks at 1 for u = 0,
// symmetric, decays monotonically in |u|.
double surrogate_derivative(double u, double slope);

// Spike nonlinearity as an autodiff primitive. Forward emits exact binary
// spikes (heaviside(u), with heaviside(0) = 1); the smooth mode swaps in
// the surrogate integral so that the recorded backward equals the true
// derivative of the forward, which is what the FD oracle checks.
TensorPtr spike(Graph& g, const TensorPtr& u, double slope, SpikeMode mode = SpikeMode::binary);

struct LifStepResult {
    TensorPtr spikes;
    TensorPtr v_next;
};

// One discrete LIF update:
//   v_pre   = alpha*v + drive
//   spikes  = heaviside(v_pre - threshold)
//   v_next  = v_pre - spikes*threshold   (subtract reset)
//           = v_pre * (1 - spikes)       (zero reset)
// Composed from primitives, so BPTT flows through both the drive path and
// the membrane recurrence.
LifStepResult lif_step(Graph& g, const TensorPtr& v, const TensorPtr& drive, const LifParams& p,
                       SpikeMode mode = SpikeMode::binary);

// Unrolls lif_step over a drive sequence from a zero initial state.
// drives[t] all share one shape; returns the spike tensor per step.
std::vector<TensorPtr> lif_unroll(Graph& g, const std::vector<TensorPtr>& drives, const LifParams& p,
                                  SpikeMode mode = SpikeMode::binary);

}  // namespace evpr
