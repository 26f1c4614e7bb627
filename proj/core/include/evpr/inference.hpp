#pragma once

#include "evpr/model.hpp"
#include "evpr/samples.hpp"

namespace evpr {

// Frozen-encoder pass over a whole dataset, sample order preserved.
// Returns mu as [n, latent_dim]; no sampling noise at evaluation time.
TensorPtr encode_dataset_mu(const GvaeModel& model, const SampleDataset& ds, int batch_size = 32);

// Excitation-classifier argmax accuracy on mu against the cell labels.
double excitation_accuracy(const GvaeModel& model, const SampleDataset& ds, int batch_size = 32);

}  // namespace evpr
