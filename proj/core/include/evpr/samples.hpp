#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "evpr/binning.hpp"
#include "evpr/tensor.hpp"

namespace evpr {

// One training example: binned event frames plus ground truth.
struct EventSample {
    std::vector<uint8_t> frames;  // T*2*H*W counts, clipped
    uint64_t t_mid_us = 0;
    Pose pose;
    int cell = 0;
};

struct SampleDataset {
    int frames_per_sample = 0;
    int channels = 2;
    int height = 0;
    int width = 0;
    std::vector<EventSample> samples;

    size_t frame_elems() const {
        return static_cast<size_t>(frames_per_sample) * channels * height * width;
    }
    size_t size() const { return samples.size(); }
    std::vector<int> cell_histogram(int num_cells) const;
};

struct SamplerConfig {
    BinningConfig binning;
    uint64_t stride_us = 100000;          // distance between sample starts
    uint64_t pose_gap_tolerance_us = 200000;
};

// Slides sample windows across the overlap of the event stream and the pose
// log. Pose is linearly interpolated to each sample's mid time and labeled
// with its arena cell. A pose log gap above the tolerance is an error.
SampleDataset make_samples(const EventStream& stream, const std::vector<TimedPose>& poses,
                           const ArenaConfig& arena, const SamplerConfig& cfg);

// Sample archives reuse the tensor container layout (magic "GVSA").
void save_samples(const std::filesystem::path& path, const SampleDataset& ds);
SampleDataset load_samples(const std::filesystem::path& path);

// Batched model input: one [N,C,H,W] tensor per timestep for the selected
// sample indices. Values are the clipped counts as doubles.
std::vector<TensorPtr> batch_timesteps(const SampleDataset& ds, const std::vector<int>& indices);

}  // namespace evpr
