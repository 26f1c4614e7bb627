#pragma once

#include <filesystem>
#include <string>

#include "evpr/probe.hpp"
#include "evpr/samples.hpp"
#include "evpr/synth.hpp"
#include "evpr/trainer.hpp"

namespace evpr {

// Everything a pipeline run needs, rooted in a profile and optionally
// overridden by a JSON config file (// comments allowed) and CLI flags.
struct RunConfig {
    ArenaConfig arena;
    ArchConfig arch;
    LifParams lif;
    TrainConfig train;
    BinningConfig binning;
    uint64_t sample_stride_us = 100000;
    uint64_t pose_gap_tolerance_us = 200000;
    SceneSpec scene;
    TrajectorySpec trajectory;
    ProbeConfig probe;
    int retrieval_seq_len = 5;

    SamplerConfig sampler_config() const;
    // derives the coupled fields (class count from the arena grid, clip cap
    // into the trainer) and cross-checks geometry
    void finalize();
};

// "tiny" is the desk-scale profile (32x32, T=10, 2x2 cells, k=4);
// "paper" is the full-scale profile (128x128, T=50, 4x4 cells, k=16).
RunConfig profile_defaults(const std::string& name);

// Merges a JSON config file over the base. Unknown keys are rejected.
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base);

// One line per accepted config key, for --help and the docs.
std::string config_keys_help();

}  // namespace evpr
