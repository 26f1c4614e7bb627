#pragma once

#include <filesystem>

#include "evpr/model.hpp"

namespace evpr {

// Checkpoint container (magic "GVAE"): JSON header holds the architecture
// and LIF configuration plus the ordered tensor directory; payloads are f32
// little-endian. save(load(file)) reproduces the file byte for byte.
void save_checkpoint(const std::filesystem::path& path, const GvaeModel& model);
GvaeModel load_checkpoint(const std::filesystem::path& path);

}  // namespace evpr
