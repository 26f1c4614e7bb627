#pragma once

#include <cstdint>
#include <vector>

#include "evpr/events.hpp"

namespace evpr {

// Crop rectangle in sensor pixels, applied before downsampling.
struct CropRect {
    uint16_t x0 = 0;
    uint16_t y0 = 0;
    uint16_t width = 0;
    uint16_t height = 0;
};

struct BinningConfig {
    uint32_t window_us = 2000;  // frame length
    int frames_per_sample = 50; // T
    CropRect crop;              // width/height 0 means full sensor
    int target_size = 128;      // square output resolution after downsampling
    int clip_cap = 1;           // per-pixel count cap; 1 yields binary frames
};

struct BinStats {
    uint64_t in_window = 0;
    uint64_t dropped_time = 0;   // outside [t_start, t_start + T*window)
    uint64_t dropped_space = 0;  // outside the crop rectangle
};

// Dense T x 2 x target x target counts, uint8, clipped at clip_cap.
// Channel 0 collects OFF events, channel 1 ON events. Frame index is
// floor((t - t_start)/window) over half-open windows; out-of-range events
// are dropped and counted in the stats.
std::vector<uint8_t> bin_events(const EventStream& stream, uint64_t t_start,
                                const BinningConfig& cfg, BinStats* stats = nullptr);

}  // namespace evpr
