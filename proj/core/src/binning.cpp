#include "evpr/binning.hpp"

#include <string>

#include "evpr/errors.hpp"

namespace evpr {

std::vector<uint8_t> bin_events(const EventStream& stream, uint64_t t_start,
                                const BinningConfig& cfg, BinStats* stats) {
    if (cfg.window_us == 0) throw ConfigError("binning: window_us must be positive");
    if (cfg.frames_per_sample < 1) throw ConfigError("binning: frames_per_sample must be >= 1");
    if (cfg.target_size < 1) throw ConfigError("binning: target_size must be >= 1");
    if (cfg.clip_cap < 1 || cfg.clip_cap > 255) throw ConfigError("binning: clip_cap must be in [1,255]");

    CropRect crop = cfg.crop;
    if (crop.width == 0 || crop.height == 0) {
        crop = {0, 0, stream.sensor_width, stream.sensor_height};
    }
    if (crop.x0 + crop.width > stream.sensor_width || crop.y0 + crop.height > stream.sensor_height) {
        throw ConfigError("binning: crop rectangle exceeds sensor bounds " +
                          std::to_string(stream.sensor_width) + "x" + std::to_string(stream.sensor_height));
    }
    if (crop.width % cfg.target_size != 0 || crop.height % cfg.target_size != 0) {
        throw ConfigError("binning: crop " + std::to_string(crop.width) + "x" + std::to_string(crop.height) +
                          " is not an integer multiple of target size " + std::to_string(cfg.target_size));
    }
    const int fx = crop.width / cfg.target_size;
    const int fy = crop.height / cfg.target_size;

    const int T = cfg.frames_per_sample;
    const int S = cfg.target_size;
    const size_t plane = static_cast<size_t>(S) * S;
    std::vector<uint8_t> frames(static_cast<size_t>(T) * 2 * plane, 0);

    BinStats st;
    const uint64_t span = static_cast<uint64_t>(T) * cfg.window_us;
    for (const Event& e : stream.events) {
        if (e.t_us < t_start || e.t_us >= t_start + span) {
            ++st.dropped_time;
            continue;
        }
        if (e.x < crop.x0 || e.x >= crop.x0 + crop.width || e.y < crop.y0 || e.y >= crop.y0 + crop.height) {
            ++st.dropped_space;
            continue;
        }
        const uint64_t frame = (e.t_us - t_start) / cfg.window_us;
        const int px = (e.x - crop.x0) / fx;
        const int py = (e.y - crop.y0) / fy;
        uint8_t& cell = frames[(frame * 2 + e.polarity) * plane + static_cast<size_t>(py) * S + px];
        if (cell < cfg.clip_cap) ++cell;
        ++st.in_window;
    }
    if (stats) *stats = st;
    return frames;
}

}  // namespace evpr
