#pragma once

#include <cstdint>
#include <vector>

#include "evpr/events.hpp"

namespace evpr {

// A vertical high-contrast edge mounted on one of the four arena walls.
// freq_tag is the spatial-frequency family the beacon belongs to; the set
// of tags on a wall is that wall's signature.
struct Beacon {
    int wall = 0;          // 0 south (y=0), 1 east, 2 north, 3 west
    double offset_m = 0.0; // position along the wall from its origin corner
    int contrast = +1;     // +1 emits ON events, -1 emits OFF events
    double freq_tag = 1.0;
    double height_m = 0.5;
};

struct SceneSpec {
    ArenaConfig arena;
    std::vector<Beacon> beacons;
    double illumination_level = 1.0;  // (0,1]; scales the per-edge event yield
    double noise_rate = 0.1;          // background events / pixel / second

    // pinhole camera, mounted level at camera_height_m
    uint16_t sensor_width = 64;
    uint16_t sensor_height = 64;
    double focal_px = 32.0;
    double camera_height_m = 0.3;
    double min_depth_m = 0.15;

    void validate() const;
};

struct TrajectorySpec {
    std::vector<Pose> waypoints;  // counter-clockwise loop, yaw ignored
    double speed_mps = 0.3;
    int rounds = 3;
    uint64_t seed = 7;
    // scanning wobble keeps edges sweeping across pixel columns even when
    // the translation is slow
    double wobble_amplitude_rad = 0.3;
    double wobble_freq_hz = 4.0;

    void validate(const ArenaConfig& arena) const;
};

// Fixed 100 Hz pose log along the waypoint loop. Per-segment speed jitter
// and the wobble phase derive from the seed, so equal (spec, seed) gives a
// byte-identical log and doubling speed_mps exactly halves the duration.
std::vector<TimedPose> generate_trajectory(const TrajectorySpec& spec, const ArenaConfig& arena);

// Edge-beacon event model: when a beacon's projected column crosses a pixel
// between consecutive poses, one event candidate per covered row is drawn
// with probability illumination_level (a shared uniform draw per candidate,
// so raising the level only ever adds events). Background noise is Poisson
// at noise_rate. The stream is sorted by timestamp and deterministic in
// (poses, scene, seed).
EventStream render_events(const std::vector<TimedPose>& poses, const SceneSpec& scene, uint64_t seed);

// Walls dressed with distinct spacing/contrast patterns; enough texture for
// grid cells to be told apart from binned frames.
SceneSpec default_scene(const ArenaConfig& arena);

// Rectangular loop through the four quadrant centers of the arena.
TrajectorySpec default_trajectory(const ArenaConfig& arena);

}  // namespace evpr
