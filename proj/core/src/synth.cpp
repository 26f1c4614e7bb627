#include "evpr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "evpr/errors.hpp"
#include "evpr/rng.hpp"

namespace evpr {

namespace {

constexpr uint64_t kPoseTickUs = 10000;  // 100 Hz

struct WallFrame {
    double ox, oy;  // wall origin corner
    double dx, dy;  // unit direction along the wall
    double length;
};

WallFrame wall_frame(int wall, const ArenaConfig& a) {
    switch (wall) {
        case 0: return {0.0, 0.0, 1.0, 0.0, a.width_m};         // south
        case 1: return {a.width_m, 0.0, 0.0, 1.0, a.height_m};  // east
        case 2: return {0.0, a.height_m, 1.0, 0.0, a.width_m};  // north
        case 3: return {0.0, 0.0, 0.0, 1.0, a.height_m};        // west
        default: throw ConfigError("beacon wall index must be 0..3, got " + std::to_string(wall));
    }
}

}  // namespace

void SceneSpec::validate() const {
    arena.validate();
    if (!(illumination_level > 0.0 && illumination_level <= 1.0)) {
        throw ConfigError("scene: illumination_level must be in (0,1]");
    }
    if (noise_rate < 0.0) throw ConfigError("scene: noise_rate must be >= 0");
    if (sensor_width == 0 || sensor_height == 0) throw ConfigError("scene: sensor must be non-empty");
    if (focal_px <= 0.0) throw ConfigError("scene: focal_px must be positive");

    std::map<int, std::set<double>> tags_by_wall;
    for (const Beacon& b : beacons) {
        const WallFrame w = wall_frame(b.wall, arena);
        if (b.offset_m < 0.0 || b.offset_m > w.length) {
            throw ConfigError("scene: beacon offset " + std::to_string(b.offset_m) +
                              " outside wall " + std::to_string(b.wall));
        }
        if (b.contrast != 1 && b.contrast != -1) throw ConfigError("scene: beacon contrast must be +-1");
        if (b.height_m <= 0.0) throw ConfigError("scene: beacon height must be positive");
        tags_by_wall[b.wall].insert(b.freq_tag);
    }
    // each wall's pattern signature must be unique among walls
    for (auto it = tags_by_wall.begin(); it != tags_by_wall.end(); ++it) {
        for (auto jt = std::next(it); jt != tags_by_wall.end(); ++jt) {
            if (it->second == jt->second) {
                throw ConfigError("scene: walls " + std::to_string(it->first) + " and " +
                                  std::to_string(jt->first) + " share the same feature pattern");
            }
        }
    }
}

void TrajectorySpec::validate(const ArenaConfig& arena) const {
    if (waypoints.size() < 2) throw ConfigError("trajectory: need at least 2 waypoints");
    if (speed_mps <= 0.0) throw ConfigError("trajectory: speed must be positive");
    if (rounds < 1) throw ConfigError("trajectory: rounds must be >= 1");
    for (const Pose& w : waypoints) {
        if (w.x_m < 0.0 || w.x_m > arena.width_m || w.y_m < 0.0 || w.y_m > arena.height_m) {
            throw ConfigError("trajectory: waypoint (" + std::to_string(w.x_m) + "," +
                              std::to_string(w.y_m) + ") outside arena");
        }
    }
}

std::vector<TimedPose> generate_trajectory(const TrajectorySpec& spec, const ArenaConfig& arena) {
    spec.validate(arena);
    Rng rng(spec.seed);

    struct Segment {
        double x0, y0, x1, y1;
        double heading;
        double t_begin_s, duration_s;
    };

    // closed loop: back to the first waypoint at the end of each round
    std::vector<Segment> segments;
    double clock_s = 0.0;
    const size_t n = spec.waypoints.size();
    for (int r = 0; r < spec.rounds; ++r) {
        for (size_t i = 0; i < n; ++i) {
            const Pose& a = spec.waypoints[i];
            const Pose& b = spec.waypoints[(i + 1) % n];
            const double len = std::hypot(b.x_m - a.x_m, b.y_m - a.y_m);
            if (len <= 0.0) continue;
            // +-10% per-segment speed jitter, multiplicative in speed_mps
            const double jitter = 1.0 + 0.1 * (2.0 * rng.uniform() - 1.0);
            Segment s;
            s.x0 = a.x_m;
            s.y0 = a.y_m;
            s.x1 = b.x_m;
            s.y1 = b.y_m;
            s.heading = std::atan2(b.y_m - a.y_m, b.x_m - a.x_m);
            s.t_begin_s = clock_s;
            s.duration_s = len / (spec.speed_mps * jitter);
            clock_s += s.duration_s;
            segments.push_back(s);
        }
    }
    if (segments.empty()) throw ConfigError("trajectory: waypoints are all coincident");
    const double total_s = clock_s;
    const double wobble_phase = rng.uniform(0.0, 2.0 * M_PI);

    std::vector<TimedPose> poses;
    const uint64_t total_us = static_cast<uint64_t>(std::ceil(total_s * 1e6));
    size_t seg = 0;
    for (uint64_t t_us = 0;; t_us += kPoseTickUs) {
        const double t_s = std::min(static_cast<double>(t_us) * 1e-6, total_s);
        while (seg + 1 < segments.size() && t_s >= segments[seg].t_begin_s + segments[seg].duration_s) ++seg;
        const Segment& s = segments[seg];
        const double w = std::clamp((t_s - s.t_begin_s) / s.duration_s, 0.0, 1.0);
        TimedPose p;
        p.t_us = t_us;
        p.pose.x_m = s.x0 + w * (s.x1 - s.x0);
        p.pose.y_m = s.y0 + w * (s.y1 - s.y0);
        p.pose.yaw_rad = s.heading +
                         spec.wobble_amplitude_rad *
                             std::sin(2.0 * M_PI * spec.wobble_freq_hz * t_s + wobble_phase);
        poses.push_back(p);
        if (t_us >= total_us) break;
    }
    return poses;
}

namespace {

struct Projection {
    bool visible = false;
    double u = 0.0;       // column, continuous
    double depth = 0.0;
};

Projection project_column(const Pose& cam, const SceneSpec& sc, double bx, double by) {
    const double dx = bx - cam.x_m;
    const double dy = by - cam.y_m;
    const double c = std::cos(cam.yaw_rad);
    const double s = std::sin(cam.yaw_rad);
    const double depth = dx * c + dy * s;
    Projection pr;
    if (depth < sc.min_depth_m) return pr;
    const double lateral = dx * s - dy * c;  // camera right
    pr.u = 0.5 * (sc.sensor_width - 1) + sc.focal_px * lateral / depth;
    pr.depth = depth;
    pr.visible = pr.u >= 0.0 && pr.u <= sc.sensor_width - 1.0;
    return pr;
}

}  // namespace

EventStream render_events(const std::vector<TimedPose>& poses, const SceneSpec& scene, uint64_t seed) {
    scene.validate();
    if (!std::is_sorted(poses.begin(), poses.end(),
                        [](const TimedPose& a, const TimedPose& b) { return a.t_us < b.t_us; })) {
        throw ConfigError("render_events: pose log must be sorted by time");
    }

    EventStream out;
    out.sensor_width = scene.sensor_width;
    out.sensor_height = scene.sensor_height;
    if (poses.size() < 2) return out;

    Rng base(seed);
    Rng edge_rng = base.fork(1);
    Rng noise_rng = base.fork(2);

    // beacon world positions
    std::vector<std::pair<double, double>> bpos(scene.beacons.size());
    for (size_t i = 0; i < scene.beacons.size(); ++i) {
        const WallFrame w = wall_frame(scene.beacons[i].wall, scene.arena);
        bpos[i] = {w.ox + w.dx * scene.beacons[i].offset_m, w.oy + w.dy * scene.beacons[i].offset_m};
    }

    const double cy = 0.5 * (scene.sensor_height - 1);
    std::vector<Projection> prev(scene.beacons.size());
    for (size_t i = 0; i < scene.beacons.size(); ++i) {
        prev[i] = project_column(poses[0].pose, scene, bpos[i].first, bpos[i].second);
    }

    for (size_t k = 1; k < poses.size(); ++k) {
        const uint64_t t0 = poses[k - 1].t_us;
        const uint64_t t1 = poses[k].t_us;
        for (size_t i = 0; i < scene.beacons.size(); ++i) {
            const Projection cur = project_column(poses[k].pose, scene, bpos[i].first, bpos[i].second);
            const Projection old = prev[i];
            prev[i] = cur;
            if (!old.visible || !cur.visible) continue;
            const double lo = std::min(old.u, cur.u);
            const double hi = std::max(old.u, cur.u);
            // strict crossing on the half-open interval (lo, hi]: a column
            // already sat on exactly does not re-fire while stationary
            const int c_lo = static_cast<int>(std::floor(lo)) + 1;
            const int c_hi = static_cast<int>(std::floor(hi));
            if (c_lo > c_hi) continue;  // no pixel column crossed
            const Beacon& b = scene.beacons[i];
            for (int col = c_lo; col <= c_hi; ++col) {
                const double frac = hi > lo ? (static_cast<double>(col) - old.u) / (cur.u - old.u) : 0.5;
                const double fr = std::clamp(frac, 0.0, 1.0);
                const uint64_t t_cross =
                    t0 + static_cast<uint64_t>(std::llround(fr * static_cast<double>(t1 - t0)));
                const double depth = old.depth + fr * (cur.depth - old.depth);
                const double v_top = cy + scene.focal_px * (scene.camera_height_m - b.height_m) / depth;
                const double v_bot = cy + scene.focal_px * scene.camera_height_m / depth;
                const int r_lo = std::max(0, static_cast<int>(std::ceil(v_top)));
                const int r_hi = std::min(static_cast<int>(scene.sensor_height) - 1,
                                          static_cast<int>(std::floor(v_bot)));
                for (int row = r_lo; row <= r_hi; ++row) {
                    // shared draw across illumination levels: higher level
                    // strictly adds events at fixed seed
                    const double gate = edge_rng.uniform();
                    if (gate < scene.illumination_level) {
                        out.events.push_back({t_cross, static_cast<uint16_t>(col),
                                              static_cast<uint16_t>(row),
                                              static_cast<uint8_t>(b.contrast > 0 ? 1 : 0)});
                    }
                }
            }
        }
    }

    // Poisson background noise, uniform over time, pixels and polarity
    if (scene.noise_rate > 0.0) {
        const double duration_s = static_cast<double>(poses.back().t_us - poses.front().t_us) * 1e-6;
        const double lambda = scene.noise_rate * scene.sensor_width * scene.sensor_height * duration_s;
        const uint64_t count = noise_rng.poisson(lambda);
        const uint64_t t_begin = poses.front().t_us;
        const uint64_t t_span = poses.back().t_us - t_begin;
        for (uint64_t i = 0; i < count; ++i) {
            Event e;
            e.t_us = t_begin + static_cast<uint64_t>(noise_rng.uniform() * static_cast<double>(t_span));
            e.x = static_cast<uint16_t>(noise_rng.uniform_index(scene.sensor_width));
            e.y = static_cast<uint16_t>(noise_rng.uniform_index(scene.sensor_height));
            e.polarity = static_cast<uint8_t>(noise_rng.uniform_index(2));
            out.events.push_back(e);
        }
    }

    std::stable_sort(out.events.begin(), out.events.end(),
                     [](const Event& a, const Event& b) { return a.t_us < b.t_us; });
    return out;
}

SceneSpec default_scene(const ArenaConfig& arena) {
    SceneSpec sc;
    sc.arena = arena;
    // one spacing family and contrast cycle per wall; dense enough that a
    // moving camera sees several edge crossings per 2 ms frame
    const double spacing[4] = {0.18, 0.24, 0.32, 0.42};
    const int cycle_len[4] = {1, 2, 1, 4};
    const int cycles[4][4] = {{+1, 0, 0, 0}, {+1, -1, 0, 0}, {-1, 0, 0, 0}, {+1, +1, -1, -1}};
    for (int wall = 0; wall < 4; ++wall) {
        const WallFrame w = wall_frame(wall, arena);
        int idx = 0;
        for (double off = 0.5 * spacing[wall]; off < w.length; off += spacing[wall], ++idx) {
            Beacon b;
            b.wall = wall;
            b.offset_m = off;
            b.contrast = cycles[wall][idx % cycle_len[wall]];
            b.freq_tag = spacing[wall];
            b.height_m = 0.5 + 0.25 * (idx % 3);
            sc.beacons.push_back(b);
        }
    }
    return sc;
}

TrajectorySpec default_trajectory(const ArenaConfig& arena) {
    TrajectorySpec tr;
    const double qx = arena.width_m / 4.0;
    const double qy = arena.height_m / 4.0;
    tr.waypoints = {{qx, qy, 0.0},
                    {3.0 * qx, qy, 0.0},
                    {3.0 * qx, 3.0 * qy, 0.0},
                    {qx, 3.0 * qy, 0.0}};
    return tr;
}

}  // namespace evpr
