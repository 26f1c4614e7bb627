#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "evpr/errors.hpp"
#include "evpr/samples.hpp"
#include "evpr/synth.hpp"

using namespace evpr;

namespace {

ArenaConfig tiny_arena() { return {4.0, 4.0, 2, 2}; }

SceneSpec tiny_scene() {
    SceneSpec sc = default_scene(tiny_arena());
    return sc;
}

std::string poses_as_bytes(const std::vector<TimedPose>& poses) {
    const auto path = std::filesystem::temp_directory_path() / "evpr_synth_poses.csv";
    save_poses(path, poses);
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("trajectory closes its loop") {
    TrajectorySpec tr = default_trajectory(tiny_arena());
    tr.rounds = 1;
    const auto poses = generate_trajectory(tr, tiny_arena());
    REQUIRE(poses.size() > 10);
    CHECK(poses.front().pose.x_m == doctest::Approx(poses.back().pose.x_m).epsilon(1e-9));
    CHECK(poses.front().pose.y_m == doctest::Approx(poses.back().pose.y_m).epsilon(1e-9));
    // fixed 100 Hz tick
    CHECK(poses[1].t_us - poses[0].t_us == 10000);
}

TEST_CASE("doubling the speed halves the duration") {
    TrajectorySpec tr = default_trajectory(tiny_arena());
    tr.rounds = 2;
    const auto slow = generate_trajectory(tr, tiny_arena());
    tr.speed_mps *= 2.0;
    const auto fast = generate_trajectory(tr, tiny_arena());
    const double ratio = static_cast<double>(slow.back().t_us) / static_cast<double>(fast.back().t_us);
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("fixed seed gives a byte-identical pose log") {
    TrajectorySpec tr = default_trajectory(tiny_arena());
    const auto a = generate_trajectory(tr, tiny_arena());
    const auto b = generate_trajectory(tr, tiny_arena());
    CHECK(poses_as_bytes(a) == poses_as_bytes(b));

    tr.seed += 1;
    const auto c = generate_trajectory(tr, tiny_arena());
    CHECK(poses_as_bytes(a) != poses_as_bytes(c));
}

TEST_CASE("rounds scale the duration roughly linearly") {
    TrajectorySpec tr = default_trajectory(tiny_arena());
    tr.rounds = 1;
    const auto one = generate_trajectory(tr, tiny_arena());
    tr.rounds = 3;
    const auto three = generate_trajectory(tr, tiny_arena());
    const double ratio = static_cast<double>(three.back().t_us) / static_cast<double>(one.back().t_us);
    CHECK(ratio == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("a stationary robot with zero noise yields an empty stream") {
    SceneSpec sc = tiny_scene();
    sc.noise_rate = 0.0;
    std::vector<TimedPose> poses;
    for (uint64_t t = 0; t <= 100000; t += 10000) poses.push_back({t, {2.0, 2.0, 0.3}});
    const EventStream s = render_events(poses, sc, 5);
    CHECK(s.empty());
}

TEST_CASE("with one beacon and no noise all events share its polarity") {
    SceneSpec sc = tiny_scene();
    sc.noise_rate = 0.0;
    sc.beacons = {{0, 2.0, -1, 1.0, 0.5}};  // single OFF beacon on the south wall
    TrajectorySpec tr = default_trajectory(tiny_arena());
    tr.rounds = 1;
    const auto poses = generate_trajectory(tr, tiny_arena());
    const EventStream s = render_events(poses, sc, 5);
    REQUIRE(!s.empty());
    for (const Event& e : s.events) CHECK(e.polarity == 0);
}

TEST_CASE("event count grows monotonically with illumination at fixed seed") {
    TrajectorySpec tr = default_trajectory(tiny_arena());
    tr.rounds = 1;
    const auto poses = generate_trajectory(tr, tiny_arena());
    SceneSpec sc = tiny_scene();
    sc.noise_rate = 0.0;
    size_t prev = 0;
    for (double level : {0.3, 0.6, 1.0}) {
        sc.illumination_level = level;
        const EventStream s = render_events(poses, sc, 99);
        CHECK(s.events.size() >= prev);
        prev = s.events.size();
    }
    CHECK(prev > 0);
}

TEST_CASE("render_events is deterministic and in-bounds") {
    TrajectorySpec tr = default_trajectory(tiny_arena());
    tr.rounds = 1;
    const auto poses = generate_trajectory(tr, tiny_arena());
    SceneSpec sc = tiny_scene();
    const EventStream a = render_events(poses, sc, 7);
    const EventStream b = render_events(poses, sc, 7);
    REQUIRE(a.events.size() == b.events.size());
    for (size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].t_us == b.events[i].t_us);
        CHECK(a.events[i].x == b.events[i].x);
        CHECK(a.events[i].y == b.events[i].y);
        CHECK(a.events[i].polarity == b.events[i].polarity);
    }
    uint64_t prev_t = 0;
    for (const Event& e : a.events) {
        CHECK(e.t_us >= prev_t);
        prev_t = e.t_us;
        CHECK(e.x < sc.sensor_width);
        CHECK(e.y < sc.sensor_height);
        CHECK(e.t_us >= poses.front().t_us);
        CHECK(e.t_us <= poses.back().t_us);
    }
}

TEST_CASE("scenes with duplicate wall patterns are rejected") {
    SceneSpec sc = tiny_scene();
    for (auto& b : sc.beacons) b.freq_tag = 1.0;  // all walls now share a signature
    std::vector<TimedPose> poses{{0, {2, 2, 0}}, {10000, {2.1, 2, 0}}};
    CHECK_THROWS_AS(render_events(poses, sc, 1), ConfigError);
}

TEST_CASE("nearest-centroid separability floor on a 2x2-cell scene") {
    const ArenaConfig arena = tiny_arena();
    TrajectorySpec tr = default_trajectory(arena);
    tr.rounds = 2;
    const auto poses = generate_trajectory(tr, arena);
    const EventStream stream = render_events(poses, default_scene(arena), 21);
    REQUIRE(stream.events.size() > 500);

    SamplerConfig cfg;
    cfg.binning.window_us = 2000;
    cfg.binning.frames_per_sample = 10;
    cfg.binning.target_size = 32;
    cfg.stride_us = 200000;
    const SampleDataset ds = make_samples(stream, poses, arena, cfg);
    REQUIRE(ds.samples.size() > 40);

    // time-summed frames, split even/odd into train/test halves
    const size_t dim = 2u * 32u * 32u;
    auto flat = [&](const EventSample& s) {
        std::vector<double> v(dim, 0.0);
        const size_t per_step = dim;
        for (int t = 0; t < ds.frames_per_sample; ++t) {
            for (size_t i = 0; i < per_step; ++i) v[i] += s.frames[t * per_step + i];
        }
        return v;
    };

    std::vector<std::vector<double>> centroid(4, std::vector<double>(dim, 0.0));
    std::vector<int> count(4, 0);
    for (size_t i = 0; i < ds.samples.size(); i += 2) {
        const auto v = flat(ds.samples[i]);
        const int c = ds.samples[i].cell;
        for (size_t j = 0; j < dim; ++j) centroid[c][j] += v[j];
        ++count[c];
    }
    for (int c = 0; c < 4; ++c) {
        REQUIRE(count[c] > 0);
        for (double& x : centroid[c]) x /= count[c];
    }

    int hits = 0, total = 0;
    for (size_t i = 1; i < ds.samples.size(); i += 2) {
        const auto v = flat(ds.samples[i]);
        int best = 0;
        double best_d = 1e300;
        for (int c = 0; c < 4; ++c) {
            double d = 0.0;
            for (size_t j = 0; j < dim; ++j) d += (v[j] - centroid[c][j]) * (v[j] - centroid[c][j]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        hits += best == ds.samples[i].cell;
        ++total;
    }
    const double acc = static_cast<double>(hits) / total;
    CHECK(acc > 0.25);  // strictly above chance for 4 cells
}
