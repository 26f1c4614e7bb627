#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "evpr/binning.hpp"
#include "evpr/errors.hpp"
#include "evpr/rng.hpp"
#include "evpr/samples.hpp"

using namespace evpr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "evpr_eventio_test";
    fs::create_directories(dir);
    return dir;
}

EventStream fixture_stream() {
    EventStream s;
    s.sensor_width = 64;
    s.sensor_height = 48;
    s.events = {{1000, 3, 4, 1}, {2500, 60, 47, 0}, {2500, 10, 10, 1}};
    return s;
}

}  // namespace

TEST_CASE("binary event files round-trip exactly") {
    const auto path = temp_dir() / "fixture.evpr";
    const EventStream s = fixture_stream();
    save_events(path, s, EventFormat::binary);
    const EventStream r = load_events(path, EventFormat::binary);
    CHECK(r.sensor_width == s.sensor_width);
    CHECK(r.sensor_height == s.sensor_height);
    REQUIRE(r.events.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(r.events[i].t_us == s.events[i].t_us);
        CHECK(r.events[i].x == s.events[i].x);
        CHECK(r.events[i].y == s.events[i].y);
        CHECK(r.events[i].polarity == s.events[i].polarity);
    }
}

TEST_CASE("csv event files round-trip exactly") {
    const auto path = temp_dir() / "fixture.csv";
    const EventStream s = fixture_stream();
    save_events(path, s, EventFormat::csv);
    const EventStream r = load_events(path, EventFormat::csv, s.sensor_width, s.sensor_height);
    REQUIRE(r.events.size() == 3);
    CHECK(r.events[1].x == 60);
    CHECK(r.events[2].t_us == 2500);
}

TEST_CASE("empty payload after header loads as an empty stream") {
    const auto path = temp_dir() / "empty.evpr";
    EventStream s;
    s.sensor_width = 32;
    s.sensor_height = 32;
    save_events(path, s, EventFormat::binary);
    const EventStream r = load_events(path, EventFormat::binary);
    CHECK(r.empty());
    CHECK(r.sensor_width == 32);
}

TEST_CASE("descending timestamps are rejected") {
    const auto path = temp_dir() / "regress.evpr";
    EventStream s = fixture_stream();
    std::swap(s.events[0], s.events[2]);
    // writing is permissive; loading validates
    save_events(path, s, EventFormat::binary);
    CHECK_THROWS_AS(load_events(path, EventFormat::binary), ParseError);
}

TEST_CASE("bad magic reports the byte offset") {
    const auto path = temp_dir() / "bad_magic.evpr";
    std::ofstream f(path, std::ios::binary);
    f << "NOPE" << std::string(12, '\0');
    f.close();
    CHECK_THROWS_WITH_AS(load_events(path, EventFormat::binary), doctest::Contains("byte offset 0"),
                         ParseError);
}

TEST_CASE("out-of-bounds pixels are rejected") {
    const auto path = temp_dir() / "oob.evpr";
    EventStream s = fixture_stream();
    s.events[2].x = 64;  // == sensor_width
    save_events(path, s, EventFormat::binary);
    CHECK_THROWS_AS(load_events(path, EventFormat::binary), ParseError);
}

TEST_CASE("bin_events of an empty stream is all zero") {
    EventStream s;
    s.sensor_width = 64;
    s.sensor_height = 64;
    BinningConfig cfg;
    cfg.frames_per_sample = 10;
    cfg.target_size = 32;
    const auto frames = bin_events(s, 0, cfg);
    CHECK(frames.size() == 10u * 2u * 32u * 32u);
    for (uint8_t v : frames) CHECK(v == 0);
}

TEST_CASE("bin_events frame indexing uses half-open 2ms windows") {
    EventStream s;
    s.sensor_width = 64;
    s.sensor_height = 64;
    s.events = {{10000 + 3100, 0, 0, 1}, {10000 + 2000, 2, 2, 0}};
    std::sort(s.events.begin(), s.events.end(),
              [](const Event& a, const Event& b) { return a.t_us < b.t_us; });
    BinningConfig cfg;
    cfg.frames_per_sample = 5;
    cfg.target_size = 32;
    BinStats stats;
    const auto frames = bin_events(s, 10000, cfg, &stats);
    const size_t plane = 32 * 32;
    // event at +3100us lands in frame 1 (floor(3100/2000) = 1), channel 1
    CHECK(frames[(1 * 2 + 1) * plane + 0] == 1);
    // event exactly at +2000us belongs to frame 1, not frame 0
    CHECK(frames[(1 * 2 + 0) * plane + 1 * 32 + 1] == 1);
    CHECK(stats.in_window == 2);
}

TEST_CASE("bin_events drops and counts out-of-range events; clipping only reduces") {
    EventStream s;
    s.sensor_width = 8;
    s.sensor_height = 8;
    // 5 events on one pixel in one window, plus one before t_start
    s.events = {{5, 1, 1, 1}, {1005, 1, 1, 1}, {1006, 1, 1, 1}, {1007, 1, 1, 1}, {1008, 1, 1, 1}};
    BinningConfig cfg;
    cfg.window_us = 1000;
    cfg.frames_per_sample = 2;
    cfg.target_size = 8;
    cfg.clip_cap = 3;
    BinStats stats;
    const auto frames = bin_events(s, 1000, cfg, &stats);
    CHECK(stats.dropped_time == 1);
    uint64_t total = 0;
    for (uint8_t v : frames) total += v;
    CHECK(total == 3);  // clipped at cap
    CHECK(total <= stats.in_window);
}

TEST_CASE("bin_events is translation-equivariant in time") {
    Rng rng(9);
    EventStream s;
    s.sensor_width = 16;
    s.sensor_height = 16;
    uint64_t t = 500;
    for (int i = 0; i < 200; ++i) {
        t += rng.uniform_index(300);
        s.events.push_back({t, static_cast<uint16_t>(rng.uniform_index(16)),
                            static_cast<uint16_t>(rng.uniform_index(16)),
                            static_cast<uint8_t>(rng.uniform_index(2))});
    }
    BinningConfig cfg;
    cfg.window_us = 1000;
    cfg.frames_per_sample = 8;
    cfg.target_size = 16;

    const auto base = bin_events(s, 2000, cfg);
    const uint64_t delta = 777777;
    EventStream shifted = s;
    for (auto& e : shifted.events) e.t_us += delta;
    const auto moved = bin_events(shifted, 2000 + delta, cfg);
    CHECK(base == moved);
}

TEST_CASE("bin_events downsamples by event-count aggregation") {
    EventStream s;
    s.sensor_width = 8;
    s.sensor_height = 8;
    // four sensor pixels collapsing onto target pixel (0,0)
    s.events = {{0, 0, 0, 1}, {1, 1, 0, 1}, {2, 0, 1, 1}, {3, 1, 1, 1}};
    BinningConfig cfg;
    cfg.window_us = 1000;
    cfg.frames_per_sample = 1;
    cfg.target_size = 4;
    cfg.clip_cap = 255;
    const auto frames = bin_events(s, 0, cfg);
    CHECK(frames[1 * 4 * 4 + 0] == 4);  // channel 1, pixel (0,0)
}

TEST_CASE("label_cell spans the arena grid") {
    ArenaConfig arena;  // 6x4 m, 4x4 cells
    CHECK(label_cell({0.1, 0.1, 0.0}, arena) == 0);
    CHECK(label_cell({5.9, 3.9, 0.0}, arena) == 15);
    CHECK(label_cell({2.0, 1.2, 0.0}, arena) == 5);
    CHECK_THROWS_AS(label_cell({-0.01, 1.0, 0.0}, arena), ConfigError);
    CHECK_THROWS_AS(label_cell({6.01, 1.0, 0.0}, arena), ConfigError);
}

TEST_CASE("label_cell partitions the arena with half-open cells") {
    ArenaConfig arena;
    Rng rng(11);
    std::vector<int> counts(arena.num_cells(), 0);
    for (int i = 0; i < 2000; ++i) {
        const Pose p{rng.uniform(0.0, 6.0), rng.uniform(0.0, 4.0), 0.0};
        const int cell = label_cell(p, arena);
        REQUIRE(cell >= 0);
        REQUIRE(cell < arena.num_cells());
        ++counts[cell];
    }
    // boundaries: the interior edge belongs to the next cell, the arena's
    // top/right edge folds into the last row/col
    CHECK(label_cell({1.5, 0.0, 0.0}, arena) == 1);
    CHECK(label_cell({6.0, 4.0, 0.0}, arena) == 15);
}

TEST_CASE("make_samples on a stream shorter than one span is empty") {
    EventStream s;
    s.sensor_width = 8;
    s.sensor_height = 8;
    s.events = {{0, 1, 1, 1}, {5000, 2, 2, 0}};
    std::vector<TimedPose> poses{{0, {1, 1, 0}}, {10000, {1, 1, 0}}};
    SamplerConfig cfg;
    cfg.binning.window_us = 1000;
    cfg.binning.frames_per_sample = 10;
    cfg.binning.target_size = 8;
    cfg.stride_us = 1000;
    ArenaConfig arena;
    const auto ds = make_samples(s, poses, arena, cfg);
    CHECK(ds.samples.empty());
}

TEST_CASE("make_samples with a constant pose log labels every sample alike") {
    Rng rng(12);
    EventStream s;
    s.sensor_width = 8;
    s.sensor_height = 8;
    for (uint64_t t = 0; t <= 100000; t += 500) {
        s.events.push_back({t, static_cast<uint16_t>(rng.uniform_index(8)),
                            static_cast<uint16_t>(rng.uniform_index(8)), 1});
    }
    std::vector<TimedPose> poses;
    for (uint64_t t = 0; t <= 100000; t += 10000) poses.push_back({t, {2.0, 1.2, 0.0}});
    SamplerConfig cfg;
    cfg.binning.window_us = 1000;
    cfg.binning.frames_per_sample = 10;
    cfg.binning.target_size = 8;
    cfg.stride_us = 10000;
    ArenaConfig arena;
    const auto ds = make_samples(s, poses, arena, cfg);
    REQUIRE(!ds.samples.empty());
    for (const auto& smp : ds.samples) {
        CHECK(smp.cell == 5);
        CHECK(smp.pose.x_m == doctest::Approx(2.0));
    }
}

TEST_CASE("make_samples interpolates the pose to the sample mid time") {
    EventStream s;
    s.sensor_width = 8;
    s.sensor_height = 8;
    for (uint64_t t = 0; t <= 20000; t += 250) s.events.push_back({t, 1, 1, 1});
    // two poses; sample [0,10000) has mid time 5000, exactly halfway
    std::vector<TimedPose> poses{{0, {1.0, 2.0, 0.0}}, {10000, {3.0, 2.0, 0.0}}, {20000, {3.0, 2.0, 0.0}}};
    SamplerConfig cfg;
    cfg.binning.window_us = 1000;
    cfg.binning.frames_per_sample = 10;
    cfg.binning.target_size = 8;
    cfg.stride_us = 50000;
    ArenaConfig arena;
    const auto ds = make_samples(s, poses, arena, cfg);
    REQUIRE(!ds.samples.empty());
    CHECK(ds.samples[0].t_mid_us == 5000);
    CHECK(ds.samples[0].pose.x_m == doctest::Approx(2.0));
}

TEST_CASE("make_samples rejects pose log gaps beyond the tolerance") {
    EventStream s;
    s.sensor_width = 8;
    s.sensor_height = 8;
    for (uint64_t t = 0; t <= 500000; t += 250) s.events.push_back({t, 1, 1, 1});
    std::vector<TimedPose> poses{{0, {1, 1, 0}}, {400000, {1, 1, 0}}, {500000, {1, 1, 0}}};
    SamplerConfig cfg;
    cfg.binning.window_us = 1000;
    cfg.binning.frames_per_sample = 10;
    cfg.binning.target_size = 8;
    cfg.stride_us = 10000;
    cfg.pose_gap_tolerance_us = 200000;
    ArenaConfig arena;
    CHECK_THROWS_WITH_AS(make_samples(s, poses, arena, cfg), doctest::Contains("gap"), ConfigError);
}

TEST_CASE("sample archives round-trip through the container format") {
    Rng rng(13);
    SampleDataset ds;
    ds.frames_per_sample = 3;
    ds.height = 4;
    ds.width = 4;
    for (int i = 0; i < 5; ++i) {
        EventSample smp;
        smp.frames.resize(ds.frame_elems());
        for (auto& v : smp.frames) v = static_cast<uint8_t>(rng.uniform_index(2));
        smp.t_mid_us = 1000 * (i + 1);
        smp.pose = {0.5 * i, 0.25 * i, 0.1 * i};
        smp.cell = i % 3;
        ds.samples.push_back(std::move(smp));
    }
    const auto path = temp_dir() / "samples.gvsa";
    save_samples(path, ds);
    const SampleDataset r = load_samples(path);
    REQUIRE(r.samples.size() == 5);
    CHECK(r.frames_per_sample == 3);
    CHECK(r.samples[2].frames == ds.samples[2].frames);
    CHECK(r.samples[4].t_mid_us == 5000);
    CHECK(r.samples[3].pose.y_m == doctest::Approx(0.75));
    CHECK(r.samples[1].cell == 1);

    // byte-identical rewrite
    const auto path2 = temp_dir() / "samples2.gvsa";
    save_samples(path2, r);
    std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
    const std::string ba((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    const std::string bb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(ba == bb);
}

TEST_CASE("pose csv round-trips") {
    const auto path = temp_dir() / "poses.csv";
    std::vector<TimedPose> poses{{0, {0.123456789, 1.0, -0.5}}, {10000, {2.0, 3.0, 3.14}}};
    save_poses(path, poses);
    const auto r = load_poses(path);
    REQUIRE(r.size() == 2);
    CHECK(r[0].pose.x_m == doctest::Approx(0.123456789).epsilon(1e-12));
    CHECK(r[1].t_us == 10000);
}
