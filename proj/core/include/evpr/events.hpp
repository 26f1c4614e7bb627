#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "evpr/arena.hpp"

namespace evpr {

struct Event {
    uint64_t t_us = 0;
    uint16_t x = 0;
    uint16_t y = 0;
    uint8_t polarity = 0;  // 0 = OFF, 1 = ON
};

// Time-ordered event stream with sensor geometry.
struct EventStream {
    uint16_t sensor_width = 0;
    uint16_t sensor_height = 0;
    std::vector<Event> events;

    bool empty() const { return events.empty(); }
    uint64_t t_begin() const { return events.empty() ? 0 : events.front().t_us; }
    uint64_t t_end() const { return events.empty() ? 0 : events.back().t_us; }
};

enum class EventFormat { binary, csv };

// Binary layout: magic "EVPR", version u16 LE = 1, sensor_width u16 LE,
// sensor_height u16 LE, then packed 14-byte records
// {t_us u64 LE, x u16 LE, y u16 LE, polarity u8, pad u8}.
// CSV layout: header "t_us,x,y,p", one event per line; sensor geometry is
// supplied by the caller because the text format does not carry it.
EventStream load_events(const std::filesystem::path& path, EventFormat format,
                        uint16_t csv_sensor_width = 0, uint16_t csv_sensor_height = 0);
void save_events(const std::filesystem::path& path, const EventStream& stream, EventFormat format);

struct TimedPose {
    uint64_t t_us = 0;
    Pose pose;
};

// Pose CSV: header "t_us,x_m,y_m,yaw_rad".
std::vector<TimedPose> load_poses(const std::filesystem::path& path);
void save_poses(const std::filesystem::path& path, const std::vector<TimedPose>& poses);

// Linear interpolation at t; t must lie within the log's span.
Pose interpolate_pose(const std::vector<TimedPose>& poses, uint64_t t_us);

}  // namespace evpr
