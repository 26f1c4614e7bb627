#include "evpr/events.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "evpr/errors.hpp"

namespace evpr {

namespace {

constexpr char kMagic[4] = {'E', 'V', 'P', 'R'};
constexpr uint16_t kVersion = 1;
constexpr size_t kRecordSize = 14;

void put_u16(std::string& buf, uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u64(std::string& buf, uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint16_t get_u16(const unsigned char* p) {
    return static_cast<uint16_t>(p[0] | (static_cast<uint16_t>(p[1]) << 8));
}

uint64_t get_u64(const unsigned char* p) {
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return data;
}

void write_file(const std::filesystem::path& path, const std::string& data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!f) throw IoError("short write to " + path.string());
}

void check_event(const Event& e, uint16_t width, uint16_t height, uint64_t prev_t, size_t index,
                 const std::string& where) {
    if (e.t_us < prev_t) {
        throw ParseError(where + ": timestamp regression at record " + std::to_string(index) + " (" +
                         std::to_string(e.t_us) + " < " + std::to_string(prev_t) + ")");
    }
    if (e.x >= width || e.y >= height) {
        throw ParseError(where + ": pixel (" + std::to_string(e.x) + "," + std::to_string(e.y) +
                         ") outside sensor " + std::to_string(width) + "x" + std::to_string(height) +
                         " at record " + std::to_string(index));
    }
    if (e.polarity > 1) {
        throw ParseError(where + ": polarity must be 0 or 1 at record " + std::to_string(index));
    }
}

EventStream load_events_binary(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    if (data.size() < 10) {
        throw ParseError(path.string() + ": truncated header, file is " + std::to_string(data.size()) +
                         " bytes (byte offset 0)");
    }
    if (std::memcmp(data.data(), kMagic, 4) != 0) {
        throw ParseError(path.string() + ": bad magic at byte offset 0");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    const uint16_t version = get_u16(p + 4);
    if (version != kVersion) {
        throw ParseError(path.string() + ": unsupported version " + std::to_string(version) +
                         " at byte offset 4");
    }
    EventStream s;
    s.sensor_width = get_u16(p + 6);
    s.sensor_height = get_u16(p + 8);
    const size_t payload = data.size() - 10;
    if (payload % kRecordSize != 0) {
        throw ParseError(path.string() + ": payload not a multiple of the record size, trailing " +
                         std::to_string(payload % kRecordSize) + " bytes at byte offset " +
                         std::to_string(10 + payload - payload % kRecordSize));
    }
    const size_t count = payload / kRecordSize;
    s.events.resize(count);
    uint64_t prev_t = 0;
    for (size_t i = 0; i < count; ++i) {
        const unsigned char* r = p + 10 + i * kRecordSize;
        Event e;
        e.t_us = get_u64(r);
        e.x = get_u16(r + 8);
        e.y = get_u16(r + 10);
        e.polarity = r[12];
        check_event(e, s.sensor_width, s.sensor_height, prev_t, i, path.string());
        prev_t = e.t_us;
        s.events[i] = e;
    }
    return s;
}

EventStream load_events_csv(const std::filesystem::path& path, uint16_t width, uint16_t height) {
    if (width == 0 || height == 0) {
        throw ConfigError("csv event files carry no sensor geometry; pass sensor width/height");
    }
    const std::string data = read_file(path);
    EventStream s;
    s.sensor_width = width;
    s.sensor_height = height;

    size_t pos = 0;
    size_t line_no = 0;
    auto next_line = [&](std::string& out) -> bool {
        if (pos >= data.size()) return false;
        size_t end = data.find('\n', pos);
        if (end == std::string::npos) end = data.size();
        out.assign(data, pos, end - pos);
        if (!out.empty() && out.back() == '\r') out.pop_back();
        pos = end + 1;
        ++line_no;
        return true;
    };

    std::string line;
    if (!next_line(line) || line != "t_us,x,y,p") {
        throw ParseError(path.string() + ": expected header 't_us,x,y,p' on line 1");
    }
    uint64_t prev_t = 0;
    while (next_line(line)) {
        if (line.empty()) continue;
        unsigned long long t;
        unsigned x, y, pol;
        if (std::sscanf(line.c_str(), "%llu,%u,%u,%u", &t, &x, &y, &pol) != 4) {
            throw ParseError(path.string() + ": malformed event on line " + std::to_string(line_no));
        }
        Event e{static_cast<uint64_t>(t), static_cast<uint16_t>(x), static_cast<uint16_t>(y),
                static_cast<uint8_t>(pol)};
        check_event(e, width, height, prev_t, s.events.size(), path.string() + " line " + std::to_string(line_no));
        prev_t = e.t_us;
        s.events.push_back(e);
    }
    return s;
}

}  // namespace

EventStream load_events(const std::filesystem::path& path, EventFormat format,
                        uint16_t csv_sensor_width, uint16_t csv_sensor_height) {
    return format == EventFormat::binary ? load_events_binary(path)
                                         : load_events_csv(path, csv_sensor_width, csv_sensor_height);
}

void save_events(const std::filesystem::path& path, const EventStream& stream, EventFormat format) {
    std::string buf;
    if (format == EventFormat::binary) {
        buf.reserve(10 + stream.events.size() * kRecordSize);
        buf.append(kMagic, 4);
        put_u16(buf, kVersion);
        put_u16(buf, stream.sensor_width);
        put_u16(buf, stream.sensor_height);
        for (const Event& e : stream.events) {
            put_u64(buf, e.t_us);
            put_u16(buf, e.x);
            put_u16(buf, e.y);
            buf.push_back(static_cast<char>(e.polarity));
            buf.push_back('\0');
        }
    } else {
        buf = "t_us,x,y,p\n";
        char line[64];
        for (const Event& e : stream.events) {
            std::snprintf(line, sizeof(line), "%llu,%u,%u,%u\n",
                          static_cast<unsigned long long>(e.t_us), e.x, e.y, e.polarity);
            buf += line;
        }
    }
    write_file(path, buf);
}

std::vector<TimedPose> load_poses(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    std::vector<TimedPose> poses;

    size_t pos = 0;
    size_t line_no = 0;
    auto next_line = [&](std::string& out) -> bool {
        if (pos >= data.size()) return false;
        size_t end = data.find('\n', pos);
        if (end == std::string::npos) end = data.size();
        out.assign(data, pos, end - pos);
        if (!out.empty() && out.back() == '\r') out.pop_back();
        pos = end + 1;
        ++line_no;
        return true;
    };

    std::string line;
    if (!next_line(line) || line != "t_us,x_m,y_m,yaw_rad") {
        throw ParseError(path.string() + ": expected header 't_us,x_m,y_m,yaw_rad' on line 1");
    }
    uint64_t prev_t = 0;
    while (next_line(line)) {
        if (line.empty()) continue;
        unsigned long long t;
        double x, y, yaw;
        if (std::sscanf(line.c_str(), "%llu,%lf,%lf,%lf", &t, &x, &y, &yaw) != 4) {
            throw ParseError(path.string() + ": malformed pose on line " + std::to_string(line_no));
        }
        if (!poses.empty() && t < prev_t) {
            throw ParseError(path.string() + ": timestamp regression on line " + std::to_string(line_no));
        }
        prev_t = t;
        poses.push_back({static_cast<uint64_t>(t), {x, y, yaw}});
    }
    return poses;
}

void save_poses(const std::filesystem::path& path, const std::vector<TimedPose>& poses) {
    std::string buf = "t_us,x_m,y_m,yaw_rad\n";
    char line[128];
    for (const TimedPose& p : poses) {
        std::snprintf(line, sizeof(line), "%llu,%.17g,%.17g,%.17g\n",
                      static_cast<unsigned long long>(p.t_us), p.pose.x_m, p.pose.y_m, p.pose.yaw_rad);
        buf += line;
    }
    write_file(path, buf);
}

Pose interpolate_pose(const std::vector<TimedPose>& poses, uint64_t t_us) {
    if (poses.empty()) throw ConfigError("interpolate_pose: empty pose log");
    if (t_us < poses.front().t_us || t_us > poses.back().t_us) {
        throw ConfigError("interpolate_pose: time " + std::to_string(t_us) +
                          " outside pose log span [" + std::to_string(poses.front().t_us) + "," +
                          std::to_string(poses.back().t_us) + "]");
    }
    // binary search for the segment containing t
    size_t lo = 0, hi = poses.size() - 1;
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        if (poses[mid].t_us <= t_us) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const TimedPose& a = poses[lo];
    const TimedPose& b = poses[hi];
    if (a.t_us == b.t_us || t_us <= a.t_us) return a.pose;
    const double w = static_cast<double>(t_us - a.t_us) / static_cast<double>(b.t_us - a.t_us);
    Pose out;
    out.x_m = a.pose.x_m + w * (b.pose.x_m - a.pose.x_m);
    out.y_m = a.pose.y_m + w * (b.pose.y_m - a.pose.y_m);
    // shortest-arc blend keeps yaw continuous across the +/- pi seam
    double dyaw = b.pose.yaw_rad - a.pose.yaw_rad;
    while (dyaw > M_PI) dyaw -= 2.0 * M_PI;
    while (dyaw < -M_PI) dyaw += 2.0 * M_PI;
    out.yaw_rad = a.pose.yaw_rad + w * dyaw;
    return out;
}

}  // namespace evpr
