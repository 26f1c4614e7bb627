#include "evpr/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "evpr/errors.hpp"

namespace evpr {

using nlohmann::json;

SamplerConfig RunConfig::sampler_config() const {
    SamplerConfig sc;
    sc.binning = binning;
    sc.stride_us = sample_stride_us;
    sc.pose_gap_tolerance_us = pose_gap_tolerance_us;
    return sc;
}

void RunConfig::finalize() {
    arena.validate();
    arch.num_classes = arena.num_cells();
    train.clip_cap = binning.clip_cap;
    scene.arena = arena;

    arch.validate();
    lif.validate();
    train.validate();
    scene.validate();
    trajectory.validate(arena);
    if (retrieval_seq_len < 1) throw ConfigError("retrieval.seq_len must be >= 1");

    if (arch.input_hw != binning.target_size) {
        throw ConfigError("config: arch.input_hw (" + std::to_string(arch.input_hw) +
                          ") must equal binning.target_size (" + std::to_string(binning.target_size) + ")");
    }
    if (arch.timesteps != binning.frames_per_sample) {
        throw ConfigError("config: arch.timesteps (" + std::to_string(arch.timesteps) +
                          ") must equal binning.frames_per_sample (" +
                          std::to_string(binning.frames_per_sample) + ")");
    }
    if (arch.input_channels != 2) {
        throw ConfigError("config: the event pipeline produces 2 polarity channels");
    }
}

RunConfig profile_defaults(const std::string& name) {
    RunConfig c;
    if (name == "paper") {
        c.arena = {6.0, 4.0, 4, 4};
        c.arch.channels = {32, 64, 128, 128};
        c.arch.strides = {2, 2, 2, 2};
        c.arch.timesteps = 50;
        c.arch.latent_dim = 64;
        c.arch.excitation_dim = 16;
        c.arch.input_hw = 128;
        c.train.epochs = 100;
        c.train.batch_size = 16;
        c.binning.window_us = 2000;
        c.binning.frames_per_sample = 50;
        c.binning.target_size = 128;
        c.sample_stride_us = 100000;  // one sample length, non-overlapping
        c.scene.sensor_width = 256;
        c.scene.sensor_height = 256;
        c.scene.focal_px = 128.0;
        c.trajectory.rounds = 4;
    } else if (name == "tiny") {
        c.arena = {4.0, 4.0, 2, 2};
        c.arch.channels = {16, 32, 64};
        c.arch.strides = {2, 2, 2};
        c.arch.timesteps = 10;
        c.arch.latent_dim = 64;
        c.arch.excitation_dim = 4;
        c.arch.input_hw = 32;
        c.train.epochs = 50;
        c.train.batch_size = 16;
        c.binning.window_us = 2000;
        c.binning.frames_per_sample = 10;
        c.binning.target_size = 32;
        c.sample_stride_us = 200000;
        c.scene.sensor_width = 64;
        c.scene.sensor_height = 64;
        c.scene.focal_px = 32.0;
        c.trajectory.rounds = 3;
    } else {
        throw ConfigError("unknown profile '" + name + "' (expected 'paper' or 'tiny')");
    }
    c.scene.arena = c.arena;
    c.scene.beacons = default_scene(c.arena).beacons;
    c.trajectory.waypoints = default_trajectory(c.arena).waypoints;
    c.finalize();
    return c;
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!known.count(key)) {
            throw ConfigError("config: unknown key '" + where + key + "'");
        }
    }
}

template <typename T>
void get_if(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

void parse_arena(const json& j, ArenaConfig& a) {
    reject_unknown(j, {"width_m", "height_m", "grid_cols", "grid_rows"}, "arena.");
    get_if(j, "width_m", a.width_m);
    get_if(j, "height_m", a.height_m);
    get_if(j, "grid_cols", a.grid_cols);
    get_if(j, "grid_rows", a.grid_rows);
}

void parse_arch(const json& j, ArchConfig& a) {
    reject_unknown(j,
                   {"channels", "strides", "kernel", "timesteps", "latent_dim", "excitation_dim",
                    "input_hw", "classifier_hidden", "integrator_decay", "snn_init_gain"},
                   "arch.");
    get_if(j, "channels", a.channels);
    get_if(j, "strides", a.strides);
    get_if(j, "kernel", a.kernel);
    get_if(j, "timesteps", a.timesteps);
    get_if(j, "latent_dim", a.latent_dim);
    get_if(j, "excitation_dim", a.excitation_dim);
    get_if(j, "input_hw", a.input_hw);
    get_if(j, "classifier_hidden", a.classifier_hidden);
    get_if(j, "integrator_decay", a.integrator_decay);
    get_if(j, "snn_init_gain", a.snn_init_gain);
}

void parse_lif(const json& j, LifParams& p) {
    reject_unknown(j, {"alpha", "threshold", "reset", "surrogate_slope"}, "lif.");
    get_if(j, "alpha", p.alpha);
    get_if(j, "threshold", p.threshold);
    if (j.contains("reset")) {
        const std::string r = j.at("reset").get<std::string>();
        if (r == "subtract") {
            p.reset = ResetMode::subtract;
        } else if (r == "zero") {
            p.reset = ResetMode::zero;
        } else {
            throw ConfigError("config: lif.reset must be 'subtract' or 'zero'");
        }
    }
    get_if(j, "surrogate_slope", p.surrogate_slope);
}

void parse_train(const json& j, TrainConfig& t) {
    reject_unknown(j,
                   {"beta", "epochs", "batch_size", "lr", "seed", "lambda_exc", "lambda_inh_adv",
                    "inh_steps_per_batch", "val_fraction"},
                   "train.");
    get_if(j, "beta", t.beta);
    get_if(j, "epochs", t.epochs);
    get_if(j, "batch_size", t.batch_size);
    get_if(j, "lr", t.lr);
    get_if(j, "seed", t.seed);
    get_if(j, "lambda_exc", t.lambda_exc);
    get_if(j, "lambda_inh_adv", t.lambda_inh_adv);
    get_if(j, "inh_steps_per_batch", t.inh_steps_per_batch);
    get_if(j, "val_fraction", t.val_fraction);
}

void parse_binning(const json& j, BinningConfig& b) {
    reject_unknown(j, {"window_us", "frames_per_sample", "crop", "target_size", "clip_cap"}, "binning.");
    get_if(j, "window_us", b.window_us);
    get_if(j, "frames_per_sample", b.frames_per_sample);
    if (j.contains("crop") && !j.at("crop").is_null()) {
        const auto v = j.at("crop").get<std::vector<int>>();
        if (v.size() != 4) throw ConfigError("config: binning.crop must be [x0,y0,width,height]");
        b.crop = {static_cast<uint16_t>(v[0]), static_cast<uint16_t>(v[1]),
                  static_cast<uint16_t>(v[2]), static_cast<uint16_t>(v[3])};
    }
    get_if(j, "target_size", b.target_size);
    get_if(j, "clip_cap", b.clip_cap);
}

void parse_sampler(const json& j, RunConfig& c) {
    reject_unknown(j, {"stride_us", "pose_gap_tolerance_us"}, "sampler.");
    get_if(j, "stride_us", c.sample_stride_us);
    get_if(j, "pose_gap_tolerance_us", c.pose_gap_tolerance_us);
}

void parse_scene(const json& j, SceneSpec& s) {
    reject_unknown(j,
                   {"illumination_level", "noise_rate", "sensor_width", "sensor_height", "focal_px",
                    "camera_height_m", "beacons"},
                   "scene.");
    get_if(j, "illumination_level", s.illumination_level);
    get_if(j, "noise_rate", s.noise_rate);
    get_if(j, "sensor_width", s.sensor_width);
    get_if(j, "sensor_height", s.sensor_height);
    get_if(j, "focal_px", s.focal_px);
    get_if(j, "camera_height_m", s.camera_height_m);
    if (j.contains("beacons")) {
        s.beacons.clear();
        for (const auto& bj : j.at("beacons")) {
            reject_unknown(bj, {"wall", "offset_m", "contrast", "freq_tag", "height_m"},
                           "scene.beacons[].");
            Beacon b;
            get_if(bj, "wall", b.wall);
            get_if(bj, "offset_m", b.offset_m);
            get_if(bj, "contrast", b.contrast);
            get_if(bj, "freq_tag", b.freq_tag);
            get_if(bj, "height_m", b.height_m);
            s.beacons.push_back(b);
        }
    }
}

void parse_trajectory(const json& j, TrajectorySpec& t) {
    reject_unknown(j,
                   {"waypoints", "speed_mps", "rounds", "seed", "wobble_amplitude_rad",
                    "wobble_freq_hz"},
                   "trajectory.");
    if (j.contains("waypoints")) {
        t.waypoints.clear();
        for (const auto& w : j.at("waypoints")) {
            const auto v = w.get<std::vector<double>>();
            if (v.size() != 2) throw ConfigError("config: trajectory.waypoints entries must be [x,y]");
            t.waypoints.push_back({v[0], v[1], 0.0});
        }
    }
    get_if(j, "speed_mps", t.speed_mps);
    get_if(j, "rounds", t.rounds);
    get_if(j, "seed", t.seed);
    get_if(j, "wobble_amplitude_rad", t.wobble_amplitude_rad);
    get_if(j, "wobble_freq_hz", t.wobble_freq_hz);
}

void parse_probe(const json& j, ProbeConfig& p) {
    reject_unknown(j, {"epochs", "batch_size", "lr", "hidden", "seed"}, "probe.");
    get_if(j, "epochs", p.epochs);
    get_if(j, "batch_size", p.batch_size);
    get_if(j, "lr", p.lr);
    get_if(j, "hidden", p.hidden);
    get_if(j, "seed", p.seed);
}

}  // namespace

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(f, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    reject_unknown(j,
                   {"arena", "arch", "lif", "train", "binning", "sampler", "scene", "trajectory",
                    "probe", "retrieval"},
                   "");

    if (j.contains("arena")) parse_arena(j.at("arena"), base.arena);
    if (j.contains("arch")) parse_arch(j.at("arch"), base.arch);
    if (j.contains("lif")) parse_lif(j.at("lif"), base.lif);
    if (j.contains("train")) parse_train(j.at("train"), base.train);
    if (j.contains("binning")) parse_binning(j.at("binning"), base.binning);
    if (j.contains("sampler")) parse_sampler(j.at("sampler"), base);
    if (j.contains("scene")) parse_scene(j.at("scene"), base.scene);
    if (j.contains("trajectory")) parse_trajectory(j.at("trajectory"), base.trajectory);
    if (j.contains("probe")) parse_probe(j.at("probe"), base.probe);
    if (j.contains("retrieval")) {
        reject_unknown(j.at("retrieval"), {"seq_len"}, "retrieval.");
        get_if(j.at("retrieval"), "seq_len", base.retrieval_seq_len);
    }

    base.finalize();
    return base;
}

std::string config_keys_help() {
    return "arena.width_m, arena.height_m, arena.grid_cols, arena.grid_rows, "
           "arch.channels, arch.strides, arch.kernel, arch.timesteps, arch.latent_dim, "
           "arch.excitation_dim, arch.input_hw, arch.classifier_hidden, arch.integrator_decay, "
           "lif.alpha, lif.threshold, lif.reset, lif.surrogate_slope, "
           "train.beta, train.epochs, train.batch_size, train.lr, train.seed, train.lambda_exc, "
           "train.lambda_inh_adv, train.inh_steps_per_batch, train.val_fraction, "
           "binning.window_us, binning.frames_per_sample, binning.crop, binning.target_size, "
           "binning.clip_cap, sampler.stride_us, sampler.pose_gap_tolerance_us, "
           "scene.illumination_level, scene.noise_rate, scene.sensor_width, scene.sensor_height, "
           "scene.focal_px, scene.camera_height_m, scene.beacons, "
           "trajectory.waypoints, trajectory.speed_mps, trajectory.rounds, trajectory.seed, "
           "trajectory.wobble_amplitude_rad, trajectory.wobble_freq_hz, "
           "probe.epochs, probe.batch_size, probe.lr, probe.hidden, probe.seed, retrieval.seq_len";
}

}  // namespace evpr
