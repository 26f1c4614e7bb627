#include "evpr/samples.hpp"

#include <string>

#include "evpr/container.hpp"
#include "evpr/errors.hpp"

namespace evpr {

std::vector<int> SampleDataset::cell_histogram(int num_cells) const {
    std::vector<int> hist(num_cells, 0);
    for (const auto& s : samples) {
        if (s.cell >= 0 && s.cell < num_cells) ++hist[s.cell];
    }
    return hist;
}

SampleDataset make_samples(const EventStream& stream, const std::vector<TimedPose>& poses,
                           const ArenaConfig& arena, const SamplerConfig& cfg) {
    if (poses.empty()) throw ConfigError("make_samples: empty pose log");
    if (cfg.stride_us == 0) throw ConfigError("make_samples: stride_us must be positive");
    for (size_t i = 1; i < poses.size(); ++i) {
        const uint64_t gap = poses[i].t_us - poses[i - 1].t_us;
        if (gap > cfg.pose_gap_tolerance_us) {
            throw ConfigError("make_samples: pose log gap of " + std::to_string(gap) +
                              " us at entry " + std::to_string(i) + " exceeds tolerance " +
                              std::to_string(cfg.pose_gap_tolerance_us));
        }
    }

    SampleDataset ds;
    ds.frames_per_sample = cfg.binning.frames_per_sample;
    ds.height = cfg.binning.target_size;
    ds.width = cfg.binning.target_size;
    if (stream.empty()) return ds;

    const uint64_t span = static_cast<uint64_t>(cfg.binning.frames_per_sample) * cfg.binning.window_us;
    const uint64_t t0 = std::max(stream.t_begin(), poses.front().t_us);
    const uint64_t t_last = std::min(stream.t_end(), poses.back().t_us);
    if (t_last < t0 || t_last - t0 < span) return ds;

    for (uint64_t t_start = t0; t_start + span <= t_last; t_start += cfg.stride_us) {
        EventSample s;
        s.frames = bin_events(stream, t_start, cfg.binning);
        s.t_mid_us = t_start + span / 2;
        s.pose = interpolate_pose(poses, s.t_mid_us);
        s.cell = label_cell(s.pose, arena);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

void save_samples(const std::filesystem::path& path, const SampleDataset& ds) {
    const int n = static_cast<int>(ds.samples.size());
    Container c;
    c.magic = "GVSA";
    c.meta_json = std::string("{\"channels\":") + std::to_string(ds.channels) +
                  ",\"count\":" + std::to_string(n) +
                  ",\"frames_per_sample\":" + std::to_string(ds.frames_per_sample) +
                  ",\"height\":" + std::to_string(ds.height) +
                  ",\"kind\":\"samples\",\"width\":" + std::to_string(ds.width) + "}";

    std::vector<uint8_t> frames;
    std::vector<uint64_t> t_mid(n);
    std::vector<double> pose(static_cast<size_t>(n) * 3);
    std::vector<int32_t> cell(n);
    frames.reserve(static_cast<size_t>(n) * ds.frame_elems());
    for (int i = 0; i < n; ++i) {
        const EventSample& s = ds.samples[i];
        if (s.frames.size() != ds.frame_elems()) {
            throw ConfigError("save_samples: sample " + std::to_string(i) + " has " +
                              std::to_string(s.frames.size()) + " frame elements, dataset implies " +
                              std::to_string(ds.frame_elems()));
        }
        frames.insert(frames.end(), s.frames.begin(), s.frames.end());
        t_mid[i] = s.t_mid_us;
        pose[static_cast<size_t>(i) * 3 + 0] = s.pose.x_m;
        pose[static_cast<size_t>(i) * 3 + 1] = s.pose.y_m;
        pose[static_cast<size_t>(i) * 3 + 2] = s.pose.yaw_rad;
        cell[i] = s.cell;
    }

    if (n > 0) {
        c.entries.push_back({"frames", Dtype::u8,
                             {n, ds.frames_per_sample, ds.channels, ds.height, ds.width},
                             std::move(frames)});
        c.entries.push_back({"t_mid_us", Dtype::u64, {n}, pod_bytes(t_mid)});
        c.entries.push_back({"pose", Dtype::f64, {n, 3}, pod_bytes(pose)});
        c.entries.push_back({"cell", Dtype::i32, {n}, pod_bytes(cell)});
    }
    write_container(path, c);
}

SampleDataset load_samples(const std::filesystem::path& path) {
    Container c = read_container(path, "GVSA");

    SampleDataset ds;
    const auto* frames = c.find("frames");
    if (!frames) {
        // archive of zero samples still carries its geometry in the meta
        // block; shape fields stay zero, the dataset is empty either way
        return ds;
    }
    if (frames->dtype != Dtype::u8 || frames->shape.size() != 5) {
        throw ParseError(path.string() + ": 'frames' must be u8 with shape [n,T,C,H,W]");
    }
    const int n = frames->shape[0];
    ds.frames_per_sample = frames->shape[1];
    ds.channels = frames->shape[2];
    ds.height = frames->shape[3];
    ds.width = frames->shape[4];

    const auto* t_mid = c.find("t_mid_us");
    const auto* pose = c.find("pose");
    const auto* cell = c.find("cell");
    if (!t_mid || !pose || !cell) throw ParseError(path.string() + ": missing sample metadata tensors");
    const auto t_mid_v = bytes_to_pod<uint64_t>(t_mid->bytes);
    const auto pose_v = bytes_to_pod<double>(pose->bytes);
    const auto cell_v = bytes_to_pod<int32_t>(cell->bytes);
    if (static_cast<int>(t_mid_v.size()) != n || static_cast<int>(cell_v.size()) != n ||
        pose_v.size() != static_cast<size_t>(n) * 3) {
        throw ParseError(path.string() + ": sample metadata sizes disagree with frame count");
    }

    const size_t elems = ds.frame_elems();
    ds.samples.resize(n);
    for (int i = 0; i < n; ++i) {
        EventSample& s = ds.samples[i];
        s.frames.assign(frames->bytes.begin() + static_cast<ptrdiff_t>(elems * i),
                        frames->bytes.begin() + static_cast<ptrdiff_t>(elems * (i + 1)));
        s.t_mid_us = t_mid_v[i];
        s.pose = {pose_v[static_cast<size_t>(i) * 3], pose_v[static_cast<size_t>(i) * 3 + 1],
                  pose_v[static_cast<size_t>(i) * 3 + 2]};
        s.cell = cell_v[i];
    }
    return ds;
}

std::vector<TensorPtr> batch_timesteps(const SampleDataset& ds, const std::vector<int>& indices) {
    const int n = static_cast<int>(indices.size());
    const int T = ds.frames_per_sample;
    const int C = ds.channels;
    const size_t plane = static_cast<size_t>(ds.height) * ds.width;
    const size_t per_step = static_cast<size_t>(C) * plane;

    std::vector<TensorPtr> steps;
    steps.reserve(T);
    for (int t = 0; t < T; ++t) {
        auto x = Tensor::zeros({n, C, ds.height, ds.width});
        for (int b = 0; b < n; ++b) {
            const EventSample& s = ds.samples.at(indices[b]);
            const uint8_t* src = s.frames.data() + per_step * t;
            double* dst = x->value.data() + per_step * b;
            for (size_t i = 0; i < per_step; ++i) dst[i] = static_cast<double>(src[i]);
        }
        steps.push_back(std::move(x));
    }
    return steps;
}

}  // namespace evpr
