#include "evpr/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include "evpr/container.hpp"
#include "evpr/errors.hpp"

namespace evpr {

using nlohmann::json;

namespace {

constexpr int kCheckpointVersion = 1;

json arch_to_json(const ArchConfig& a) {
    return json{{"channels", a.channels},
                {"strides", a.strides},
                {"kernel", a.kernel},
                {"timesteps", a.timesteps},
                {"latent_dim", a.latent_dim},
                {"excitation_dim", a.excitation_dim},
                {"input_hw", a.input_hw},
                {"input_channels", a.input_channels},
                {"num_classes", a.num_classes},
                {"classifier_hidden", a.classifier_hidden},
                {"integrator_decay", a.integrator_decay},
                {"snn_init_gain", a.snn_init_gain}};
}

ArchConfig arch_from_json(const json& j) {
    ArchConfig a;
    a.channels = j.at("channels").get<std::vector<int>>();
    a.strides = j.at("strides").get<std::vector<int>>();
    a.kernel = j.at("kernel").get<int>();
    a.timesteps = j.at("timesteps").get<int>();
    a.latent_dim = j.at("latent_dim").get<int>();
    a.excitation_dim = j.at("excitation_dim").get<int>();
    a.input_hw = j.at("input_hw").get<int>();
    a.input_channels = j.at("input_channels").get<int>();
    a.num_classes = j.at("num_classes").get<int>();
    a.classifier_hidden = j.at("classifier_hidden").get<int>();
    a.integrator_decay = j.at("integrator_decay").get<double>();
    a.snn_init_gain = j.at("snn_init_gain").get<double>();
    return a;
}

json lif_to_json(const LifParams& p) {
    return json{{"alpha", p.alpha},
                {"threshold", p.threshold},
                {"reset", p.reset == ResetMode::subtract ? "subtract" : "zero"},
                {"surrogate_slope", p.surrogate_slope}};
}

LifParams lif_from_json(const json& j) {
    LifParams p;
    p.alpha = j.at("alpha").get<double>();
    p.threshold = j.at("threshold").get<double>();
    const std::string reset = j.at("reset").get<std::string>();
    if (reset == "subtract") {
        p.reset = ResetMode::subtract;
    } else if (reset == "zero") {
        p.reset = ResetMode::zero;
    } else {
        throw ParseError("checkpoint: unknown reset mode '" + reset + "'");
    }
    p.surrogate_slope = j.at("surrogate_slope").get<double>();
    return p;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const GvaeModel& model) {
    Container c;
    c.magic = "GVAE";
    json meta{{"format", kCheckpointVersion},
              {"arch", arch_to_json(model.arch())},
              {"lif", lif_to_json(model.lif_params())}};
    c.meta_json = meta.dump();
    for (const auto& p : model.named_params()) {
        c.entries.push_back({p.name, Dtype::f32, p.tensor->shape, f64_to_f32_bytes(p.tensor->value)});
    }
    write_container(path, c);
}

GvaeModel load_checkpoint(const std::filesystem::path& path) {
    Container c = read_container(path, "GVAE");
    json meta;
    try {
        meta = json::parse(c.meta_json);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": invalid checkpoint meta: " + e.what());
    }
    if (meta.value("format", 0) != kCheckpointVersion) {
        throw ParseError(path.string() + ": unsupported checkpoint format " +
                         std::to_string(meta.value("format", 0)));
    }

    GvaeModel model(arch_from_json(meta.at("arch")), lif_from_json(meta.at("lif")));
    // every architecture-implied tensor must be present with its exact shape
    for (const auto& p : model.named_params()) {
        const ContainerEntry* e = c.find(p.name);
        if (!e) throw ParseError(path.string() + ": missing tensor '" + p.name + "'");
        if (e->dtype != Dtype::f32) {
            throw ParseError(path.string() + ": tensor '" + p.name + "' must be f32");
        }
        if (e->shape != p.tensor->shape) {
            throw ParseError(path.string() + ": tensor '" + p.name + "' has shape " +
                             shape_str(e->shape) + ", architecture implies " +
                             shape_str(p.tensor->shape));
        }
        p.tensor->value = f32_bytes_to_f64(e->bytes);
    }
    return model;
}

}  // namespace evpr
