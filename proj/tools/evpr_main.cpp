// evpr: event-based visual place recognition pipeline.
//
// Subcommands cover the whole loop: synthetic recording generation, event
// binning into sample archives, guided-VAE training, evaluation, sequence
// retrieval localization, and latent export for offline projection.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <nlohmann/json.hpp>

#include "evpr/checkpoint.hpp"
#include "evpr/config.hpp"
#include "evpr/errors.hpp"
#include "evpr/inference.hpp"
#include "evpr/probe.hpp"
#include "evpr/retrieval.hpp"
#include "evpr/synth.hpp"
#include "evpr/trainer.hpp"

namespace fs = std::filesystem;
using namespace evpr;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string profile = "tiny";
    std::optional<uint64_t> seed;
    std::string out_dir = ".";
};

RunConfig resolve_config(const GlobalArgs& ga) {
    RunConfig cfg = profile_defaults(ga.profile);
    if (!ga.config_path.empty()) cfg = load_config_file(ga.config_path, cfg);
    if (ga.seed) {
        cfg.train.seed = *ga.seed;
        cfg.trajectory.seed = *ga.seed;
    }
    cfg.finalize();
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    f << text;
}

std::vector<std::pair<double, double>> sample_coords(const SampleDataset& ds) {
    std::vector<std::pair<double, double>> out;
    out.reserve(ds.samples.size());
    for (const auto& s : ds.samples) out.push_back({s.pose.x_m, s.pose.y_m});
    return out;
}

std::vector<int> sample_cells(const SampleDataset& ds) {
    std::vector<int> out;
    out.reserve(ds.samples.size());
    for (const auto& s : ds.samples) out.push_back(s.cell);
    return out;
}

int cmd_synth(const GlobalArgs& ga, const std::string& format) {
    const RunConfig cfg = resolve_config(ga);
    fs::create_directories(ga.out_dir);

    const auto poses = generate_trajectory(cfg.trajectory, cfg.arena);
    const EventStream stream = render_events(poses, cfg.scene, cfg.trajectory.seed);

    const fs::path pose_path = fs::path(ga.out_dir) / "poses.csv";
    save_poses(pose_path, poses);
    fs::path event_path;
    if (format == "csv") {
        event_path = fs::path(ga.out_dir) / "events.csv";
        save_events(event_path, stream, EventFormat::csv);
    } else {
        event_path = fs::path(ga.out_dir) / "events.evpr";
        save_events(event_path, stream, EventFormat::binary);
    }

    const double duration_s = poses.empty() ? 0.0 : static_cast<double>(poses.back().t_us) * 1e-6;
    std::printf("synth: %zu events over %.1f s -> %s, %s\n", stream.events.size(), duration_s,
                event_path.string().c_str(), pose_path.string().c_str());
    return 0;
}

int cmd_preprocess(const GlobalArgs& ga, const std::string& events_path, const std::string& poses_path,
                   const std::string& format) {
    const RunConfig cfg = resolve_config(ga);
    fs::create_directories(ga.out_dir);

    const EventFormat fmt = format == "csv" ? EventFormat::csv : EventFormat::binary;
    const EventStream stream =
        load_events(events_path, fmt, cfg.scene.sensor_width, cfg.scene.sensor_height);
    const auto poses = load_poses(poses_path);

    const SampleDataset ds = make_samples(stream, poses, cfg.arena, cfg.sampler_config());
    const fs::path out = fs::path(ga.out_dir) / "samples.gvsa";
    save_samples(out, ds);

    if (ds.samples.empty()) {
        std::printf("preprocess: no samples produced (stream shorter than one sample span); wrote %s\n",
                    out.string().c_str());
        return 0;
    }
    std::printf("preprocess: %zu samples -> %s\nper-cell counts:", ds.samples.size(),
                out.string().c_str());
    const auto hist = ds.cell_histogram(cfg.arena.num_cells());
    for (size_t c = 0; c < hist.size(); ++c) std::printf(" %zu:%d", c, hist[c]);
    std::printf("\n");
    return 0;
}

int cmd_train(const GlobalArgs& ga, const std::string& samples_path, bool unguided) {
    RunConfig cfg = resolve_config(ga);
    if (unguided) {
        cfg.train.lambda_exc = 0.0;
        cfg.train.lambda_inh_adv = 0.0;
    }
    fs::create_directories(ga.out_dir);

    const SampleDataset ds = load_samples(samples_path);
    if (ds.samples.empty()) throw ConfigError("train: sample archive is empty");

    Rng init_rng(Rng::splitmix(cfg.train.seed ^ 0x1157));
    GvaeModel model(cfg.arch, cfg.lif);
    model.init_params(init_rng);
    std::printf("train: %zu samples, %lld parameters, %lld neurons%s\n", ds.samples.size(),
                static_cast<long long>(model.param_count()),
                static_cast<long long>(model.neuron_count()), unguided ? " (unguided)" : "");

    const fs::path ckpt = fs::path(ga.out_dir) / "checkpoint.gvae";
    TrainResult result = train(model, ds, cfg.train, ckpt, [](const EpochMetrics& m) {
        std::printf("epoch %3d  recon %8.3f  kl %7.3f  exc %6.3f  inh_cls %6.3f  "
                    "exc_acc %.3f  inh_cls_acc %.3f  %.1fs\n",
                    m.epoch, m.recon, m.kl, m.exc_loss, m.inh_cls_loss, m.exc_acc, m.inh_cls_acc,
                    m.wall_s);
        std::fflush(stdout);
    });

    const fs::path metrics = fs::path(ga.out_dir) / "metrics.csv";
    write_text(metrics, metrics_csv(result.history));
    std::printf("train: best epoch %d (val objective %.4f); wrote %s and %s\n", result.best_epoch,
                result.best_val_objective, ckpt.string().c_str(), metrics.string().c_str());
    return 0;
}

int cmd_eval(const GlobalArgs& ga, const std::string& checkpoint_path,
             const std::string& train_samples_path, const std::string& test_samples_path) {
    const RunConfig cfg = resolve_config(ga);
    fs::create_directories(ga.out_dir);

    const GvaeModel model = load_checkpoint(checkpoint_path);
    const SampleDataset train_ds = load_samples(train_samples_path);
    const SampleDataset test_ds = load_samples(test_samples_path);
    if (train_ds.samples.empty() || test_ds.samples.empty()) {
        throw ConfigError("eval: sample archives must be non-empty");
    }
    const int k = model.arch().excitation_dim;
    const int latent = model.arch().latent_dim;

    const double exc_acc = excitation_accuracy(model, test_ds, cfg.train.batch_size);

    // reconstruction BCE on the test set, from mu
    double recon_bce = 0.0;
    {
        const int n = static_cast<int>(test_ds.samples.size());
        const auto params = model.all_params();
        freeze(params);
        int batches = 0;
        for (int start = 0; start < n; start += cfg.train.batch_size) {
            const int count = std::min(cfg.train.batch_size, n - start);
            std::vector<int> idx(count);
            for (int i = 0; i < count; ++i) idx[i] = start + i;
            Graph g;
            auto enc = model.encode(g, batch_timesteps(test_ds, idx));
            auto recon = model.decode(g, enc.mu);
            auto target = reconstruction_target(test_ds, idx, cfg.train.clip_cap);
            recon_bce += bce_sum_mean(g, recon, target)->item() * count;
            ++batches;
        }
        recon_bce /= n;
    }

    // fresh probe on the frozen inhibition block
    const TensorPtr train_mu = encode_dataset_mu(model, train_ds, cfg.train.batch_size);
    const TensorPtr test_mu = encode_dataset_mu(model, test_ds, cfg.train.batch_size);
    const ProbeResult probe = train_probe(feature_block(train_mu, k, latent), sample_cells(train_ds),
                                          feature_block(test_mu, k, latent), sample_cells(test_ds),
                                          model.arch().num_classes, cfg.probe);

    nlohmann::json out{{"exc_acc", exc_acc},
                       {"inh_probe_acc", probe.eval_accuracy},
                       {"recon_bce", recon_bce},
                       {"param_count", model.param_count()},
                       {"neuron_count", model.neuron_count()}};
    const std::string text = out.dump(2);
    write_text(fs::path(ga.out_dir) / "eval.json", text + "\n");
    std::printf("%s\n", text.c_str());
    return 0;
}

int cmd_localize(const GlobalArgs& ga, const std::string& checkpoint_path,
                 const std::string& ref_samples_path, const std::string& query_samples_path) {
    const RunConfig cfg = resolve_config(ga);
    fs::create_directories(ga.out_dir);

    const GvaeModel model = load_checkpoint(checkpoint_path);
    const SampleDataset ref_ds = load_samples(ref_samples_path);
    const SampleDataset query_ds = load_samples(query_samples_path);
    const int k = model.arch().excitation_dim;

    const TensorPtr ref_mu = encode_dataset_mu(model, ref_ds, cfg.train.batch_size);
    const TensorPtr query_mu = encode_dataset_mu(model, query_ds, cfg.train.batch_size);

    const ReferenceDatabase db =
        build_reference_db(ref_mu, sample_coords(ref_ds), k, cfg.retrieval_seq_len);
    const auto queries = build_sequences(query_mu, sample_coords(query_ds), k, cfg.retrieval_seq_len);
    const LocalizationReport rep = localization_report(queries, db);

    write_text(fs::path(ga.out_dir) / "localization_fractions.csv", rep.thresholds_csv());
    write_text(fs::path(ga.out_dir) / "localization_histogram.csv", rep.histogram_csv());

    std::printf("localize: %zu queries against %zu references\n", queries.size(), db.sequences.size());
    for (const auto& [th, frac] : rep.frac_below) {
        std::printf("  error < %.2f m: %.1f%%\n", th, 100.0 * frac);
    }
    return 0;
}

int cmd_export_latents(const GlobalArgs& ga, const std::string& checkpoint_path,
                       const std::string& samples_path) {
    const RunConfig cfg = resolve_config(ga);
    fs::create_directories(ga.out_dir);

    const GvaeModel model = load_checkpoint(checkpoint_path);
    const SampleDataset ds = load_samples(samples_path);
    const TensorPtr mu = encode_dataset_mu(model, ds, cfg.train.batch_size);
    const int latent = model.arch().latent_dim;

    // excitation columns come first by construction of the latent layout
    std::string csv = "sample_idx,cell,x_m,y_m";
    for (int d = 0; d < latent; ++d) csv += ",mu_" + std::to_string(d);
    csv += "\n";
    char buf[64];
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        std::snprintf(buf, sizeof(buf), "%zu,%d,%.6f,%.6f", i, s.cell, s.pose.x_m, s.pose.y_m);
        csv += buf;
        for (int d = 0; d < latent; ++d) {
            std::snprintf(buf, sizeof(buf), ",%.9g", mu->value[i * latent + d]);
            csv += buf;
        }
        csv += "\n";
    }
    const fs::path out = fs::path(ga.out_dir) / "latents.csv";
    write_text(out, csv);
    std::printf("export-latents: %zu rows, %d columns -> %s\n", ds.samples.size(), 4 + latent,
                out.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"evpr: event-based visual place recognition with a hybrid guided VAE"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags remain valid after the subcommand name

    GlobalArgs ga;
    app.add_option("--config", ga.config_path, "JSON config file (// comments allowed)")
        ->check(CLI::ExistingFile);
    app.add_option("--profile", ga.profile, "configuration profile: paper or tiny")
        ->check(CLI::IsMember({"paper", "tiny"}))
        ->capture_default_str();
    app.add_option("--seed", ga.seed, "override train and trajectory seeds");
    app.add_option("--out", ga.out_dir, "output directory")->capture_default_str();
    app.set_help_all_flag("--help-all", "expanded help for every subcommand");
    app.footer("Config file keys (all optional, defaults from --profile):\n  " + config_keys_help());

    std::string format = "binary";
    auto* synth = app.add_subcommand("synth", "generate a synthetic arena recording");
    synth->add_option("--format", format, "event file format: binary or csv")
        ->check(CLI::IsMember({"binary", "csv"}))
        ->capture_default_str();

    std::string events_path, poses_path;
    auto* pre = app.add_subcommand("preprocess", "bin an event recording into a sample archive");
    pre->add_option("--events", events_path, "event file")->required()->check(CLI::ExistingFile);
    pre->add_option("--poses", poses_path, "pose log CSV")->required()->check(CLI::ExistingFile);
    pre->add_option("--format", format, "event file format: binary or csv")
        ->check(CLI::IsMember({"binary", "csv"}));

    std::string samples_path;
    bool unguided = false;
    auto* tr = app.add_subcommand("train", "train the guided VAE on a sample archive");
    tr->add_option("--samples", samples_path, "training sample archive")
        ->required()
        ->check(CLI::ExistingFile);
    tr->add_flag("--unguided", unguided, "drop both guidance losses (plain beta-VAE)");

    std::string checkpoint_path, train_samples_path, test_samples_path;
    auto* ev = app.add_subcommand("eval", "classification metrics for a trained checkpoint");
    ev->add_option("--checkpoint", checkpoint_path, "model checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    ev->add_option("--train-samples", train_samples_path, "archive the probe trains on")
        ->required()
        ->check(CLI::ExistingFile);
    ev->add_option("--test-samples", test_samples_path, "archive metrics are reported on")
        ->required()
        ->check(CLI::ExistingFile);

    std::string ref_samples_path, query_samples_path;
    auto* loc = app.add_subcommand("localize", "sequence-retrieval localization report");
    loc->add_option("--checkpoint", checkpoint_path, "model checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    loc->add_option("--ref-samples", ref_samples_path, "reference archive (exploration run)")
        ->required()
        ->check(CLI::ExistingFile);
    loc->add_option("--query-samples", query_samples_path, "query archive")
        ->required()
        ->check(CLI::ExistingFile);

    auto* ex = app.add_subcommand("export-latents", "per-sample latent means as CSV");
    ex->add_option("--checkpoint", checkpoint_path, "model checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    ex->add_option("--samples", samples_path, "sample archive")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(ga, format);
        if (pre->parsed()) return cmd_preprocess(ga, events_path, poses_path, format);
        if (tr->parsed()) return cmd_train(ga, samples_path, unguided);
        if (ev->parsed()) return cmd_eval(ga, checkpoint_path, train_samples_path, test_samples_path);
        if (loc->parsed()) return cmd_localize(ga, checkpoint_path, ref_samples_path, query_samples_path);
        if (ex->parsed()) return cmd_export_latents(ga, checkpoint_path, samples_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
