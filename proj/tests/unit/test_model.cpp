#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "evpr/checkpoint.hpp"
#include "evpr/errors.hpp"
#include "evpr/model.hpp"

using namespace evpr;

namespace {

ArchConfig micro_arch() {
    ArchConfig a;
    a.channels = {4, 8};
    a.strides = {2, 2};
    a.kernel = 3;
    a.timesteps = 3;
    a.latent_dim = 8;
    a.excitation_dim = 3;
    a.input_hw = 16;
    a.num_classes = 4;
    a.classifier_hidden = 8;
    return a;
}

std::vector<TensorPtr> random_frames(const ArchConfig& a, int n, Rng& rng) {
    std::vector<TensorPtr> frames;
    for (int t = 0; t < a.timesteps; ++t) {
        auto f = Tensor::zeros({n, a.input_channels, a.input_hw, a.input_hw});
        for (double& v : f->value) v = rng.uniform() < 0.1 ? 1.0 : 0.0;
        frames.push_back(f);
    }
    return frames;
}

}  // namespace

TEST_CASE("encode of an all-zero input reads out the head biases") {
    Rng rng(1);
    GvaeModel m(micro_arch(), LifParams{});
    m.init_params(rng);
    m.param("enc.mu.b")->value[3] = 0.25;
    m.param("enc.logvar.b")->value[1] = -0.5;

    Graph g;
    std::vector<TensorPtr> frames(micro_arch().timesteps,
                                  Tensor::zeros({2, 2, 16, 16}));
    auto enc = m.encode(g, frames);
    CHECK(enc.mu->shape == Shape{2, 8});
    CHECK(enc.logvar->shape == Shape{2, 8});
    for (int b = 0; b < 2; ++b) {
        CHECK(enc.mu->value[b * 8 + 3] == doctest::Approx(0.25));
        CHECK(enc.mu->value[b * 8 + 0] == doctest::Approx(0.0));
        CHECK(enc.logvar->value[b * 8 + 1] == doctest::Approx(-0.5));
    }
}

TEST_CASE("encode is batch-equivariant under sample permutation") {
    Rng rng(2);
    GvaeModel m(micro_arch(), LifParams{});
    m.init_params(rng);
    auto frames = random_frames(micro_arch(), 3, rng);

    Graph g;
    auto enc = m.encode(g, frames);

    // swap samples 0 and 2 in every timestep
    std::vector<TensorPtr> swapped;
    const size_t per = 2u * 16u * 16u;
    for (const auto& f : frames) {
        auto s = Tensor::zeros(f->shape);
        s->value = f->value;
        for (size_t i = 0; i < per; ++i) std::swap(s->value[i], s->value[2 * per + i]);
        swapped.push_back(s);
    }
    Graph g2;
    auto enc2 = m.encode(g2, swapped);
    for (int d = 0; d < 8; ++d) {
        CHECK(enc2.mu->value[0 * 8 + d] == doctest::Approx(enc.mu->value[2 * 8 + d]));
        CHECK(enc2.mu->value[2 * 8 + d] == doctest::Approx(enc.mu->value[0 * 8 + d]));
        CHECK(enc2.mu->value[1 * 8 + d] == doctest::Approx(enc.mu->value[1 * 8 + d]));
    }
}

TEST_CASE("encode validates the input shape") {
    Rng rng(3);
    GvaeModel m(micro_arch(), LifParams{});
    m.init_params(rng);
    Graph g;
    std::vector<TensorPtr> frames(3, Tensor::zeros({1, 2, 8, 8}));
    CHECK_THROWS_AS(m.encode(g, frames), ShapeError);
    std::vector<TensorPtr> two(2, Tensor::zeros({1, 2, 16, 16}));
    CHECK_THROWS_AS(m.encode(g, two), ShapeError);
}

TEST_CASE("reparameterize follows z = mu + exp(logvar/2)*eps") {
    GvaeModel m(micro_arch(), LifParams{});
    Graph g;
    auto mu = Tensor::full({1, 8}, 2.0);
    auto logvar = Tensor::full({1, 8}, std::log(4.0));
    auto eps_zero = Tensor::zeros({1, 8});
    CHECK(m.reparameterize(g, mu, logvar, eps_zero)->value[0] == doctest::Approx(2.0));

    auto eps_half = Tensor::full({1, 8}, 0.5);
    CHECK(m.reparameterize(g, mu, logvar, eps_half)->value[0] == doctest::Approx(3.0));

    auto mu0 = Tensor::zeros({1, 8});
    auto lv0 = Tensor::zeros({1, 8});
    auto eps1 = Tensor::full({1, 8}, 1.0);
    CHECK(m.reparameterize(g, mu0, lv0, eps1)->value[0] == doctest::Approx(1.0));
}

TEST_CASE("decode produces sigmoid-bounded deterministic frames") {
    Rng rng(4);
    GvaeModel m(micro_arch(), LifParams{});
    m.init_params(rng);
    Graph g;
    auto z = Tensor::randn({2, 8}, rng);
    auto out = m.decode(g, z);
    CHECK(out->shape == Shape{2, 2, 16, 16});
    for (double v : out->value) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    Graph g2;
    auto out2 = m.decode(g2, z);
    CHECK(out->value == out2->value);
}

TEST_CASE("decoder gradient w.r.t. z is alive at a fresh init") {
    Rng rng(5);
    GvaeModel m(micro_arch(), LifParams{});
    m.init_params(rng);
    Graph g;
    auto z = Tensor::randn({1, 8}, rng);
    z->requires_grad = true;
    auto out = m.decode(g, z);
    g.backward(sum(g, out));
    REQUIRE(!z->grad.empty());
    double norm = 0.0;
    for (double v : z->grad) norm += v * v;
    CHECK(norm > 0.0);
}

TEST_CASE("classifier heads: shapes, zero-input bias, batch rows") {
    Rng rng(6);
    ArchConfig a = micro_arch();
    GvaeModel m(a, LifParams{});
    m.init_params(rng);
    m.param("cls.exc.fc2.b")->value = {0.1, 0.2, 0.3, 0.4};

    Graph g;
    auto logits = m.classify_excitation(g, Tensor::zeros({3, a.excitation_dim}));
    CHECK(logits->shape == Shape{3, a.num_classes});
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) {
            CHECK(logits->value[r * 4 + c] == doctest::Approx(0.1 * (c + 1)));
        }
    }
    auto inh = m.classify_inhibition(g, Tensor::zeros({5, a.latent_dim - a.excitation_dim}));
    CHECK(inh->shape == Shape{5, a.num_classes});
    CHECK_THROWS_AS(m.classify_excitation(g, Tensor::zeros({3, a.excitation_dim + 1})), ShapeError);
}

TEST_CASE("latent partition is positional, disjoint and covering") {
    ArchConfig a = micro_arch();
    GvaeModel m(a, LifParams{});
    Graph g;
    auto z = Tensor::zeros({1, a.latent_dim});
    for (int i = 0; i < a.latent_dim; ++i) z->value[i] = i;
    auto exc = m.excitation_slice(g, z);
    auto inh = m.inhibition_slice(g, z);
    CHECK(exc->shape == Shape{1, a.excitation_dim});
    CHECK(inh->shape == Shape{1, a.latent_dim - a.excitation_dim});
    for (int i = 0; i < a.excitation_dim; ++i) CHECK(exc->value[i] == i);
    for (int i = 0; i < a.latent_dim - a.excitation_dim; ++i) {
        CHECK(inh->value[i] == a.excitation_dim + i);
    }
}

TEST_CASE("param_count of a single 2->3 linear is 9") {
    // shape arithmetic sanity anchor
    auto w = Tensor::zeros({3, 2});
    auto b = Tensor::zeros({3});
    CHECK(w->numel() + b->numel() == 9);
}

TEST_CASE("param_count lands in the expected ranges") {
    GvaeModel paper(ArchConfig{}, LifParams{});  // defaults: 128x128, T=50
    const int64_t n = paper.param_count();
    MESSAGE("default architecture parameter count: ", n, ", neurons: ", paper.neuron_count());
    CHECK(n >= 2000000);
    CHECK(n <= 6000000);

    ArchConfig tiny;
    tiny.channels = {16, 32, 64};
    tiny.strides = {2, 2, 2};
    tiny.timesteps = 10;
    tiny.excitation_dim = 4;
    tiny.input_hw = 32;
    tiny.num_classes = 4;
    GvaeModel t(tiny, LifParams{});
    MESSAGE("tiny architecture parameter count: ", t.param_count(), ", neurons: ", t.neuron_count());
    CHECK(t.param_count() < 1000000);
    CHECK(t.neuron_count() > 0);
}

TEST_CASE("full forward pass with frozen eps is deterministic") {
    Rng rng(7);
    GvaeModel m(micro_arch(), LifParams{});
    m.init_params(rng);
    auto frames = random_frames(micro_arch(), 2, rng);
    auto eps = Tensor::randn({2, 8}, rng);

    auto run = [&] {
        Graph g;
        auto enc = m.encode(g, frames);
        auto z = m.reparameterize(g, enc.mu, enc.logvar, eps);
        return m.decode(g, z)->value;
    };
    CHECK(run() == run());
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "evpr_model_test";
    fs::create_directories(dir);
    const auto path = dir / "model.gvae";
    const auto path2 = dir / "model2.gvae";

    Rng rng(8);
    GvaeModel m(micro_arch(), LifParams{});
    m.init_params(rng);
    save_checkpoint(path, m);

    GvaeModel loaded = load_checkpoint(path);
    CHECK(loaded.arch().latent_dim == 8);
    CHECK(loaded.param_count() == m.param_count());
    save_checkpoint(path2, loaded);

    std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
    const std::string ba((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    const std::string bb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    REQUIRE(!ba.empty());
    CHECK(ba == bb);
}

TEST_CASE("checkpoint loading validates magic and tensor shapes") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "evpr_model_test";
    fs::create_directories(dir);
    const auto bad = dir / "bad.gvae";
    std::ofstream f(bad, std::ios::binary);
    f << "NOPE" << std::string(8, '\0');
    f.close();
    CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
}

TEST_CASE("arch validation catches bad configurations") {
    ArchConfig a = micro_arch();
    a.excitation_dim = a.latent_dim;
    CHECK_THROWS_AS(GvaeModel(a, LifParams{}), ConfigError);

    ArchConfig b = micro_arch();
    b.strides = {2};
    CHECK_THROWS_AS(GvaeModel(b, LifParams{}), ConfigError);

    ArchConfig c = micro_arch();
    c.channels = {4, 8, 8, 8};
    c.strides = {2, 2, 2, 2};  // 16 -> 1: collapses below 4
    CHECK_THROWS_AS(GvaeModel(c, LifParams{}), ConfigError);
}
