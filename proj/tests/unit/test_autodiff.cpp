#include <doctest.h>

#include <cmath>

#include "evpr/adam.hpp"
#include "evpr/errors.hpp"
#include "evpr/gradcheck.hpp"
#include "evpr/graph.hpp"
#include "evpr/ops.hpp"
#include "evpr/rng.hpp"

using namespace evpr;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

TEST_CASE("conv2d 1x1 identity kernel reproduces the input") {
    Graph g;
    auto x = Tensor::from({1, 1, 2, 2}, {1.0, 2.0, 3.0, 4.0});
    auto w = Tensor::from({1, 1, 1, 1}, {1.0});
    auto b = Tensor::zeros({1});
    auto y = conv2d(g, x, w, b, 1, 0);
    CHECK(y->shape == Shape{1, 1, 2, 2});
    for (int i = 0; i < 4; ++i) CHECK(y->value[i] == doctest::Approx(x->value[i]));
}

TEST_CASE("conv2d valid diagonal kernel sums matching corners") {
    Graph g;
    auto x = Tensor::from({1, 1, 2, 2}, {1.0, 2.0, 3.0, 4.0});
    auto w = Tensor::from({1, 1, 2, 2}, {1.0, 0.0, 0.0, 1.0});
    auto b = Tensor::zeros({1});
    auto y = conv2d(g, x, w, b, 1, 0);
    CHECK(y->shape == Shape{1, 1, 1, 1});
    CHECK(y->value[0] == doctest::Approx(5.0));
}

TEST_CASE("conv2d of zero input is zero") {
    Graph g;
    Rng rng(3);
    auto x = Tensor::zeros({2, 3, 5, 5});
    auto w = Tensor::randn({4, 3, 3, 3}, rng);
    auto b = Tensor::zeros({4});
    auto y = conv2d(g, x, w, b, 2, 1);
    for (double v : y->value) CHECK(v == 0.0);
}

TEST_CASE("conv2d reports the offending dimension on mismatch") {
    Graph g;
    auto x = Tensor::zeros({1, 3, 4, 4});
    auto w = Tensor::zeros({2, 2, 3, 3});
    auto b = Tensor::zeros({2});
    CHECK_THROWS_WITH_AS(conv2d(g, x, w, b, 1, 1),
                         doctest::Contains("input channels (3)"), ShapeError);
    auto wb = Tensor::zeros({2, 3, 3, 3});
    auto bad_bias = Tensor::zeros({3});
    CHECK_THROWS_AS(conv2d(g, x, wb, bad_bias, 1, 1), ShapeError);
    auto huge = Tensor::zeros({2, 3, 9, 9});
    CHECK_THROWS_AS(conv2d(g, x, huge, b, 1, 1), ShapeError);
}

TEST_CASE("conv_transpose2d with a stride-1 unit kernel is the identity") {
    Graph g;
    auto y = Tensor::from({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    auto w = Tensor::from({1, 1, 1, 1}, {1.0});
    auto b = Tensor::zeros({1});
    auto out = conv_transpose2d(g, y, w, b, 1, 0);
    CHECK(out->shape == y->shape);
    for (size_t i = 0; i < 9; ++i) CHECK(out->value[i] == doctest::Approx(y->value[i]));
}

TEST_CASE("conv_transpose2d of zero input is zero") {
    Graph g;
    Rng rng(5);
    auto y = Tensor::zeros({1, 4, 3, 3});
    auto w = Tensor::randn({4, 2, 3, 3}, rng);
    auto b = Tensor::zeros({2});
    auto out = conv_transpose2d(g, y, w, b, 2, 1, 1);
    for (double v : out->value) CHECK(v == 0.0);
}

TEST_CASE("adjoint identity <conv2d(x),y> == <x, conv_transpose2d(y)> over random draws") {
    Rng rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_index(2));
        const int cin = 1 + static_cast<int>(rng.uniform_index(3));
        const int cout = 1 + static_cast<int>(rng.uniform_index(3));
        const int k = 1 + 2 * static_cast<int>(rng.uniform_index(2));  // 1 or 3
        const int h = k + static_cast<int>(rng.uniform_index(6));
        const int wdim = k + static_cast<int>(rng.uniform_index(6));
        const int stride = 1 + static_cast<int>(rng.uniform_index(2));
        const int pad = static_cast<int>(rng.uniform_index(k == 1 ? 1 : 2));

        Graph g;
        auto x = Tensor::randn({n, cin, h, wdim}, rng);
        auto w = Tensor::randn({cout, cin, k, k}, rng);
        auto zb_out = Tensor::zeros({cout});
        auto zb_in = Tensor::zeros({cin});
        auto cx = conv2d(g, x, w, zb_out, stride, pad);
        auto y = Tensor::randn(cx->shape, rng);

        // conv_transpose back to x's size; output_padding recovers the lost
        // remainder when stride does not divide evenly
        const int op_h = h - ((cx->shape[2] - 1) * stride - 2 * pad + k);
        const int op_w = wdim - ((cx->shape[3] - 1) * stride - 2 * pad + k);
        if (op_h != op_w || op_h < 0 || op_h >= stride) continue;  // not invertible, skip draw
        auto ty = conv_transpose2d(g, y, w, zb_in, stride, pad, op_h);
        REQUIRE(ty->shape == x->shape);
        CHECK(std::abs(dot(cx->value, y->value) - dot(x->value, ty->value)) < 1e-10);
    }
}

TEST_CASE("linear with identity weight and zero bias reproduces the input") {
    Graph g;
    auto x = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
    auto w = Tensor::from({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    auto b = Tensor::zeros({3});
    auto y = linear(g, x, w, b);
    for (size_t i = 0; i < 6; ++i) CHECK(y->value[i] == doctest::Approx(x->value[i]));
}

TEST_CASE("linear hand example [1,2]x[[3,4]]^T + [5] = [16]") {
    Graph g;
    auto x = Tensor::from({1, 2}, {1.0, 2.0});
    auto w = Tensor::from({1, 2}, {3.0, 4.0});
    auto b = Tensor::from({1}, {5.0});
    auto y = linear(g, x, w, b);
    CHECK(y->value[0] == doctest::Approx(16.0));
}

TEST_CASE("linear with zero weight yields the bias in every row") {
    Graph g;
    auto x = Tensor::from({3, 2}, {1, 2, 3, 4, 5, 6});
    auto w = Tensor::zeros({4, 2});
    auto b = Tensor::from({4}, {1.0, -2.0, 0.5, 7.0});
    auto y = linear(g, x, w, b);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) CHECK(y->value[r * 4 + c] == doctest::Approx(b->value[c]));
    }
    CHECK_THROWS_AS(linear(g, x, Tensor::zeros({4, 3}), b), ShapeError);
}

TEST_CASE("relu forward and gradient") {
    Graph g;
    auto x = Tensor::from({3}, {-1.0, 0.0, 2.0}, true);
    auto y = relu(g, x);
    CHECK(y->value == std::vector<double>{0.0, 0.0, 2.0});

    auto xp = Tensor::from({2}, {0.5, 3.0}, true);
    Graph g2;
    auto yp = relu(g2, xp);
    CHECK(yp->value == xp->value);

    // gradient is 0 at -0.5 and 1 at 0.5
    Graph g3;
    auto xg = Tensor::from({2}, {-0.5, 0.5}, true);
    auto s = sum(g3, relu(g3, xg));
    g3.backward(s);
    CHECK(xg->grad[0] == 0.0);
    CHECK(xg->grad[1] == 1.0);
}

TEST_CASE("backward of sum(x) is all ones") {
    Graph g;
    auto x = Tensor::from({4}, {1, 2, 3, 4}, true);
    auto s = sum(g, x);
    g.backward(s);
    for (double v : x->grad) CHECK(v == 1.0);
}

TEST_CASE("backward of sum(x^2) at [1,2] is [2,4]") {
    Graph g;
    auto x = Tensor::from({2}, {1.0, 2.0}, true);
    auto s = sum(g, mul(g, x, x));
    g.backward(s);
    CHECK(x->grad[0] == doctest::Approx(2.0));
    CHECK(x->grad[1] == doctest::Approx(4.0));
}

TEST_CASE("disconnected tensors keep no gradient") {
    Graph g;
    auto x = Tensor::from({2}, {1.0, 2.0}, true);
    auto lonely = Tensor::from({2}, {5.0, 6.0}, true);
    auto s = sum(g, x);
    g.backward(s);
    CHECK(lonely->grad.empty());
}

TEST_CASE("backward requires a scalar loss") {
    Graph g;
    auto x = Tensor::from({2}, {1.0, 2.0}, true);
    auto y = mul(g, x, x);
    CHECK_THROWS_AS(g.backward(y), ShapeError);
}

TEST_CASE("backward twice accumulates; zeroing in between restores determinism") {
    auto run_once = [](std::vector<double>& out) {
        Graph g;
        auto x = Tensor::from({2}, {3.0, -1.5}, true);
        auto s = sum(g, mul(g, x, x));
        g.backward(s);
        out = x->grad;
    };
    std::vector<double> g1, g2;
    run_once(g1);
    run_once(g2);
    CHECK(g1 == g2);

    Graph g;
    auto x = Tensor::from({2}, {3.0, -1.5}, true);
    auto s = sum(g, mul(g, x, x));
    g.backward(s);
    const std::vector<double> once = x->grad;
    g.backward(s);  // accumulates a second full contribution
    for (size_t i = 0; i < once.size(); ++i) {
        CHECK(x->grad[i] == doctest::Approx(2.0 * once[i]).epsilon(1e-12));
    }
}

TEST_CASE("adam leaves parameters unchanged under zero gradient") {
    auto p = Tensor::from({3}, {1.0, -2.0, 0.5}, true);
    const std::vector<double> before = p->value;
    Adam opt({1e-2});
    opt.step({p});  // no grad allocated at all
    p->ensure_grad();
    opt.step({p});  // explicit zero grad
    CHECK(p->value == before);
}

TEST_CASE("adam first step moves by -lr*sign(g) up to eps") {
    auto p = Tensor::from({2}, {0.0, 0.0}, true);
    p->grad = {0.3, -2.0};
    Adam opt({1e-3});
    opt.step({p});
    CHECK(p->value[0] == doctest::Approx(-1e-3).epsilon(1e-6));
    CHECK(p->value[1] == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("adam is deterministic from identical state") {
    auto run = [] {
        auto p = Tensor::from({2}, {1.0, 2.0}, true);
        Adam opt({3e-4});
        for (int i = 0; i < 5; ++i) {
            p->grad = {0.1 * (i + 1), -0.2};
            opt.step({p});
        }
        return p->value;
    };
    CHECK(run() == run());
}

TEST_CASE("grad_check: linear layer within 1e-6") {
    Rng rng(7);
    auto x = Tensor::randn({3, 4}, rng);
    auto w = Tensor::randn({5, 4}, rng);
    auto b = Tensor::randn({5}, rng);
    const double err = grad_check(
        [](Graph& g, const std::vector<TensorPtr>& in) { return linear(g, in[0], in[1], in[2]); },
        {x, w, b});
    CHECK(err < 1e-6);
}

TEST_CASE("grad_check: conv2d 1x2x5x5 with 3x3 kernel within 1e-6") {
    Rng rng(8);
    auto x = Tensor::randn({1, 2, 5, 5}, rng);
    auto w = Tensor::randn({3, 2, 3, 3}, rng);
    auto b = Tensor::randn({3}, rng);
    const double err = grad_check(
        [](Graph& g, const std::vector<TensorPtr>& in) { return conv2d(g, in[0], in[1], in[2], 1, 0); },
        {x, w, b});
    CHECK(err < 1e-6);
}

TEST_CASE("grad_check: strided padded conv2d and conv_transpose2d") {
    Rng rng(9);
    auto x = Tensor::randn({2, 2, 6, 6}, rng);
    auto w = Tensor::randn({3, 2, 3, 3}, rng);
    auto b = Tensor::randn({3}, rng);
    CHECK(grad_check([](Graph& g, const std::vector<TensorPtr>& in) {
              return conv2d(g, in[0], in[1], in[2], 2, 1);
          },
                     {x, w, b}) < 1e-6);

    auto y = Tensor::randn({2, 3, 3, 3}, rng);
    auto bt = Tensor::randn({2}, rng);
    CHECK(grad_check([](Graph& g, const std::vector<TensorPtr>& in) {
              return conv_transpose2d(g, in[0], in[1], in[2], 2, 1, 1);
          },
                     {y, w, bt}) < 1e-6);
}

TEST_CASE("grad_check: relu away from the kink within 1e-6") {
    Rng rng(10);
    auto x = Tensor::zeros({4, 4});
    for (double& v : x->value) {
        v = rng.uniform(0.5, 2.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    }
    const double err = grad_check(
        [](Graph& g, const std::vector<TensorPtr>& in) { return relu(g, in[0]); }, {x});
    CHECK(err < 1e-6);
}

TEST_CASE("grad_check: every elementwise primitive at randomized shapes") {
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_index(4));
        const int m = 1 + static_cast<int>(rng.uniform_index(4));
        auto a = Tensor::randn({n, m}, rng);
        auto b = Tensor::randn({n, m}, rng);
        // keep relu/spike inputs away from kinks
        for (double& v : a->value) {
            if (std::abs(v) < 0.2) v += v >= 0 ? 0.3 : -0.3;
        }

        CHECK(grad_check([](Graph& g, const std::vector<TensorPtr>& in) {
                  return add(g, in[0], in[1]);
              },
                         {a, b}) <= 1e-4);
        CHECK(grad_check([](Graph& g, const std::vector<TensorPtr>& in) {
                  return sub(g, in[0], in[1]);
              },
                         {a, b}) <= 1e-4);
        CHECK(grad_check([](Graph& g, const std::vector<TensorPtr>& in) {
                  return mul(g, in[0], in[1]);
              },
                         {a, b}) <= 1e-4);
        CHECK(grad_check([](Graph& g, const std::vector<TensorPtr>& in) {
                  return scale(g, in[0], -1.7);
              },
                         {a}) <= 1e-4);
        CHECK(grad_check([](Graph& g, const std::vector<TensorPtr>& in) {
                  return exp(g, scale(g, in[0], 0.5));
              },
                         {a}) <= 1e-4);
        CHECK(grad_check([](Graph& g, const std::vector<TensorPtr>& in) {
                  return sigmoid(g, in[0]);
              },
                         {a}) <= 1e-4);
        CHECK(grad_check([](Graph& g, const std::vector<TensorPtr>& in) {
                  return slice_cols(g, in[0], 0, in[0]->shape[1]);
              },
                         {a}) <= 1e-4);
        CHECK(grad_check([n, m](Graph& g, const std::vector<TensorPtr>& in) {
                  return reshape(g, in[0], {m, n});
              },
                         {a}) <= 1e-4);
    }
}

TEST_CASE("no forward or backward pass produces non-finite values on bounded inputs") {
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        auto x = Tensor::zeros({2, 3, 8, 8});
        for (double& v : x->value) v = rng.uniform(-1e3, 1e3);
        auto w = Tensor::zeros({4, 3, 3, 3}, true);
        for (double& v : w->value) v = rng.uniform(-1e3, 1e3);
        auto b = Tensor::zeros({4}, true);

        Graph g;
        auto y = conv2d(g, x, w, b, 2, 1);
        auto s = sum(g, sigmoid(g, scale(g, y, 1e-6)));
        CHECK_NOTHROW(g.backward(s));  // backward itself checks gradients for finiteness
        for (double v : y->value) CHECK(std::isfinite(v));
    }
}
