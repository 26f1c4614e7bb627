#include "evpr/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "conv_kernels.hpp"
#include "evpr/errors.hpp"

namespace evpr {

namespace {

void require_same_shape(const char* op, const TensorPtr& a, const TensorPtr& b) {
    if (a->shape != b->shape) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a->shape) +
                         " vs " + shape_str(b->shape));
    }
}

void require_rank(const char* op, const TensorPtr& t, size_t rank, const char* role) {
    if (t->shape.size() != rank) {
        throw ShapeError(std::string(op) + ": " + role + " must have rank " +
                         std::to_string(rank) + ", got shape " + shape_str(t->shape));
    }
}

}  // namespace

TensorPtr add(Graph& g, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape("add", a, b);
    auto out = Tensor::zeros(a->shape);
    const int64_t n = a->numel();
    for (int64_t i = 0; i < n; ++i) out->value[i] = a->value[i] + b->value[i];
    return g.record("add", {a, b}, out, [](const Node& nd) {
        const auto& go = nd.output->grad;
        for (int k = 0; k < 2; ++k) {
            if (!nd.inputs[k]->requires_grad) continue;
            nd.inputs[k]->ensure_grad();
            auto& gi = nd.inputs[k]->grad;
            for (size_t i = 0; i < go.size(); ++i) gi[i] += go[i];
        }
    });
}

TensorPtr sub(Graph& g, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape("sub", a, b);
    auto out = Tensor::zeros(a->shape);
    const int64_t n = a->numel();
    for (int64_t i = 0; i < n; ++i) out->value[i] = a->value[i] - b->value[i];
    return g.record("sub", {a, b}, out, [](const Node& nd) {
        const auto& go = nd.output->grad;
        if (nd.inputs[0]->requires_grad) {
            nd.inputs[0]->ensure_grad();
            auto& gi = nd.inputs[0]->grad;
            for (size_t i = 0; i < go.size(); ++i) gi[i] += go[i];
        }
        if (nd.inputs[1]->requires_grad) {
            nd.inputs[1]->ensure_grad();
            auto& gi = nd.inputs[1]->grad;
            for (size_t i = 0; i < go.size(); ++i) gi[i] -= go[i];
        }
    });
}

TensorPtr mul(Graph& g, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape("mul", a, b);
    auto out = Tensor::zeros(a->shape);
    const int64_t n = a->numel();
    for (int64_t i = 0; i < n; ++i) out->value[i] = a->value[i] * b->value[i];
    return g.record("mul", {a, b}, out, [](const Node& nd) {
        const auto& go = nd.output->grad;
        const auto& av = nd.inputs[0]->value;
        const auto& bv = nd.inputs[1]->value;
        if (nd.inputs[0]->requires_grad) {
            nd.inputs[0]->ensure_grad();
            auto& gi = nd.inputs[0]->grad;
            for (size_t i = 0; i < go.size(); ++i) gi[i] += go[i] * bv[i];
        }
        if (nd.inputs[1]->requires_grad) {
            nd.inputs[1]->ensure_grad();
            auto& gi = nd.inputs[1]->grad;
            for (size_t i = 0; i < go.size(); ++i) gi[i] += go[i] * av[i];
        }
    });
}

TensorPtr scale(Graph& g, const TensorPtr& a, double c) {
    auto out = Tensor::zeros(a->shape);
    const int64_t n = a->numel();
    for (int64_t i = 0; i < n; ++i) out->value[i] = c * a->value[i];
    return g.record("scale", {a}, out, [c](const Node& nd) {
        const auto& go = nd.output->grad;
        nd.inputs[0]->ensure_grad();
        auto& gi = nd.inputs[0]->grad;
        for (size_t i = 0; i < go.size(); ++i) gi[i] += c * go[i];
    });
}

TensorPtr add_scalar(Graph& g, const TensorPtr& a, double c) {
    auto out = Tensor::zeros(a->shape);
    const int64_t n = a->numel();
    for (int64_t i = 0; i < n; ++i) out->value[i] = a->value[i] + c;
    return g.record("add_scalar", {a}, out, [](const Node& nd) {
        const auto& go = nd.output->grad;
        nd.inputs[0]->ensure_grad();
        auto& gi = nd.inputs[0]->grad;
        for (size_t i = 0; i < go.size(); ++i) gi[i] += go[i];
    });
}

TensorPtr exp(Graph& g, const TensorPtr& a) {
    auto out = Tensor::zeros(a->shape);
    const int64_t n = a->numel();
    for (int64_t i = 0; i < n; ++i) out->value[i] = std::exp(a->value[i]);
    return g.record("exp", {a}, out, [](const Node& nd) {
        const auto& go = nd.output->grad;
        const auto& y = nd.output->value;
        nd.inputs[0]->ensure_grad();
        auto& gi = nd.inputs[0]->grad;
        for (size_t i = 0; i < go.size(); ++i) gi[i] += go[i] * y[i];
    });
}

TensorPtr relu(Graph& g, const TensorPtr& a) {
    auto out = Tensor::zeros(a->shape);
    const int64_t n = a->numel();
    for (int64_t i = 0; i < n; ++i) out->value[i] = a->value[i] > 0.0 ? a->value[i] : 0.0;
    return g.record("relu", {a}, out, [](const Node& nd) {
        const auto& go = nd.output->grad;
        const auto& x = nd.inputs[0]->value;
        nd.inputs[0]->ensure_grad();
        auto& gi = nd.inputs[0]->grad;
        // subgradient at exactly 0 is taken as 0
        for (size_t i = 0; i < go.size(); ++i) gi[i] += x[i] > 0.0 ? go[i] : 0.0;
    });
}

TensorPtr sigmoid(Graph& g, const TensorPtr& a) {
    auto out = Tensor::zeros(a->shape);
    const int64_t n = a->numel();
    for (int64_t i = 0; i < n; ++i) {
        const double x = a->value[i];
        if (x >= 0.0) {
            out->value[i] = 1.0 / (1.0 + std::exp(-x));
        } else {
            const double e = std::exp(x);
            out->value[i] = e / (1.0 + e);
        }
    }
    return g.record("sigmoid", {a}, out, [](const Node& nd) {
        const auto& go = nd.output->grad;
        const auto& y = nd.output->value;
        nd.inputs[0]->ensure_grad();
        auto& gi = nd.inputs[0]->grad;
        for (size_t i = 0; i < go.size(); ++i) gi[i] += go[i] * y[i] * (1.0 - y[i]);
    });
}

TensorPtr sum(Graph& g, const TensorPtr& a) {
    double acc = 0.0;
    for (double v : a->value) acc += v;
    auto out = Tensor::scalar(acc);
    return g.record("sum", {a}, out, [](const Node& nd) {
        const double go = nd.output->grad[0];
        nd.inputs[0]->ensure_grad();
        auto& gi = nd.inputs[0]->grad;
        for (double& v : gi) v += go;
    });
}

TensorPtr reshape(Graph& g, const TensorPtr& a, const Shape& shape) {
    if (numel_of(shape) != a->numel()) {
        throw ShapeError("reshape: cannot view " + shape_str(a->shape) + " as " + shape_str(shape));
    }
    auto out = Tensor::from(shape, a->value);
    return g.record("reshape", {a}, out, [](const Node& nd) {
        const auto& go = nd.output->grad;
        nd.inputs[0]->ensure_grad();
        auto& gi = nd.inputs[0]->grad;
        for (size_t i = 0; i < go.size(); ++i) gi[i] += go[i];
    });
}

TensorPtr slice_cols(Graph& g, const TensorPtr& a, int c0, int c1) {
    require_rank("slice_cols", a, 2, "input");
    const int rows = a->shape[0];
    const int cols = a->shape[1];
    if (c0 < 0 || c1 > cols || c0 >= c1) {
        throw ShapeError("slice_cols: range [" + std::to_string(c0) + "," + std::to_string(c1) +
                         ") invalid for " + std::to_string(cols) + " columns");
    }
    const int width = c1 - c0;
    auto out = Tensor::zeros({rows, width});
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < width; ++c) {
            out->value[static_cast<size_t>(r) * width + c] = a->value[static_cast<size_t>(r) * cols + c0 + c];
        }
    }
    return g.record("slice_cols", {a}, out, [c0, width, cols](const Node& nd) {
        const auto& go = nd.output->grad;
        nd.inputs[0]->ensure_grad();
        auto& gi = nd.inputs[0]->grad;
        const int rows = nd.inputs[0]->shape[0];
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < width; ++c) {
                gi[static_cast<size_t>(r) * cols + c0 + c] += go[static_cast<size_t>(r) * width + c];
            }
        }
    });
}

TensorPtr linear(Graph& g, const TensorPtr& x, const TensorPtr& w, const TensorPtr& b) {
    require_rank("linear", x, 2, "input");
    require_rank("linear", w, 2, "weight");
    require_rank("linear", b, 1, "bias");
    const int n = x->shape[0];
    const int in_f = x->shape[1];
    const int out_f = w->shape[0];
    if (w->shape[1] != in_f) {
        throw ShapeError("linear: input features (" + std::to_string(in_f) +
                         ") != weight in_features (" + std::to_string(w->shape[1]) + ")");
    }
    if (b->shape[0] != out_f) {
        throw ShapeError("linear: bias size (" + std::to_string(b->shape[0]) +
                         ") != weight out_features (" + std::to_string(out_f) + ")");
    }
    auto out = Tensor::zeros({n, out_f});
    detail::matmul_nt(x->value.data(), w->value.data(), b->value.data(), out->value.data(),
                      n, in_f, out_f);
    return g.record("linear", {x, w, b}, out, [n, in_f, out_f](const Node& nd) {
        const auto& go = nd.output->grad;
        const auto& xin = nd.inputs[0];
        const auto& win = nd.inputs[1];
        const auto& bin = nd.inputs[2];
        if (xin->requires_grad) {
            xin->ensure_grad();
            detail::matmul_nt_grad_x(go.data(), win->value.data(), xin->grad.data(), n, in_f, out_f);
        }
        if (win->requires_grad) {
            win->ensure_grad();
            detail::matmul_nt_grad_w(go.data(), xin->value.data(), win->grad.data(), n, in_f, out_f);
        }
        if (bin->requires_grad) {
            bin->ensure_grad();
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < out_f; ++c) bin->grad[c] += go[static_cast<size_t>(r) * out_f + c];
            }
        }
    });
}

namespace {

detail::ConvDims conv_dims_checked(const TensorPtr& x, const TensorPtr& w, const TensorPtr& b,
                                   int stride, int padding) {
    require_rank("conv2d", x, 4, "input");
    require_rank("conv2d", w, 4, "weight");
    require_rank("conv2d", b, 1, "bias");
    if (stride < 1) throw ShapeError("conv2d: stride must be >= 1, got " + std::to_string(stride));
    if (padding < 0) throw ShapeError("conv2d: padding must be >= 0, got " + std::to_string(padding));
    detail::ConvDims d;
    d.N = x->shape[0];
    d.Cin = x->shape[1];
    d.H = x->shape[2];
    d.W = x->shape[3];
    d.Cout = w->shape[0];
    d.kH = w->shape[2];
    d.kW = w->shape[3];
    d.stride = stride;
    d.pad = padding;
    if (w->shape[1] != d.Cin) {
        throw ShapeError("conv2d: input channels (" + std::to_string(d.Cin) +
                         ") != weight Cin (" + std::to_string(w->shape[1]) + ")");
    }
    if (b->shape[0] != d.Cout) {
        throw ShapeError("conv2d: bias size (" + std::to_string(b->shape[0]) +
                         ") != weight Cout (" + std::to_string(d.Cout) + ")");
    }
    if (d.H + 2 * padding < d.kH || d.W + 2 * padding < d.kW) {
        throw ShapeError("conv2d: kernel " + std::to_string(d.kH) + "x" + std::to_string(d.kW) +
                         " larger than padded input " + std::to_string(d.H + 2 * padding) + "x" +
                         std::to_string(d.W + 2 * padding));
    }
    d.Hout = (d.H + 2 * padding - d.kH) / stride + 1;
    d.Wout = (d.W + 2 * padding - d.kW) / stride + 1;
    return d;
}

}  // namespace

TensorPtr conv2d(Graph& g, const TensorPtr& x, const TensorPtr& w, const TensorPtr& b,
                 int stride, int padding) {
    const detail::ConvDims d = conv_dims_checked(x, w, b, stride, padding);
    auto out = Tensor::zeros({d.N, d.Cout, d.Hout, d.Wout});
    detail::conv2d_forward(x->value.data(), w->value.data(), b->value.data(), out->value.data(), d);
    return g.record("conv2d", {x, w, b}, out, [d](const Node& nd) {
        const auto& go = nd.output->grad;
        const auto& xin = nd.inputs[0];
        const auto& win = nd.inputs[1];
        const auto& bin = nd.inputs[2];
        if (xin->requires_grad) {
            xin->ensure_grad();
            detail::conv2d_grad_input(go.data(), win->value.data(), xin->grad.data(), d);
        }
        if (win->requires_grad) {
            win->ensure_grad();
            detail::conv2d_grad_weight(go.data(), xin->value.data(), win->grad.data(), d);
        }
        if (bin->requires_grad) {
            bin->ensure_grad();
            detail::conv2d_grad_bias(go.data(), bin->grad.data(), d);
        }
    });
}

TensorPtr conv_transpose2d(Graph& g, const TensorPtr& y, const TensorPtr& w, const TensorPtr& b,
                           int stride, int padding, int output_padding) {
    require_rank("conv_transpose2d", y, 4, "input");
    require_rank("conv_transpose2d", w, 4, "weight");
    require_rank("conv_transpose2d", b, 1, "bias");
    if (stride < 1) throw ShapeError("conv_transpose2d: stride must be >= 1");
    if (output_padding < 0 || output_padding >= stride) {
        throw ShapeError("conv_transpose2d: output_padding must be in [0, stride)");
    }
    detail::ConvDims d;
    d.N = y->shape[0];
    d.Cout = y->shape[1];
    d.Hout = y->shape[2];
    d.Wout = y->shape[3];
    d.Cin = w->shape[1];
    d.kH = w->shape[2];
    d.kW = w->shape[3];
    d.stride = stride;
    d.pad = padding;
    if (w->shape[0] != d.Cout) {
        throw ShapeError("conv_transpose2d: input channels (" + std::to_string(d.Cout) +
                         ") != weight Cout (" + std::to_string(w->shape[0]) + ")");
    }
    if (b->shape[0] != d.Cin) {
        throw ShapeError("conv_transpose2d: bias size (" + std::to_string(b->shape[0]) +
                         ") != weight Cin (" + std::to_string(d.Cin) + ")");
    }
    d.H = (d.Hout - 1) * stride - 2 * padding + d.kH + output_padding;
    d.W = (d.Wout - 1) * stride - 2 * padding + d.kW + output_padding;
    if (d.H <= 0 || d.W <= 0) {
        throw ShapeError("conv_transpose2d: computed output size " + std::to_string(d.H) + "x" +
                         std::to_string(d.W) + " is not positive");
    }

    auto out = Tensor::zeros({d.N, d.Cin, d.H, d.W});
    // transposed convolution is the input-gradient stencil of conv2d
    detail::conv2d_grad_input(y->value.data(), w->value.data(), out->value.data(), d);
    const int64_t plane = static_cast<int64_t>(d.H) * d.W;
    for (int n = 0; n < d.N; ++n) {
        for (int ci = 0; ci < d.Cin; ++ci) {
            double* o = out->value.data() + (static_cast<int64_t>(n) * d.Cin + ci) * plane;
            const double bv = b->value[ci];
            for (int64_t i = 0; i < plane; ++i) o[i] += bv;
        }
    }
    return g.record("conv_transpose2d", {y, w, b}, out, [d](const Node& nd) {
        const auto& go = nd.output->grad;
        const auto& yin = nd.inputs[0];
        const auto& win = nd.inputs[1];
        const auto& bin = nd.inputs[2];
        if (yin->requires_grad) {
            yin->ensure_grad();
            detail::conv2d_forward(go.data(), win->value.data(), nullptr, yin->grad.data(), d, true);
        }
        if (win->requires_grad) {
            win->ensure_grad();
            detail::conv2d_grad_weight(yin->value.data(), go.data(), win->grad.data(), d);
        }
        if (bin->requires_grad) {
            bin->ensure_grad();
            const int64_t plane = static_cast<int64_t>(d.H) * d.W;
            for (int n = 0; n < d.N; ++n) {
                for (int ci = 0; ci < d.Cin; ++ci) {
                    const double* gp = go.data() + (static_cast<int64_t>(n) * d.Cin + ci) * plane;
                    double acc = 0.0;
                    for (int64_t i = 0; i < plane; ++i) acc += gp[i];
                    bin->grad[ci] += acc;
                }
            }
        }
    });
}

TensorPtr bce_sum_mean(Graph& g, const TensorPtr& p, const TensorPtr& target) {
    require_same_shape("bce_sum_mean", p, target);
    if (p->shape.empty()) throw ShapeError("bce_sum_mean: input must have a batch dimension");
    const int batch = p->shape[0];
    const double inv_n = 1.0 / batch;
    constexpr double kEps = 1e-12;

    double acc = 0.0;
    for (size_t i = 0; i < p->value.size(); ++i) {
        const double raw = p->value[i];
        if (!(raw >= 0.0 && raw <= 1.0)) {
            throw NumericsError("bce_sum_mean: prediction " + std::to_string(raw) +
                                " outside [0,1] at flat index " + std::to_string(i));
        }
        const double pc = std::clamp(raw, kEps, 1.0 - kEps);
        const double t = target->value[i];
        acc += -(t * std::log(pc) + (1.0 - t) * std::log(1.0 - pc));
    }
    auto out = Tensor::scalar(acc * inv_n);
    return g.record("bce_sum_mean", {p, target}, out, [inv_n](const Node& nd) {
        const double go = nd.output->grad[0] * inv_n;
        const auto& pin = nd.inputs[0];
        const auto& tin = nd.inputs[1];
        if (!pin->requires_grad) return;
        pin->ensure_grad();
        constexpr double kEps = 1e-12;
        for (size_t i = 0; i < pin->value.size(); ++i) {
            const double pc = std::clamp(pin->value[i], kEps, 1.0 - kEps);
            const double t = tin->value[i];
            pin->grad[i] += go * (-(t / pc) + (1.0 - t) / (1.0 - pc));
        }
    });
}

TensorPtr gaussian_kl_mean(Graph& g, const TensorPtr& mu, const TensorPtr& logvar) {
    require_same_shape("gaussian_kl_mean", mu, logvar);
    require_rank("gaussian_kl_mean", mu, 2, "mu");
    const int batch = mu->shape[0];
    const double inv_n = 1.0 / batch;

    double acc = 0.0;
    for (size_t i = 0; i < mu->value.size(); ++i) {
        const double m = mu->value[i];
        const double lv = logvar->value[i];
        acc += 0.5 * (m * m + std::exp(lv) - 1.0 - lv);
    }
    auto out = Tensor::scalar(acc * inv_n);
    return g.record("gaussian_kl_mean", {mu, logvar}, out, [inv_n](const Node& nd) {
        const double go = nd.output->grad[0] * inv_n;
        const auto& min = nd.inputs[0];
        const auto& lin = nd.inputs[1];
        if (min->requires_grad) {
            min->ensure_grad();
            for (size_t i = 0; i < min->value.size(); ++i) min->grad[i] += go * min->value[i];
        }
        if (lin->requires_grad) {
            lin->ensure_grad();
            for (size_t i = 0; i < lin->value.size(); ++i) {
                lin->grad[i] += go * 0.5 * (std::exp(lin->value[i]) - 1.0);
            }
        }
    });
}

TensorPtr ce_logits_mean(Graph& g, const TensorPtr& logits, const TensorPtr& targets) {
    require_same_shape("ce_logits_mean", logits, targets);
    require_rank("ce_logits_mean", logits, 2, "logits");
    const int n = logits->shape[0];
    const int k = logits->shape[1];
    const double inv_n = 1.0 / n;

    auto softmax = std::make_shared<std::vector<double>>(logits->value.size());
    double acc = 0.0;
    for (int r = 0; r < n; ++r) {
        const double* l = logits->value.data() + static_cast<size_t>(r) * k;
        const double* t = targets->value.data() + static_cast<size_t>(r) * k;
        double m = l[0];
        for (int c = 1; c < k; ++c) m = std::max(m, l[c]);
        double z = 0.0;
        for (int c = 0; c < k; ++c) z += std::exp(l[c] - m);
        const double lse = m + std::log(z);
        double dot = 0.0;
        for (int c = 0; c < k; ++c) {
            dot += t[c] * l[c];
            (*softmax)[static_cast<size_t>(r) * k + c] = std::exp(l[c] - m) / z;
        }
        acc += lse - dot;
    }
    auto out = Tensor::scalar(acc * inv_n);
    return g.record("ce_logits_mean", {logits, targets}, out, [softmax, inv_n, n, k](const Node& nd) {
        const double go = nd.output->grad[0] * inv_n;
        const auto& lin = nd.inputs[0];
        const auto& tin = nd.inputs[1];
        if (!lin->requires_grad) return;
        lin->ensure_grad();
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < k; ++c) {
                const size_t i = static_cast<size_t>(r) * k + c;
                lin->grad[i] += go * ((*softmax)[i] - tin->value[i]);
            }
        }
    });
}

TensorPtr one_hot_rows(const std::vector<int>& labels, int num_classes) {
    auto t = Tensor::zeros({static_cast<int>(labels.size()), num_classes});
    for (size_t r = 0; r < labels.size(); ++r) {
        if (labels[r] < 0 || labels[r] >= num_classes) {
            throw ShapeError("one_hot_rows: label " + std::to_string(labels[r]) +
                             " outside [0," + std::to_string(num_classes) + ")");
        }
        t->value[r * num_classes + labels[r]] = 1.0;
    }
    return t;
}

TensorPtr uniform_rows(int n, int num_classes) {
    return Tensor::full({n, num_classes}, 1.0 / num_classes);
}

std::vector<int> argmax_rows(const Tensor& t) {
    if (t.shape.size() != 2) throw ShapeError("argmax_rows: need a rank-2 tensor");
    const int n = t.shape[0];
    const int k = t.shape[1];
    std::vector<int> out(n, 0);
    for (int r = 0; r < n; ++r) {
        const double* row = t.value.data() + static_cast<size_t>(r) * k;
        int best = 0;
        for (int c = 1; c < k; ++c) {
            if (row[c] > row[best]) best = c;
        }
        out[r] = best;
    }
    return out;
}

}  // namespace evpr
