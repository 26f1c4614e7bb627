#pragma once

#include "evpr/graph.hpp"

namespace evpr {

// Elementwise and scalar primitives. Shapes must match exactly; there is
// no broadcasting engine, the model does not need one.
TensorPtr add(Graph& g, const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(Graph& g, const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(Graph& g, const TensorPtr& a, const TensorPtr& b);
TensorPtr scale(Graph& g, const TensorPtr& a, double c);
TensorPtr add_scalar(Graph& g, const TensorPtr& a, double c);
TensorPtr exp(Graph& g, const TensorPtr& a);
TensorPtr relu(Graph& g, const TensorPtr& a);
TensorPtr sigmoid(Graph& g, const TensorPtr& a);

TensorPtr sum(Graph& g, const TensorPtr& a);
TensorPtr reshape(Graph& g, const TensorPtr& a, const Shape& shape);
// column slice of a [N,F] matrix, c0 <= col < c1
TensorPtr slice_cols(Graph& g, const TensorPtr& a, int c0, int c1);

// out = x . w^T + b  with x:[N,F], w:[G,F], b:[G]
TensorPtr linear(Graph& g, const TensorPtr& x, const TensorPtr& w, const TensorPtr& b);

// x:[N,Cin,H,W], w:[Cout,Cin,kH,kW], b:[Cout]
TensorPtr conv2d(Graph& g, const TensorPtr& x, const TensorPtr& w, const TensorPtr& b,
                 int stride, int padding);

// Numerical adjoint of conv2d with the same weight/stride/padding:
// y:[N,Cout,H',W'] -> [N,Cin,H,W], H = (H'-1)*stride - 2*padding + kH + output_padding.
// b has Cin entries.
TensorPtr conv_transpose2d(Graph& g, const TensorPtr& y, const TensorPtr& w, const TensorPtr& b,
                           int stride, int padding, int output_padding = 0);

// Losses. Targets are constants (never differentiated).
// Binary cross entropy summed over every non-batch element, averaged over
// the leading (batch) dimension. p must already be in [0,1].
TensorPtr bce_sum_mean(Graph& g, const TensorPtr& p, const TensorPtr& target);
// 0.5*sum_d(mu^2 + exp(logvar) - 1 - logvar), averaged over rows
TensorPtr gaussian_kl_mean(Graph& g, const TensorPtr& mu, const TensorPtr& logvar);
// softmax cross entropy of logits [N,K] against target distribution rows [N,K]
TensorPtr ce_logits_mean(Graph& g, const TensorPtr& logits, const TensorPtr& targets);

// target rows helpers
TensorPtr one_hot_rows(const std::vector<int>& labels, int num_classes);
TensorPtr uniform_rows(int n, int num_classes);

std::vector<int> argmax_rows(const Tensor& t);

}  // namespace evpr
