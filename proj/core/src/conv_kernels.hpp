#pragma once

namespace evpr::detail {

// Dimensions shared by the convolution kernels. Hout/Wout always describe
// the smaller (stride-reduced) side of the map, i.e. conv2d's output.
struct ConvDims {
    int N, Cin, H, W;
    int Cout, kH, kW;
    int stride, pad;
    int Hout, Wout;
};

// out[n,co,oh,ow] = bias[co] + sum_{ci,kh,kw} x[n,ci,oh*s-p+kh, ow*s-p+kw] * w[co,ci,kh,kw]
// bias may be null. When accumulate is true, out is added to instead of overwritten.
void conv2d_forward(const double* x, const double* w, const double* bias, double* out,
                    const ConvDims& d, bool accumulate = false);

// gx[n,ci,ih,iw] += sum over the stencil of go * w   (always accumulates)
void conv2d_grad_input(const double* go, const double* w, double* gx, const ConvDims& d);

// gw[co,ci,kh,kw] += sum_{n,oh,ow} go[n,co,oh,ow] * x[n,ci,...]
void conv2d_grad_weight(const double* go, const double* x, double* gw, const ConvDims& d);

// gb[co] += sum_{n,oh,ow} go[n,co,oh,ow]
void conv2d_grad_bias(const double* go, double* gb, const ConvDims& d);

// out[n,g] = bias[g] + sum_f x[n,f] * w[g,f]; bias may be null
void matmul_nt(const double* x, const double* w, const double* bias, double* out,
               int n_rows, int in_features, int out_features);
void matmul_nt_grad_x(const double* go, const double* w, double* gx,
                      int n_rows, int in_features, int out_features);
void matmul_nt_grad_w(const double* go, const double* x, double* gw,
                      int n_rows, int in_features, int out_features);

}  // namespace evpr::detail
