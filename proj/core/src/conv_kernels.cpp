#include "conv_kernels.hpp"

#include <algorithm>
#include <cstdint>

namespace evpr::detail {

namespace {

// Range of oh with 0 <= oh*s - p + k < limit, clipped to [0, count).
// All accumulation loops run inside one thread in a fixed order, so results
// do not depend on the thread count.
inline void stencil_range(int k, int pad, int stride, int limit, int count, int& lo, int& hi) {
    int num = pad - k;
    lo = num <= 0 ? 0 : (num + stride - 1) / stride;
    int top = limit - 1 + pad - k;
    hi = top < 0 ? -1 : top / stride;  // plain / would round -1/2 up to 0
    if (hi > count - 1) hi = count - 1;
}

}  // namespace

void conv2d_forward(const double* x, const double* w, const double* bias, double* out,
                    const ConvDims& d, bool accumulate) {
    const int64_t in_plane = static_cast<int64_t>(d.H) * d.W;
    const int64_t out_plane = static_cast<int64_t>(d.Hout) * d.Wout;

#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < d.N; ++n) {
        for (int co = 0; co < d.Cout; ++co) {
            double* o = out + (static_cast<int64_t>(n) * d.Cout + co) * out_plane;
            const double init = bias ? bias[co] : 0.0;
            if (!accumulate) {
                std::fill(o, o + out_plane, init);
            } else if (bias) {
                for (int64_t i = 0; i < out_plane; ++i) o[i] += init;
            }
            for (int ci = 0; ci < d.Cin; ++ci) {
                const double* xc = x + (static_cast<int64_t>(n) * d.Cin + ci) * in_plane;
                const double* wc = w + (static_cast<int64_t>(co) * d.Cin + ci) * d.kH * d.kW;
                for (int kh = 0; kh < d.kH; ++kh) {
                    int oh_lo, oh_hi;
                    stencil_range(kh, d.pad, d.stride, d.H, d.Hout, oh_lo, oh_hi);
                    for (int kw = 0; kw < d.kW; ++kw) {
                        const double wv = wc[kh * d.kW + kw];
                        int ow_lo, ow_hi;
                        stencil_range(kw, d.pad, d.stride, d.W, d.Wout, ow_lo, ow_hi);
                        for (int oh = oh_lo; oh <= oh_hi; ++oh) {
                            const double* xrow = xc + static_cast<int64_t>(oh * d.stride - d.pad + kh) * d.W;
                            double* orow = o + static_cast<int64_t>(oh) * d.Wout;
                            int iw = ow_lo * d.stride - d.pad + kw;
                            for (int ow = ow_lo; ow <= ow_hi; ++ow, iw += d.stride) {
                                orow[ow] += wv * xrow[iw];
                            }
                        }
                    }
                }
            }
        }
    }
}

void conv2d_grad_input(const double* go, const double* w, double* gx, const ConvDims& d) {
    const int64_t in_plane = static_cast<int64_t>(d.H) * d.W;
    const int64_t out_plane = static_cast<int64_t>(d.Hout) * d.Wout;

#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < d.N; ++n) {
        for (int ci = 0; ci < d.Cin; ++ci) {
            double* g = gx + (static_cast<int64_t>(n) * d.Cin + ci) * in_plane;
            for (int co = 0; co < d.Cout; ++co) {
                const double* goc = go + (static_cast<int64_t>(n) * d.Cout + co) * out_plane;
                const double* wc = w + (static_cast<int64_t>(co) * d.Cin + ci) * d.kH * d.kW;
                for (int kh = 0; kh < d.kH; ++kh) {
                    int oh_lo, oh_hi;
                    stencil_range(kh, d.pad, d.stride, d.H, d.Hout, oh_lo, oh_hi);
                    for (int kw = 0; kw < d.kW; ++kw) {
                        const double wv = wc[kh * d.kW + kw];
                        int ow_lo, ow_hi;
                        stencil_range(kw, d.pad, d.stride, d.W, d.Wout, ow_lo, ow_hi);
                        for (int oh = oh_lo; oh <= oh_hi; ++oh) {
                            double* grow = g + static_cast<int64_t>(oh * d.stride - d.pad + kh) * d.W;
                            const double* gorow = goc + static_cast<int64_t>(oh) * d.Wout;
                            int iw = ow_lo * d.stride - d.pad + kw;
                            for (int ow = ow_lo; ow <= ow_hi; ++ow, iw += d.stride) {
                                grow[iw] += wv * gorow[ow];
                            }
                        }
                    }
                }
            }
        }
    }
}

void conv2d_grad_weight(const double* go, const double* x, double* gw, const ConvDims& d) {
    const int64_t in_plane = static_cast<int64_t>(d.H) * d.W;
    const int64_t out_plane = static_cast<int64_t>(d.Hout) * d.Wout;

#pragma omp parallel for collapse(2) schedule(static)
    for (int co = 0; co < d.Cout; ++co) {
        for (int ci = 0; ci < d.Cin; ++ci) {
            double* gwc = gw + (static_cast<int64_t>(co) * d.Cin + ci) * d.kH * d.kW;
            for (int n = 0; n < d.N; ++n) {
                const double* goc = go + (static_cast<int64_t>(n) * d.Cout + co) * out_plane;
                const double* xc = x + (static_cast<int64_t>(n) * d.Cin + ci) * in_plane;
                for (int kh = 0; kh < d.kH; ++kh) {
                    int oh_lo, oh_hi;
                    stencil_range(kh, d.pad, d.stride, d.H, d.Hout, oh_lo, oh_hi);
                    for (int kw = 0; kw < d.kW; ++kw) {
                        int ow_lo, ow_hi;
                        stencil_range(kw, d.pad, d.stride, d.W, d.Wout, ow_lo, ow_hi);
                        double acc = 0.0;
                        for (int oh = oh_lo; oh <= oh_hi; ++oh) {
                            const double* xrow = xc + static_cast<int64_t>(oh * d.stride - d.pad + kh) * d.W;
                            const double* gorow = goc + static_cast<int64_t>(oh) * d.Wout;
                            int iw = ow_lo * d.stride - d.pad + kw;
                            for (int ow = ow_lo; ow <= ow_hi; ++ow, iw += d.stride) {
                                acc += gorow[ow] * xrow[iw];
                            }
                        }
                        gwc[kh * d.kW + kw] += acc;
                    }
                }
            }
        }
    }
}

void conv2d_grad_bias(const double* go, double* gb, const ConvDims& d) {
    const int64_t out_plane = static_cast<int64_t>(d.Hout) * d.Wout;
    for (int co = 0; co < d.Cout; ++co) {
        double acc = 0.0;
        for (int n = 0; n < d.N; ++n) {
            const double* goc = go + (static_cast<int64_t>(n) * d.Cout + co) * out_plane;
            for (int64_t i = 0; i < out_plane; ++i) acc += goc[i];
        }
        gb[co] += acc;
    }
}

void matmul_nt(const double* x, const double* w, const double* bias, double* out,
               int n_rows, int in_features, int out_features) {
#pragma omp parallel for schedule(static)
    for (int n = 0; n < n_rows; ++n) {
        const double* xr = x + static_cast<int64_t>(n) * in_features;
        double* o = out + static_cast<int64_t>(n) * out_features;
        for (int g = 0; g < out_features; ++g) {
            const double* wr = w + static_cast<int64_t>(g) * in_features;
            double acc = bias ? bias[g] : 0.0;
            for (int f = 0; f < in_features; ++f) acc += xr[f] * wr[f];
            o[g] = acc;
        }
    }
}

void matmul_nt_grad_x(const double* go, const double* w, double* gx,
                      int n_rows, int in_features, int out_features) {
#pragma omp parallel for schedule(static)
    for (int n = 0; n < n_rows; ++n) {
        const double* gor = go + static_cast<int64_t>(n) * out_features;
        double* gxr = gx + static_cast<int64_t>(n) * in_features;
        for (int g = 0; g < out_features; ++g) {
            const double gv = gor[g];
            const double* wr = w + static_cast<int64_t>(g) * in_features;
            for (int f = 0; f < in_features; ++f) gxr[f] += gv * wr[f];
        }
    }
}

void matmul_nt_grad_w(const double* go, const double* x, double* gw,
                      int n_rows, int in_features, int out_features) {
#pragma omp parallel for schedule(static)
    for (int g = 0; g < out_features; ++g) {
        double* gwr = gw + static_cast<int64_t>(g) * in_features;
        for (int n = 0; n < n_rows; ++n) {
            const double gv = go[static_cast<int64_t>(n) * out_features + g];
            const double* xr = x + static_cast<int64_t>(n) * in_features;
            for (int f = 0; f < in_features; ++f) gwr[f] += gv * xr[f];
        }
    }
}

}  // namespace evpr::detail
