#pragma once

#include "glkm/core/parallel.hpp"
#include "glkm/core/tensor.hpp"

namespace glkm::kernels {

// ---------------------------------------------------------------------------
// GEMM. Row-major. C = alpha * op(A) * op(B) + beta * C.
// op(A) is m x k, op(B) is k x n. Leading dimensions are the row strides of
// the stored (untransposed) matrices.
// ---------------------------------------------------------------------------
void gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
          const float* a, int lda, const float* b, int ldb, float beta,
          float* c, int ldc, Backend be);

inline void gemm(bool ta, bool tb, int m, int n, int k, float alpha, const float* a,
                 int lda, const float* b, int ldb, float beta, float* c, int ldc) {
    gemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc, default_backend());
}

// ---------------------------------------------------------------------------
// im2col / col2im for a single sample (C,H,W) with square-capable kernels.
// cols has shape (C*kh*kw, oh*ow), row-major.
// ---------------------------------------------------------------------------
void im2col(const float* x, int c, int h, int w, int kh, int kw, int stride,
            int pad, float* cols);
void col2im(const float* cols, int c, int h, int w, int kh, int kw, int stride,
            int pad, float* x); // accumulates into x (caller zeroes)

inline int conv_out_dim(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

// ---------------------------------------------------------------------------
// NN convolution, NCHW, weight (OC,IC,kh,kw). The parallel path is
// im2col+GEMM; the serial path is an independent direct-loop reference.
// ---------------------------------------------------------------------------
void conv2d_forward(const Tensor& x, const Tensor& w, const float* bias,
                    int stride, int pad, Tensor& y, Backend be);
// grad wrt input: gy (N,OC,oh,ow) -> gx (N,IC,h,w). h,w taken from gx shape.
void conv2d_backward_data(const Tensor& gy, const Tensor& w, int stride, int pad,
                          Tensor& gx, Backend be);
// grad wrt weight/bias, accumulated into gw/gbias (caller zeroes).
void conv2d_backward_weight(const Tensor& x, const Tensor& gy, int stride, int pad,
                            Tensor& gw, float* gbias, Backend be);

// ---------------------------------------------------------------------------
// Image <-> blur-kernel convolution primitives. x is (C,H,W) planar, k is a
// single (kh,kw) tap grid applied identically to every channel. True
// convolution: y[i,j] = sum_{u,v} k[u,v] * x[i-u+cy, j-v+cx], cy=kh/2, cx=kw/2
// (circular indexing), or the valid form on a canvas larger by k-1.
// Accumulation is in double so the FFT and direct paths agree to <=1e-6.
// ---------------------------------------------------------------------------
void conv_circular_direct(const float* x, int c, int h, int w, const float* k,
                          int kh, int kw, float* y, Backend be);
// y has size (h-kh+1, w-kw+1) per channel; x is the larger canvas.
void conv_valid_direct(const float* x, int c, int h, int w, const float* k,
                       int kh, int kw, float* y, Backend be);

// Adjoints for the valid form (used by autodiff):
// gx[a,b] += sum_{u,v} k[u,v] * gy[a-(kh-1)+u, b-(kw-1)+v]  (bounds-checked)
void conv_valid_adjoint_data(const float* gy, int c, int oh, int ow, const float* k,
                             int kh, int kw, float* gx, Backend be);
// gk[u,v] += sum_{c,i,j} gy[i,j] * x[i+kh-1-u, j+kw-1-v]
void conv_valid_adjoint_kernel(const float* x, int c, int h, int w, const float* gy,
                               float* gk, int kh, int kw, Backend be);

// Adjoints for the circular form:
void conv_circular_adjoint_data(const float* gy, int c, int h, int w, const float* k,
                                int kh, int kw, float* gx, Backend be);
void conv_circular_adjoint_kernel(const float* x, int c, int h, int w, const float* gy,
                                  float* gk, int kh, int kw, Backend be);

} // namespace glkm::kernels
