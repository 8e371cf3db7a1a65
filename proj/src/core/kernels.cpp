#include "glkm/core/kernels.hpp"

#include <atomic>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace glkm {

namespace {
std::atomic<Backend> g_backend{Backend::parallel};
}

Backend default_backend() { return g_backend.load(std::memory_order_relaxed); }
void set_default_backend(Backend b) { g_backend.store(b, std::memory_order_relaxed); }

int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace glkm

namespace glkm::kernels {

// ---------------------------------------------------------------------------
// GEMM
// ---------------------------------------------------------------------------

namespace {

inline const float* row_ptr(const float* a, int ld, int i) { return a + (std::size_t)i * ld; }

// Serial reference: textbook triple loop, no tiling.
void gemm_serial(bool ta, bool tb, int m, int n, int k, float alpha, const float* a,
                 int lda, const float* b, int ldb, float beta, float* c, int ldc) {
    for (int i = 0; i < m; ++i) {
        float* crow = c + (std::size_t)i * ldc;
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) {
                const float av = ta ? a[(std::size_t)p * lda + i] : a[(std::size_t)i * lda + p];
                const float bv = tb ? b[(std::size_t)j * ldb + p] : b[(std::size_t)p * ldb + j];
                acc += (double)av * bv;
            }
            crow[j] = alpha * (float)acc + (beta == 0.0f ? 0.0f : beta * crow[j]);
        }
    }
}

// Parallel path: rows of C are independent; the inner axpy over contiguous
// rows of B vectorizes. Each output row is accumulated serially, so results
// are identical for any thread count.
void gemm_parallel(bool ta, bool tb, int m, int n, int k, float alpha, const float* a,
                   int lda, const float* b, int ldb, float beta, float* c, int ldc) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        float* crow = c + (std::size_t)i * ldc;
        if (beta == 0.0f)
            std::memset(crow, 0, sizeof(float) * (std::size_t)n);
        else
            for (int j = 0; j < n; ++j) crow[j] *= beta;

        if (!tb) {
            for (int p = 0; p < k; ++p) {
                const float av =
                    alpha * (ta ? a[(std::size_t)p * lda + i] : a[(std::size_t)i * lda + p]);
                if (av == 0.0f) continue;
                const float* brow = row_ptr(b, ldb, p);
                for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        } else {
            for (int j = 0; j < n; ++j) {
                const float* brow = row_ptr(b, ldb, j);
                double acc = 0.0;
                if (ta) {
                    for (int p = 0; p < k; ++p) acc += (double)a[(std::size_t)p * lda + i] * brow[p];
                } else {
                    const float* arow = row_ptr(a, lda, i);
                    for (int p = 0; p < k; ++p) acc += (double)arow[p] * brow[p];
                }
                crow[j] += alpha * (float)acc;
            }
        }
    }
}

} // namespace

void gemm(bool ta, bool tb, int m, int n, int k, float alpha, const float* a, int lda,
          const float* b, int ldb, float beta, float* c, int ldc, Backend be) {
    if (be == Backend::serial)
        gemm_serial(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
    else
        gemm_parallel(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

// ---------------------------------------------------------------------------
// im2col / col2im
// ---------------------------------------------------------------------------

void im2col(const float* x, int c, int h, int w, int kh, int kw, int stride, int pad,
            float* cols) {
    const int oh = conv_out_dim(h, kh, stride, pad);
    const int ow = conv_out_dim(w, kw, stride, pad);
    const std::size_t ncols = (std::size_t)oh * ow;
    for (int ch = 0; ch < c; ++ch) {
        const float* xc = x + (std::size_t)ch * h * w;
        for (int u = 0; u < kh; ++u) {
            for (int v = 0; v < kw; ++v) {
                float* row = cols + (((std::size_t)ch * kh + u) * kw + v) * ncols;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride - pad + u;
                    float* dst = row + (std::size_t)oy * ow;
                    if (iy < 0 || iy >= h) {
                        std::memset(dst, 0, sizeof(float) * (std::size_t)ow);
                        continue;
                    }
                    const float* src = xc + (std::size_t)iy * w;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride - pad + v;
                        dst[ox] = (ix >= 0 && ix < w) ? src[ix] : 0.0f;
                    }
                }
            }
        }
    }
}

void col2im(const float* cols, int c, int h, int w, int kh, int kw, int stride, int pad,
            float* x) {
    const int oh = conv_out_dim(h, kh, stride, pad);
    const int ow = conv_out_dim(w, kw, stride, pad);
    const std::size_t ncols = (std::size_t)oh * ow;
    for (int ch = 0; ch < c; ++ch) {
        float* xc = x + (std::size_t)ch * h * w;
        for (int u = 0; u < kh; ++u) {
            for (int v = 0; v < kw; ++v) {
                const float* row = cols + (((std::size_t)ch * kh + u) * kw + v) * ncols;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride - pad + u;
                    if (iy < 0 || iy >= h) continue;
                    const float* src = row + (std::size_t)oy * ow;
                    float* dst = xc + (std::size_t)iy * w;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride - pad + v;
                        if (ix >= 0 && ix < w) dst[ix] += src[ox];
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// NN convolution
// ---------------------------------------------------------------------------

namespace {

// Direct-loop reference, used as the serial oracle for im2col+GEMM.
void conv2d_forward_serial(const Tensor& x, const Tensor& w, const float* bias, int stride,
                           int pad, Tensor& y) {
    const int n = x.dim(0), ic = x.dim(1), h = x.dim(2), ww = x.dim(3);
    const int oc = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    const int oh = y.dim(2), ow = y.dim(3);
    for (int s = 0; s < n; ++s)
        for (int o = 0; o < oc; ++o)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    double acc = bias ? bias[o] : 0.0;
                    for (int i = 0; i < ic; ++i)
                        for (int u = 0; u < kh; ++u)
                            for (int v = 0; v < kw; ++v) {
                                const int iy = oy * stride - pad + u;
                                const int ix = ox * stride - pad + v;
                                if (iy < 0 || iy >= h || ix < 0 || ix >= ww) continue;
                                acc += (double)x.at4(s, i, iy, ix) * w.at4(o, i, u, v);
                            }
                    y.at4(s, o, oy, ox) = (float)acc;
                }
}

} // namespace

void conv2d_forward(const Tensor& x, const Tensor& w, const float* bias, int stride,
                    int pad, Tensor& y, Backend be) {
    const int n = x.dim(0), ic = x.dim(1), h = x.dim(2), ww = x.dim(3);
    const int oc = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    const int oh = conv_out_dim(h, kh, stride, pad);
    const int ow = conv_out_dim(ww, kw, stride, pad);
    y = Tensor({n, oc, oh, ow});
    if (be == Backend::serial) {
        conv2d_forward_serial(x, w, bias, stride, pad, y);
        return;
    }
    const std::size_t krows = (std::size_t)ic * kh * kw;
    const std::size_t ncols = (std::size_t)oh * ow;
    std::vector<float> cols(krows * ncols);
    for (int s = 0; s < n; ++s) {
        im2col(x.ptr() + (std::size_t)s * ic * h * ww, ic, h, ww, kh, kw, stride, pad,
               cols.data());
        float* ys = y.ptr() + (std::size_t)s * oc * ncols;
        gemm(false, false, oc, (int)ncols, (int)krows, 1.0f, w.ptr(), (int)krows,
             cols.data(), (int)ncols, 0.0f, ys, (int)ncols, Backend::parallel);
        if (bias) {
#pragma omp parallel for schedule(static)
            for (int o = 0; o < oc; ++o) {
                float* yo = ys + (std::size_t)o * ncols;
                const float b = bias[o];
                for (std::size_t j = 0; j < ncols; ++j) yo[j] += b;
            }
        }
    }
}

void conv2d_backward_data(const Tensor& gy, const Tensor& w, int stride, int pad,
                          Tensor& gx, Backend be) {
    const int n = gy.dim(0), oc = gy.dim(1), oh = gy.dim(2), ow = gy.dim(3);
    const int ic = w.dim(1), kh = w.dim(2), kw = w.dim(3);
    const int h = gx.dim(2), ww = gx.dim(3);
    gx.fill(0.0f);
    if (be == Backend::serial) {
        for (int s = 0; s < n; ++s)
            for (int o = 0; o < oc; ++o)
                for (int oy = 0; oy < oh; ++oy)
                    for (int ox = 0; ox < ow; ++ox) {
                        const float g = gy.at4(s, o, oy, ox);
                        if (g == 0.0f) continue;
                        for (int i = 0; i < ic; ++i)
                            for (int u = 0; u < kh; ++u)
                                for (int v = 0; v < kw; ++v) {
                                    const int iy = oy * stride - pad + u;
                                    const int ix = ox * stride - pad + v;
                                    if (iy < 0 || iy >= h || ix < 0 || ix >= ww) continue;
                                    gx.at4(s, i, iy, ix) += g * w.at4(o, i, u, v);
                                }
                    }
        return;
    }
    const std::size_t krows = (std::size_t)ic * kh * kw;
    const std::size_t ncols = (std::size_t)oh * ow;
    std::vector<float> cols(krows * ncols);
    for (int s = 0; s < n; ++s) {
        // cols = W^T * gy  (krows x ncols)
        gemm(true, false, (int)krows, (int)ncols, oc, 1.0f, w.ptr(), (int)krows,
             gy.ptr() + (std::size_t)s * oc * ncols, (int)ncols, 0.0f, cols.data(),
             (int)ncols, Backend::parallel);
        col2im(cols.data(), ic, h, ww, kh, kw, stride, pad,
               gx.ptr() + (std::size_t)s * ic * h * ww);
    }
}

void conv2d_backward_weight(const Tensor& x, const Tensor& gy, int stride, int pad,
                            Tensor& gw, float* gbias, Backend be) {
    const int n = x.dim(0), ic = x.dim(1), h = x.dim(2), ww = x.dim(3);
    const int oc = gy.dim(1), oh = gy.dim(2), ow = gy.dim(3);
    const int kh = gw.dim(2), kw = gw.dim(3);
    if (be == Backend::serial) {
        for (int s = 0; s < n; ++s)
            for (int o = 0; o < oc; ++o)
                for (int oy = 0; oy < oh; ++oy)
                    for (int ox = 0; ox < ow; ++ox) {
                        const float g = gy.at4(s, o, oy, ox);
                        if (gbias) gbias[o] += g;
                        for (int i = 0; i < ic; ++i)
                            for (int u = 0; u < kh; ++u)
                                for (int v = 0; v < kw; ++v) {
                                    const int iy = oy * stride - pad + u;
                                    const int ix = ox * stride - pad + v;
                                    if (iy < 0 || iy >= h || ix < 0 || ix >= ww) continue;
                                    gw.at4(o, i, u, v) += g * x.at4(s, i, iy, ix);
                                }
                    }
        return;
    }
    const std::size_t krows = (std::size_t)ic * kh * kw;
    const std::size_t ncols = (std::size_t)oh * ow;
    std::vector<float> cols(krows * ncols);
    for (int s = 0; s < n; ++s) {
        im2col(x.ptr() + (std::size_t)s * ic * h * ww, ic, h, ww, kh, kw, stride, pad,
               cols.data());
        // gw += gy * cols^T : (oc x krows)
        gemm(false, true, oc, (int)krows, (int)ncols, 1.0f,
             gy.ptr() + (std::size_t)s * oc * ncols, (int)ncols, cols.data(), (int)ncols,
             1.0f, gw.ptr(), (int)krows, Backend::parallel);
        if (gbias) {
            const float* gys = gy.ptr() + (std::size_t)s * oc * ncols;
#pragma omp parallel for schedule(static)
            for (int o = 0; o < oc; ++o) {
                double acc = 0.0;
                const float* go = gys + (std::size_t)o * ncols;
                for (std::size_t j = 0; j < ncols; ++j) acc += go[j];
                gbias[o] += (float)acc;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Image <-> blur-kernel convolutions
// ---------------------------------------------------------------------------

namespace {
inline int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}
} // namespace

void conv_circular_direct(const float* x, int c, int h, int w, const float* k, int kh,
                          int kw, float* y, Backend be) {
    const int cy = kh / 2, cx = kw / 2;
    const std::size_t plane = (std::size_t)h * w;
    for (int ch = 0; ch < c; ++ch) {
        const float* xc = x + plane * ch;
        float* yc = y + plane * ch;
#pragma omp parallel for schedule(static) if (be == Backend::parallel)
        for (int i = 0; i < h; ++i) {
            for (int j = 0; j < w; ++j) {
                double acc = 0.0;
                for (int u = 0; u < kh; ++u) {
                    const int iy = wrap(i - u + cy, h);
                    const float* xrow = xc + (std::size_t)iy * w;
                    const float* krow = k + (std::size_t)u * kw;
                    for (int v = 0; v < kw; ++v)
                        acc += (double)krow[v] * xrow[wrap(j - v + cx, w)];
                }
                yc[(std::size_t)i * w + j] = (float)acc;
            }
        }
    }
}

void conv_valid_direct(const float* x, int c, int h, int w, const float* k, int kh,
                       int kw, float* y, Backend be) {
    const int oh = h - kh + 1, ow = w - kw + 1;
    const std::size_t plane_in = (std::size_t)h * w;
    const std::size_t plane_out = (std::size_t)oh * ow;
    for (int ch = 0; ch < c; ++ch) {
        const float* xc = x + plane_in * ch;
        float* yc = y + plane_out * ch;
#pragma omp parallel for schedule(static) if (be == Backend::parallel)
        for (int i = 0; i < oh; ++i) {
            for (int j = 0; j < ow; ++j) {
                double acc = 0.0;
                for (int u = 0; u < kh; ++u) {
                    const float* xrow = xc + (std::size_t)(i + kh - 1 - u) * w + (j + kw - 1);
                    const float* krow = k + (std::size_t)u * kw;
                    for (int v = 0; v < kw; ++v) acc += (double)krow[v] * xrow[-v];
                }
                yc[(std::size_t)i * ow + j] = (float)acc;
            }
        }
    }
}

void conv_valid_adjoint_data(const float* gy, int c, int oh, int ow, const float* k,
                             int kh, int kw, float* gx, Backend be) {
    const int h = oh + kh - 1, w = ow + kw - 1;
    const std::size_t plane_in = (std::size_t)h * w;
    const std::size_t plane_out = (std::size_t)oh * ow;
    for (int ch = 0; ch < c; ++ch) {
        const float* gc = gy + plane_out * ch;
        float* xc = gx + plane_in * ch;
#pragma omp parallel for schedule(static) if (be == Backend::parallel)
        for (int a = 0; a < h; ++a) {
            for (int b = 0; b < w; ++b) {
                double acc = 0.0;
                for (int u = 0; u < kh; ++u) {
                    const int i = a - (kh - 1) + u;
                    if (i < 0 || i >= oh) continue;
                    const float* grow = gc + (std::size_t)i * ow;
                    const float* krow = k + (std::size_t)u * kw;
                    for (int v = 0; v < kw; ++v) {
                        const int j = b - (kw - 1) + v;
                        if (j < 0 || j >= ow) continue;
                        acc += (double)krow[v] * grow[j];
                    }
                }
                xc[(std::size_t)a * w + b] += (float)acc;
            }
        }
    }
}

void conv_valid_adjoint_kernel(const float* x, int c, int h, int w, const float* gy,
                               float* gk, int kh, int kw, Backend be) {
    const int oh = h - kh + 1, ow = w - kw + 1;
    const std::size_t plane_in = (std::size_t)h * w;
    const std::size_t plane_out = (std::size_t)oh * ow;
#pragma omp parallel for collapse(2) schedule(static) if (be == Backend::parallel)
    for (int u = 0; u < kh; ++u) {
        for (int v = 0; v < kw; ++v) {
            double acc = 0.0;
            for (int ch = 0; ch < c; ++ch) {
                const float* xc = x + plane_in * ch;
                const float* gc = gy + plane_out * ch;
                for (int i = 0; i < oh; ++i) {
                    const float* xrow = xc + (std::size_t)(i + kh - 1 - u) * w + (kw - 1 - v);
                    const float* grow = gc + (std::size_t)i * ow;
                    for (int j = 0; j < ow; ++j) acc += (double)grow[j] * xrow[j];
                }
            }
            gk[(std::size_t)u * kw + v] += (float)acc;
        }
    }
}

void conv_circular_adjoint_data(const float* gy, int c, int h, int w, const float* k,
                                int kh, int kw, float* gx, Backend be) {
    const int cy = kh / 2, cx = kw / 2;
    const std::size_t plane = (std::size_t)h * w;
    for (int ch = 0; ch < c; ++ch) {
        const float* gc = gy + plane * ch;
        float* xc = gx + plane * ch;
#pragma omp parallel for schedule(static) if (be == Backend::parallel)
        for (int a = 0; a < h; ++a) {
            for (int b = 0; b < w; ++b) {
                double acc = 0.0;
                for (int u = 0; u < kh; ++u) {
                    const int i = wrap(a + u - cy, h);
                    const float* grow = gc + (std::size_t)i * w;
                    const float* krow = k + (std::size_t)u * kw;
                    for (int v = 0; v < kw; ++v)
                        acc += (double)krow[v] * grow[wrap(b + v - cx, w)];
                }
                xc[(std::size_t)a * w + b] += (float)acc;
            }
        }
    }
}

void conv_circular_adjoint_kernel(const float* x, int c, int h, int w, const float* gy,
                                  float* gk, int kh, int kw, Backend be) {
    const int cy = kh / 2, cx = kw / 2;
    const std::size_t plane = (std::size_t)h * w;
#pragma omp parallel for collapse(2) schedule(static) if (be == Backend::parallel)
    for (int u = 0; u < kh; ++u) {
        for (int v = 0; v < kw; ++v) {
            double acc = 0.0;
            for (int ch = 0; ch < c; ++ch) {
                const float* xc = x + plane * ch;
                const float* gc = gy + plane * ch;
                for (int i = 0; i < h; ++i) {
                    const float* grow = gc + (std::size_t)i * w;
                    const float* xrow = xc + (std::size_t)wrap(i - u + cy, h) * w;
                    for (int j = 0; j < w; ++j)
                        acc += (double)grow[j] * xrow[wrap(j - v + cx, w)];
                }
            }
            gk[(std::size_t)u * kw + v] += (float)acc;
        }
    }
}

} // namespace glkm::kernels
