#include <cmath>

#include "glkm/ad/ops.hpp"
#include "glkm/core/kernels.hpp"

namespace glkm::ad {

namespace {

void accum(Node& dst, const Tensor& g) {
    Tensor& t = dst.ensure_grad();
    for (std::size_t i = 0; i < g.data.size(); ++i) t.data[i] += g.data[i];
}

NodePtr in(Node& n, std::size_t i) { return n.inputs[i]; }

} // namespace

// ----- elementwise ---------------------------------------------------------

Var add(const Var& a, const Var& b) {
    require(a.value().same_shape(b.value()), "add: shape mismatch");
    Tensor y(a.shape());
    for (std::size_t i = 0; i < y.data.size(); ++i)
        y.data[i] = a.value().data[i] + b.value().data[i];
    return make_op("add", std::move(y), {a, b}, [](Node& n) {
        if (in(n, 0)->requires_grad) accum(*in(n, 0), n.grad);
        if (in(n, 1)->requires_grad) accum(*in(n, 1), n.grad);
    });
}

Var sub(const Var& a, const Var& b) {
    require(a.value().same_shape(b.value()), "sub: shape mismatch");
    Tensor y(a.shape());
    for (std::size_t i = 0; i < y.data.size(); ++i)
        y.data[i] = a.value().data[i] - b.value().data[i];
    return make_op("sub", std::move(y), {a, b}, [](Node& n) {
        if (in(n, 0)->requires_grad) accum(*in(n, 0), n.grad);
        if (in(n, 1)->requires_grad) {
            Tensor& g = in(n, 1)->ensure_grad();
            for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] -= n.grad.data[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    require(a.value().same_shape(b.value()), "mul: shape mismatch");
    Tensor y(a.shape());
    for (std::size_t i = 0; i < y.data.size(); ++i)
        y.data[i] = a.value().data[i] * b.value().data[i];
    return make_op("mul", std::move(y), {a, b}, [](Node& n) {
        const Tensor& av = in(n, 0)->value;
        const Tensor& bv = in(n, 1)->value;
        if (in(n, 0)->requires_grad) {
            Tensor& g = in(n, 0)->ensure_grad();
            for (std::size_t i = 0; i < g.data.size(); ++i)
                g.data[i] += n.grad.data[i] * bv.data[i];
        }
        if (in(n, 1)->requires_grad) {
            Tensor& g = in(n, 1)->ensure_grad();
            for (std::size_t i = 0; i < g.data.size(); ++i)
                g.data[i] += n.grad.data[i] * av.data[i];
        }
    });
}

Var scale(const Var& a, float s) {
    Tensor y(a.shape());
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] = a.value().data[i] * s;
    return make_op("scale", std::move(y), {a}, [s](Node& n) {
        Tensor& g = in(n, 0)->ensure_grad();
        for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += n.grad.data[i] * s;
    });
}

Var add_scalar(const Var& a, float c) {
    Tensor y(a.shape());
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] = a.value().data[i] + c;
    return make_op("add_scalar", std::move(y), {a},
                   [](Node& n) { accum(*in(n, 0), n.grad); });
}

Var lincomb(float sa, const Var& a, float sb, const Var& b) {
    require(a.value().same_shape(b.value()), "lincomb: shape mismatch");
    Tensor y(a.shape());
    for (std::size_t i = 0; i < y.data.size(); ++i)
        y.data[i] = sa * a.value().data[i] + sb * b.value().data[i];
    return make_op("lincomb", std::move(y), {a, b}, [sa, sb](Node& n) {
        if (in(n, 0)->requires_grad) {
            Tensor& g = in(n, 0)->ensure_grad();
            for (std::size_t i = 0; i < g.data.size(); ++i)
                g.data[i] += sa * n.grad.data[i];
        }
        if (in(n, 1)->requires_grad) {
            Tensor& g = in(n, 1)->ensure_grad();
            for (std::size_t i = 0; i < g.data.size(); ++i)
                g.data[i] += sb * n.grad.data[i];
        }
    });
}

Var relu(const Var& a) {
    Tensor y(a.shape());
    for (std::size_t i = 0; i < y.data.size(); ++i)
        y.data[i] = a.value().data[i] > 0.0f ? a.value().data[i] : 0.0f;
    return make_op("relu", std::move(y), {a}, [](Node& n) {
        const Tensor& x = in(n, 0)->value;
        Tensor& g = in(n, 0)->ensure_grad();
        for (std::size_t i = 0; i < g.data.size(); ++i)
            if (x.data[i] > 0.0f) g.data[i] += n.grad.data[i];
    });
}

Var leaky_relu(const Var& a, float slope) {
    Tensor y(a.shape());
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        const float x = a.value().data[i];
        y.data[i] = x > 0.0f ? x : slope * x;
    }
    return make_op("leaky_relu", std::move(y), {a}, [slope](Node& n) {
        const Tensor& x = in(n, 0)->value;
        Tensor& g = in(n, 0)->ensure_grad();
        for (std::size_t i = 0; i < g.data.size(); ++i)
            g.data[i] += n.grad.data[i] * (x.data[i] > 0.0f ? 1.0f : slope);
    });
}

Var sigmoid(const Var& a) {
    Tensor y(a.shape());
    for (std::size_t i = 0; i < y.data.size(); ++i)
        y.data[i] = 1.0f / (1.0f + std::exp(-a.value().data[i]));
    return make_op("sigmoid", std::move(y), {a}, [](Node& n) {
        Tensor& g = in(n, 0)->ensure_grad();
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            const float s = n.value.data[i];
            g.data[i] += n.grad.data[i] * s * (1.0f - s);
        }
    });
}

Var tanh_op(const Var& a) {
    Tensor y(a.shape());
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] = std::tanh(a.value().data[i]);
    return make_op("tanh", std::move(y), {a}, [](Node& n) {
        Tensor& g = in(n, 0)->ensure_grad();
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            const float t = n.value.data[i];
            g.data[i] += n.grad.data[i] * (1.0f - t * t);
        }
    });
}

Var silu(const Var& a) {
    Tensor y(a.shape());
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        const float x = a.value().data[i];
        y.data[i] = x / (1.0f + std::exp(-x));
    }
    return make_op("silu", std::move(y), {a}, [](Node& n) {
        const Tensor& x = in(n, 0)->value;
        Tensor& g = in(n, 0)->ensure_grad();
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            const float s = 1.0f / (1.0f + std::exp(-x.data[i]));
            g.data[i] += n.grad.data[i] * (s + x.data[i] * s * (1.0f - s));
        }
    });
}

Var mul_map(const Var& a, const Tensor& m) {
    const std::size_t plane = m.numel();
    require(a.value().numel() % plane == 0, "mul_map: map does not tile input");
    Tensor y(a.shape());
    const std::size_t reps = y.data.size() / plane;
    for (std::size_t r = 0; r < reps; ++r)
        for (std::size_t i = 0; i < plane; ++i)
            y.data[r * plane + i] = a.value().data[r * plane + i] * m.data[i];
    Tensor map = m;
    return make_op("mul_map", std::move(y), {a}, [map, plane](Node& n) {
        Tensor& g = in(n, 0)->ensure_grad();
        const std::size_t reps = g.data.size() / plane;
        for (std::size_t r = 0; r < reps; ++r)
            for (std::size_t i = 0; i < plane; ++i)
                g.data[r * plane + i] += n.grad.data[r * plane + i] * map.data[i];
    });
}

// ----- shape ----------------------------------------------------------------

Var reshape(const Var& a, std::vector<int> shape) {
    Tensor y = a.value().reshaped(std::move(shape));
    return make_op("reshape", std::move(y), {a}, [](Node& n) {
        Tensor& g = in(n, 0)->ensure_grad();
        for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += n.grad.data[i];
    });
}

Var crop2d(const Var& a, int top, int left, int oh, int ow) {
    const int N = a.shape()[0], C = a.shape()[1], H = a.shape()[2], W = a.shape()[3];
    require(top >= 0 && left >= 0 && top + oh <= H && left + ow <= W, "crop2d: out of range");
    Tensor y({N, C, oh, ow});
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int i = 0; i < oh; ++i)
                for (int j = 0; j < ow; ++j)
                    y.at4(n, c, i, j) = a.value().at4(n, c, top + i, left + j);
    return make_op("crop2d", std::move(y), {a}, [top, left](Node& n) {
        Tensor& g = in(n, 0)->ensure_grad();
        const int N = n.value.shape[0], C = n.value.shape[1];
        const int oh = n.value.shape[2], ow = n.value.shape[3];
        for (int s = 0; s < N; ++s)
            for (int c = 0; c < C; ++c)
                for (int i = 0; i < oh; ++i)
                    for (int j = 0; j < ow; ++j)
                        g.at4(s, c, top + i, left + j) += n.grad.at4(s, c, i, j);
    });
}

Var pad2d(const Var& a, int top, int left, int bottom, int right) {
    const int N = a.shape()[0], C = a.shape()[1], H = a.shape()[2], W = a.shape()[3];
    Tensor y({N, C, H + top + bottom, W + left + right});
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int i = 0; i < H; ++i)
                for (int j = 0; j < W; ++j)
                    y.at4(n, c, top + i, left + j) = a.value().at4(n, c, i, j);
    return make_op("pad2d", std::move(y), {a}, [top, left](Node& n) {
        Tensor& g = in(n, 0)->ensure_grad();
        const int N = g.shape[0], C = g.shape[1], H = g.shape[2], W = g.shape[3];
        for (int s = 0; s < N; ++s)
            for (int c = 0; c < C; ++c)
                for (int i = 0; i < H; ++i)
                    for (int j = 0; j < W; ++j)
                        g.at4(s, c, i, j) += n.grad.at4(s, c, top + i, left + j);
    });
}

Var concat_channels(const Var& a, const Var& b) {
    const int N = a.shape()[0], Ca = a.shape()[1], H = a.shape()[2], W = a.shape()[3];
    const int Cb = b.shape()[1];
    require(b.shape()[0] == N && b.shape()[2] == H && b.shape()[3] == W,
            "concat_channels: spatial/batch mismatch");
    Tensor y({N, Ca + Cb, H, W});
    const std::size_t plane = (std::size_t)H * W;
    for (int n = 0; n < N; ++n) {
        std::copy_n(a.value().ptr() + (std::size_t)n * Ca * plane, Ca * plane,
                    y.ptr() + (std::size_t)n * (Ca + Cb) * plane);
        std::copy_n(b.value().ptr() + (std::size_t)n * Cb * plane, Cb * plane,
                    y.ptr() + ((std::size_t)n * (Ca + Cb) + Ca) * plane);
    }
    return make_op("concat", std::move(y), {a, b}, [Ca, Cb, plane](Node& n) {
        const int N = n.value.shape[0];
        if (in(n, 0)->requires_grad) {
            Tensor& g = in(n, 0)->ensure_grad();
            for (int s = 0; s < N; ++s) {
                const float* src = n.grad.ptr() + (std::size_t)s * (Ca + Cb) * plane;
                float* dst = g.ptr() + (std::size_t)s * Ca * plane;
                for (std::size_t i = 0; i < (std::size_t)Ca * plane; ++i) dst[i] += src[i];
            }
        }
        if (in(n, 1)->requires_grad) {
            Tensor& g = in(n, 1)->ensure_grad();
            for (int s = 0; s < N; ++s) {
                const float* src =
                    n.grad.ptr() + ((std::size_t)s * (Ca + Cb) + Ca) * plane;
                float* dst = g.ptr() + (std::size_t)s * Cb * plane;
                for (std::size_t i = 0; i < (std::size_t)Cb * plane; ++i) dst[i] += src[i];
            }
        }
    });
}

Var detach(const Var& a) { return Var::constant(a.value()); }

// ----- linear algebra -------------------------------------------------------

Var matmul(const Var& x, const Var& w) {
    const int N = x.shape()[0], I = x.shape()[1];
    require(w.shape()[0] == I, "matmul: inner dim mismatch");
    const int O = w.shape()[1];
    Tensor y({N, O});
    kernels::gemm(false, false, N, O, I, 1.0f, x.value().ptr(), I, w.value().ptr(), O,
                  0.0f, y.ptr(), O);
    return make_op("matmul", std::move(y), {x, w}, [N, I, O](Node& n) {
        const Tensor& xv = in(n, 0)->value;
        const Tensor& wv = in(n, 1)->value;
        if (in(n, 0)->requires_grad) { // gx = g * W^T
            Tensor& g = in(n, 0)->ensure_grad();
            kernels::gemm(false, true, N, I, O, 1.0f, n.grad.ptr(), O, wv.ptr(), O, 1.0f,
                          g.ptr(), I);
        }
        if (in(n, 1)->requires_grad) { // gw = X^T * g
            Tensor& g = in(n, 1)->ensure_grad();
            kernels::gemm(true, false, I, O, N, 1.0f, xv.ptr(), I, n.grad.ptr(), O, 1.0f,
                          g.ptr(), O);
        }
    });
}

Var add_rowvec(const Var& x, const Var& b) {
    const int N = x.shape()[0], O = x.shape()[1];
    require(b.value().numel() == (std::size_t)O, "add_rowvec: size mismatch");
    Tensor y(x.shape());
    for (int n = 0; n < N; ++n)
        for (int o = 0; o < O; ++o) y.at2(n, o) = x.value().at2(n, o) + b.value().data[o];
    return make_op("add_rowvec", std::move(y), {x, b}, [N, O](Node& n) {
        if (in(n, 0)->requires_grad) accum(*in(n, 0), n.grad);
        if (in(n, 1)->requires_grad) {
            Tensor& g = in(n, 1)->ensure_grad();
            for (int o = 0; o < O; ++o) {
                double acc = 0.0;
                for (int s = 0; s < N; ++s) acc += n.grad.at2(s, o);
                g.data[o] += (float)acc;
            }
        }
    });
}

Var add_channel_bias(const Var& x, const Var& b) {
    const int N = x.shape()[0], C = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
    require(b.shape()[0] == N && b.shape()[1] == C, "add_channel_bias: shape mismatch");
    Tensor y(x.shape());
    const std::size_t plane = (std::size_t)H * W;
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const float bias = b.value().at2(n, c);
            const float* src = x.value().ptr() + ((std::size_t)n * C + c) * plane;
            float* dst = y.ptr() + ((std::size_t)n * C + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] + bias;
        }
    return make_op("add_channel_bias", std::move(y), {x, b}, [plane](Node& n) {
        const int N = n.value.shape[0], C = n.value.shape[1];
        if (in(n, 0)->requires_grad) accum(*in(n, 0), n.grad);
        if (in(n, 1)->requires_grad) {
            Tensor& g = in(n, 1)->ensure_grad();
            for (int s = 0; s < N; ++s)
                for (int c = 0; c < C; ++c) {
                    const float* src = n.grad.ptr() + ((std::size_t)s * C + c) * plane;
                    double acc = 0.0;
                    for (std::size_t i = 0; i < plane; ++i) acc += src[i];
                    g.at2(s, c) += (float)acc;
                }
        }
    });
}

// ----- reductions / losses --------------------------------------------------

Var sum_sq(const Var& a) {
    double acc = 0.0;
    for (float v : a.value().data) acc += (double)v * v;
    Tensor y({1});
    y.data[0] = (float)acc;
    return make_op("sum_sq", std::move(y), {a}, [](Node& n) {
        const float g = n.grad.data[0];
        const Tensor& x = in(n, 0)->value;
        Tensor& gx = in(n, 0)->ensure_grad();
        for (std::size_t i = 0; i < gx.data.size(); ++i)
            gx.data[i] += 2.0f * g * x.data[i];
    });
}

Var l1_norm(const Var& a) {
    double acc = 0.0;
    for (float v : a.value().data) acc += std::fabs((double)v);
    Tensor y({1});
    y.data[0] = (float)acc;
    return make_op("l1_norm", std::move(y), {a}, [](Node& n) {
        const float g = n.grad.data[0];
        const Tensor& x = in(n, 0)->value;
        Tensor& gx = in(n, 0)->ensure_grad();
        for (std::size_t i = 0; i < gx.data.size(); ++i) {
            if (x.data[i] > 0.0f)
                gx.data[i] += g;
            else if (x.data[i] < 0.0f)
                gx.data[i] -= g;
        }
    });
}

Var mean_all(const Var& a) {
    double acc = 0.0;
    for (float v : a.value().data) acc += v;
    const double inv = 1.0 / (double)a.value().numel();
    Tensor y({1});
    y.data[0] = (float)(acc * inv);
    return make_op("mean_all", std::move(y), {a}, [inv](Node& n) {
        const float g = n.grad.data[0] * (float)inv;
        Tensor& gx = in(n, 0)->ensure_grad();
        for (std::size_t i = 0; i < gx.data.size(); ++i) gx.data[i] += g;
    });
}

Var bce_with_logits(const Var& logits, const Tensor& labels) {
    require(logits.value().numel() == labels.numel(), "bce_with_logits: size mismatch");
    const std::size_t n = labels.numel();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = logits.value().data[i];
        const double t = labels.data[i];
        // log(1+exp(-|z|)) + max(z,0) - z*t, the stable form
        acc += std::log1p(std::exp(-std::fabs(z))) + std::max(z, 0.0) - z * t;
    }
    Tensor y({1});
    y.data[0] = (float)(acc / (double)n);
    Tensor lab = labels;
    return make_op("bce_with_logits", std::move(y), {logits}, [lab, n](Node& nd) {
        const float g = nd.grad.data[0] / (float)n;
        const Tensor& z = in(nd, 0)->value;
        Tensor& gx = in(nd, 0)->ensure_grad();
        for (std::size_t i = 0; i < n; ++i) {
            const float s = 1.0f / (1.0f + std::exp(-z.data[i]));
            gx.data[i] += g * (s - lab.data[i]);
        }
    });
}

Var softmax_rows(const Var& x) {
    const int N = x.shape()[0], D = x.shape()[1];
    Tensor y(x.shape());
    for (int n = 0; n < N; ++n) {
        const float* row = x.value().ptr() + (std::size_t)n * D;
        float mx = row[0];
        for (int i = 1; i < D; ++i) mx = std::max(mx, row[i]);
        double sum = 0.0;
        float* out = y.ptr() + (std::size_t)n * D;
        for (int i = 0; i < D; ++i) {
            out[i] = std::exp(row[i] - mx);
            sum += out[i];
        }
        const float inv = (float)(1.0 / sum);
        for (int i = 0; i < D; ++i) out[i] *= inv;
    }
    return make_op("softmax", std::move(y), {x}, [N, D](Node& n) {
        Tensor& gx = in(n, 0)->ensure_grad();
        for (int s = 0; s < N; ++s) {
            const float* yv = n.value.ptr() + (std::size_t)s * D;
            const float* gy = n.grad.ptr() + (std::size_t)s * D;
            double dot = 0.0;
            for (int i = 0; i < D; ++i) dot += (double)gy[i] * yv[i];
            float* gr = gx.ptr() + (std::size_t)s * D;
            for (int i = 0; i < D; ++i) gr[i] += yv[i] * (gy[i] - (float)dot);
        }
    });
}

} // namespace glkm::ad
