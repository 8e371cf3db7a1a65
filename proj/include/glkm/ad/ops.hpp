#pragma once

#include "glkm/ad/graph.hpp"

namespace glkm::ad {

// ----- elementwise ---------------------------------------------------------
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, float s);
Var add_scalar(const Var& a, float c);
/// y = sa*a + sb*b (same shapes).
Var lincomb(float sa, const Var& a, float sb, const Var& b);

Var relu(const Var& a);
Var leaky_relu(const Var& a, float slope);
Var sigmoid(const Var& a);
Var tanh_op(const Var& a);
Var silu(const Var& a);

/// Elementwise multiply by a constant map; m broadcasts over leading dims
/// when m matches the trailing (h,w) of a.
Var mul_map(const Var& a, const Tensor& m);

// ----- shape ----------------------------------------------------------------
Var reshape(const Var& a, std::vector<int> shape);
Var crop2d(const Var& a, int top, int left, int oh, int ow);      // NCHW
Var pad2d(const Var& a, int top, int left, int bottom, int right); // zero pad
Var concat_channels(const Var& a, const Var& b);
Var detach(const Var& a);

// ----- linear algebra -------------------------------------------------------
Var matmul(const Var& x, const Var& w);     // (N,I)x(I,O)
Var add_rowvec(const Var& x, const Var& b); // (N,O)+(O)
/// y[n,c,:,:] += b[n,c]; b shape (N,C).
Var add_channel_bias(const Var& x, const Var& b);

// ----- reductions / losses --------------------------------------------------
Var sum_sq(const Var& a);   // sum of squares, scalar
Var l1_norm(const Var& a);  // sum of |.|, scalar
Var mean_all(const Var& a); // scalar
/// Mean of BCE-with-logits over all elements; labels constant.
Var bce_with_logits(const Var& logits, const Tensor& labels);

Var softmax_rows(const Var& x); // (N,D) row-wise softmax

// ----- convolution / pooling -----------------------------------------------
/// NN conv, weight (OC,IC,kh,kw), bias optional (pass undefined Var).
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
/// Transposed conv, weight (IC,OC,kh,kw), output (N,OC,(H-1)s-2p+kh,...).
Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride, int pad);

Var maxpool2d(const Var& x, int k, int stride, int pad);
Var global_avgpool(const Var& x); // (N,C,H,W)->(N,C)
Var resize_bilinear(const Var& x, int oh, int ow);
Var upsample_nearest2(const Var& x);

// ----- normalization --------------------------------------------------------
/// BatchNorm over (N,H,W) per channel. In training mode batch statistics are
/// used and running stats updated in place; in eval mode running stats are
/// read only (safe for concurrent frozen-model readers).
Var batchnorm2d(const Var& x, const Var& gamma, const Var& beta, Tensor& running_mean,
                Tensor& running_var, bool training, float momentum = 0.1f,
                float eps = 1e-5f);
Var groupnorm(const Var& x, const Var& gamma, const Var& beta, int groups,
              float eps = 1e-5f);

// ----- blur-model convolution ----------------------------------------------
enum class ConvMode { circular, valid };

/// Image (C,H,W) convolved with kernel (kh,kw), differentiable in both.
/// Circular keeps (C,H,W); valid yields (C,H-kh+1,W-kw+1).
Var conv_image(const Var& x, const Var& k, ConvMode mode);

} // namespace glkm::ad
