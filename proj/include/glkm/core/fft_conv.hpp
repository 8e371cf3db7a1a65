#pragma once

#include "glkm/core/parallel.hpp"

namespace glkm::fft {

/// Circular convolution of a (c,h,w) planar image with a (kh,kw) tap grid via
/// FFTW (double precision internally). Same tap convention as
/// kernels::conv_circular_direct: y[i,j] = sum k[u,v] x[(i-u+kh/2)%h, (j-v+kw/2)%w].
void conv_circular(const float* x, int c, int h, int w, const float* k, int kh, int kw,
                   float* y);

/// Circular cross-correlation of two (h,w) planes, result[dy,dx] =
/// sum_{i,j} a[i,j] * b[(i+dy)%h, (j+dx)%w]. Used for kernel alignment.
void xcorr_circular(const float* a, const float* b, int h, int w, float* out);

} // namespace glkm::fft
