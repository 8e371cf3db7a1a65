#pragma once

#include <string>
#include <vector>

#include "glkm/core/common.hpp"
#include "glkm/core/tensor.hpp"

namespace glkm {

/// Blur kernel: non-negative taps summing to 1 (within 1e-6).
struct Kernel {
    int h = 0, w = 0;
    std::vector<float> v;

    Kernel() = default;
    Kernel(int h_, int w_) : h(h_), w(w_), v((std::size_t)h_ * w_, 0.0f) {}

    float& at(int y, int x) { return v[(std::size_t)y * w + x]; }
    float at(int y, int x) const { return v[(std::size_t)y * w + x]; }
    std::size_t numel() const { return v.size(); }
};

/// Delta kernel with the unit tap at (size/2, size/2).
Kernel delta_kernel(int size);

bool kernel_valid(const Kernel& k, float tol = 1e-6f);
void require_kernel(const Kernel& k);

/// Rescale to unit mass; all-zero input becomes a delta.
Kernel normalize_kernel(Kernel k);

double kernel_l1(const Kernel& a, const Kernel& b);

// ---------------------------------------------------------------------------
// KERN file format, little-endian throughout:
//   single: magic "KERN" | u16 version=1 | u32 h | u32 w | h*w f32 row-major
//   batch:  magic "KERN" | u16 version=1 | u32 count | count * (u32 h | u32 w | f32...)
// Writes are atomic (temp file + rename).
// ---------------------------------------------------------------------------
void save_kern(const Kernel& k, const std::string& path);
Kernel load_kern(const std::string& path);
void save_kern_batch(const std::vector<Kernel>& ks, const std::string& path);
std::vector<Kernel> load_kern_batch(const std::string& path);

} // namespace glkm
