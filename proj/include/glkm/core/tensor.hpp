#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "glkm/core/common.hpp"

namespace glkm {

/// Dense row-major float tensor. Shape conventions used across the project:
/// (N,D) for vectors, (N,C,H,W) for feature maps, (h,w) for plain 2D arrays.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(count(shape), 0.0f) {}
    Tensor(std::vector<int> s, float fill) : shape(std::move(s)), data(count(shape), fill) {}

    static std::size_t count(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) n *= static_cast<std::size_t>(d);
        return n;
    }
    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<int> s, float v) { return Tensor(std::move(s), v); }

    std::size_t numel() const { return data.size(); }
    int ndim() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

    float* ptr() { return data.data(); }
    const float* ptr() const { return data.data(); }

    float& operator[](std::size_t i) { return data[i]; }
    float operator[](std::size_t i) const { return data[i]; }

    // 4D accessor for (N,C,H,W) tensors.
    float& at4(int n, int c, int y, int x) {
        const std::size_t C = shape[1], H = shape[2], W = shape[3];
        return data[((static_cast<std::size_t>(n) * C + c) * H + y) * W + x];
    }
    float at4(int n, int c, int y, int x) const {
        const std::size_t C = shape[1], H = shape[2], W = shape[3];
        return data[((static_cast<std::size_t>(n) * C + c) * H + y) * W + x];
    }
    float& at2(int i, int j) { return data[static_cast<std::size_t>(i) * shape[1] + j]; }
    float at2(int i, int j) const { return data[static_cast<std::size_t>(i) * shape[1] + j]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    Tensor reshaped(std::vector<int> s) const {
        require(count(s) == numel(), "reshape: element count mismatch");
        Tensor t;
        t.shape = std::move(s);
        t.data = data;
        return t;
    }

    void fill(float v) { std::fill(data.begin(), data.end(), v); }
};

inline bool all_finite(const Tensor& t) {
    for (float v : t.data)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace glkm
