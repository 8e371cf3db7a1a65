#pragma once

#include <string>
#include <vector>

#include "glkm/core/common.hpp"
#include "glkm/core/tensor.hpp"

namespace glkm {

/// Float image in [0,1], planar channel layout (c,h,w). Values are clamped to
/// [0,1] only when writing final outputs, never inside optimization loops.
struct Image {
    int h = 0, w = 0, c = 1;
    std::vector<float> v;

    Image() = default;
    Image(int h_, int w_, int c_ = 1) : h(h_), w(w_), c(c_), v((std::size_t)h_ * w_ * c_, 0.0f) {}

    float& at(int y, int x, int ch = 0) {
        return v[((std::size_t)ch * h + y) * w + x];
    }
    float at(int y, int x, int ch = 0) const {
        return v[((std::size_t)ch * h + y) * w + x];
    }
    std::size_t numel() const { return v.size(); }

    Tensor to_tensor() const { // (1,c,h,w)
        Tensor t({1, c, h, w});
        t.data = v;
        return t;
    }
    static Image from_tensor(const Tensor& t) { // accepts (c,h,w) or (1,c,h,w)
        Image im;
        if (t.ndim() == 4) {
            require(t.dim(0) == 1, "Image::from_tensor: batch must be 1");
            im.c = t.dim(1); im.h = t.dim(2); im.w = t.dim(3);
        } else {
            require(t.ndim() == 3, "Image::from_tensor: expect 3D or 4D tensor");
            im.c = t.dim(0); im.h = t.dim(1); im.w = t.dim(2);
        }
        im.v = t.data;
        return im;
    }
};

Image clamp01(Image im);
Image to_gray(const Image& im); // BT.601 luminance for 3-channel input
Image center_crop(const Image& im, int oh, int ow);
Image crop_border(const Image& im, int border);

/// 8-bit PNG I/O (grayscale or RGB). Load maps to [0,1]; save rounds after
/// clamping.
Image load_png(const std::string& path);
void save_png(const Image& im, const std::string& path);

} // namespace glkm
