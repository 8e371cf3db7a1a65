#include "glkm/core/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

namespace glkm {

Image clamp01(Image im) {
    for (float& x : im.v) x = std::min(1.0f, std::max(0.0f, x));
    return im;
}

Image to_gray(const Image& im) {
    if (im.c == 1) return im;
    require(im.c == 3, "to_gray: expected 1 or 3 channels");
    Image g(im.h, im.w, 1);
    for (int y = 0; y < im.h; ++y)
        for (int x = 0; x < im.w; ++x)
            g.at(y, x) = 0.299f * im.at(y, x, 0) + 0.587f * im.at(y, x, 1) +
                         0.114f * im.at(y, x, 2);
    return g;
}

Image center_crop(const Image& im, int oh, int ow) {
    require(oh <= im.h && ow <= im.w, "center_crop: target larger than image");
    const int y0 = (im.h - oh) / 2, x0 = (im.w - ow) / 2;
    Image out(oh, ow, im.c);
    for (int ch = 0; ch < im.c; ++ch)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) out.at(y, x, ch) = im.at(y0 + y, x0 + x, ch);
    return out;
}

Image crop_border(const Image& im, int border) {
    require(2 * border < im.h && 2 * border < im.w, "crop_border: border too large");
    return center_crop(im, im.h - 2 * border, im.w - 2 * border);
}

namespace {
struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
} // namespace

Image load_png(const std::string& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    require_io(fp != nullptr, "load_png: cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    require_io(png, "load_png: png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        require_io(false, "load_png: png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        require_io(false, "load_png: decode error in " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const int w = (int)png_get_image_width(png, info);
    const int h = (int)png_get_image_height(png, info);
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int channels = (int)png_get_channels(png, info);
    require_io(channels == 1 || channels == 3, "load_png: unsupported channel count");

    std::vector<png_byte> rowbuf((std::size_t)w * channels);
    Image im(h, w, channels);
    for (int y = 0; y < h; ++y) {
        png_read_row(png, rowbuf.data(), nullptr);
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < channels; ++ch)
                im.at(y, x, ch) = rowbuf[(std::size_t)x * channels + ch] / 255.0f;
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return im;
}

void save_png(const Image& im, const std::string& path) {
    require(im.c == 1 || im.c == 3, "save_png: unsupported channel count");
    // Atomic write: temp file in the same directory, then rename.
    const std::string tmp = path + ".tmp";
    {
        std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(tmp.c_str(), "wb"));
        require_io(fp != nullptr, "save_png: cannot open " + tmp);

        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        require_io(png, "save_png: png_create_write_struct failed");
        png_infop info = png_create_info_struct(png);
        if (!info) {
            png_destroy_write_struct(&png, nullptr);
            require_io(false, "save_png: png_create_info_struct failed");
        }
        if (setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            require_io(false, "save_png: encode error for " + path);
        }
        png_init_io(png, fp.get());
        png_set_IHDR(png, info, (png_uint_32)im.w, (png_uint_32)im.h, 8,
                     im.c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);

        std::vector<png_byte> rowbuf((std::size_t)im.w * im.c);
        for (int y = 0; y < im.h; ++y) {
            for (int x = 0; x < im.w; ++x)
                for (int ch = 0; ch < im.c; ++ch) {
                    float v = std::min(1.0f, std::max(0.0f, im.at(y, x, ch)));
                    rowbuf[(std::size_t)x * im.c + ch] = (png_byte)std::lround(v * 255.0f);
                }
            png_write_row(png, rowbuf.data());
        }
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
    }
    std::filesystem::rename(tmp, path);
}

} // namespace glkm
