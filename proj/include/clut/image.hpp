#pragma once

#include <cstddef>
#include <vector>

namespace clut {

class Rng;

// H x W x 3 image, row-major with channel fastest. Values are nominally RGB
// in [0, 1]; intermediate results of differentiable pipelines may leave that
// range and are clamped only at the final output.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, double fill = 0.0)
        : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, fill) {}

    double& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }

    std::size_t value_count() const { return data.size(); }
    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width;
    }
};

bool all_finite(const Image& img);
Image clamp01(const Image& img);
double max_abs_diff(const Image& a, const Image& b);

// Uniform noise image in [0, 1).
Image random_image(int h, int w, Rng& rng);

// 8-bit quantization on the [0, 1] grid (round(v * 255) / 255, clamped first).
Image quantize8(const Image& img);

} // namespace clut
