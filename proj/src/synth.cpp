#include "clut/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "clut/errors.hpp"
#include "clut/png_io.hpp"
#include "clut/rng.hpp"

namespace clut {

Lut3D synthetic_grade_lut(int dim) {
    Lut3D lut(dim);
    const double s = 1.0 / (dim - 1);
    for (int b = 0; b < dim; ++b)
        for (int g = 0; g < dim; ++g)
            for (int r = 0; r < dim; ++r) {
                const double rv = r * s, gv = g * s, bv = b * s;
                lut.at(r, g, b, 0) = 0.08 + 0.80 * rv + 0.08 * gv;
                lut.at(r, g, b, 1) = 0.06 + 0.82 * gv + 0.06 * bv;
                lut.at(r, g, b, 2) = 0.10 + 0.72 * bv + 0.06 * rv;
            }
    return lut;
}

Image synthetic_image(int height, int width, std::uint64_t seed) {
    Rng rng(Rng::mix(seed, 0x73796e7468ULL));
    Image img(height, width);
    double base[3], gx[3], gy[3];
    for (int c = 0; c < 3; ++c) {
        base[c] = rng.uniform(0.15, 0.65);
        gx[c] = rng.uniform(-0.5, 0.5);
        gy[c] = rng.uniform(-0.5, 0.5);
    }
    struct Blob {
        double cy, cx, sigma, amp[3];
    };
    std::vector<Blob> blobs(4);
    for (auto& bl : blobs) {
        bl.cy = rng.uniform(0.0, height);
        bl.cx = rng.uniform(0.0, width);
        bl.sigma = rng.uniform(0.12, 0.35) * std::min(height, width);
        for (int c = 0; c < 3; ++c) bl.amp[c] = rng.uniform(-0.35, 0.35);
    }
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double px[3];
            for (int c = 0; c < 3; ++c)
                px[c] = base[c] + gx[c] * (static_cast<double>(x) / width) +
                        gy[c] * (static_cast<double>(y) / height);
            for (const auto& bl : blobs) {
                const double d2 = (y - bl.cy) * (y - bl.cy) + (x - bl.cx) * (x - bl.cx);
                const double w = std::exp(-d2 / (2.0 * bl.sigma * bl.sigma));
                for (int c = 0; c < 3; ++c) px[c] += bl.amp[c] * w;
            }
            for (int c = 0; c < 3; ++c)
                img.at(y, x, c) = std::clamp(px[c] + 0.03 * rng.normal(), 0.0, 1.0);
        }
    return img;
}

std::vector<std::pair<Image, Image>> synthetic_pairs(int count, int size,
                                                     std::uint64_t seed, int lut_dim) {
    const Lut3D grade = synthetic_grade_lut(lut_dim);
    std::vector<std::pair<Image, Image>> pairs;
    pairs.reserve(count);
    for (int i = 0; i < count; ++i) {
        Image input = synthetic_image(size, size, Rng::mix(seed, i));
        Image target = apply_lut(grade, input);
        pairs.emplace_back(std::move(input), std::move(target));
    }
    return pairs;
}

void write_synthetic_dataset(const std::filesystem::path& root, int count, int size,
                             std::uint64_t seed, int lut_dim) {
    std::filesystem::create_directories(root / "input");
    std::filesystem::create_directories(root / "target");
    const auto pairs = synthetic_pairs(count, size, seed, lut_dim);
    for (int i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%04d.png", i);
        write_png(pairs[i].first, root / "input" / name);
        write_png(pairs[i].second, root / "target" / name);
    }
}

} // namespace clut
