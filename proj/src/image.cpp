#include "clut/image.hpp"

#include <algorithm>
#include <cmath>

#include "clut/errors.hpp"
#include "clut/rng.hpp"

namespace clut {

bool all_finite(const Image& img) {
    for (double v : img.data)
        if (!std::isfinite(v)) return false;
    return true;
}

Image clamp01(const Image& img) {
    Image out = img;
    for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
    return out;
}

double max_abs_diff(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw InvalidArgument("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

Image random_image(int h, int w, Rng& rng) {
    Image img(h, w);
    for (double& v : img.data) v = rng.uniform();
    return img;
}

Image quantize8(const Image& img) {
    Image out = img;
    for (double& v : out.data) {
        v = std::clamp(v, 0.0, 1.0);
        v = std::round(v * 255.0) / 255.0;
    }
    return out;
}

} // namespace clut
