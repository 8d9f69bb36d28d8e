#include "clut/lut3d.hpp"

#include <algorithm>
#include <cmath>

#include "clut/errors.hpp"

namespace clut {

void Lut3D::validate() const {
    if (dim < 2) throw InvalidArgument("Lut3D: dim must be >= 2");
    if (data.size() != static_cast<std::size_t>(dim) * dim * dim * 3)
        throw InvalidArgument("Lut3D: entry count does not match dim");
    if (!(std::isfinite(domain_max) && domain_max > 0.0))
        throw InvalidArgument("Lut3D: domain_max must be finite and positive");
    for (double v : data)
        if (!std::isfinite(v)) throw InvalidArgument("Lut3D: non-finite entry");
}

Lut3D identity_lut(int dim, double domain_max) {
    if (dim < 2) throw InvalidArgument("identity_lut: dim must be >= 2");
    Lut3D lut(dim, domain_max);
    const double s = domain_max / (dim - 1);
    for (int b = 0; b < dim; ++b)
        for (int g = 0; g < dim; ++g)
            for (int r = 0; r < dim; ++r) {
                lut.at(r, g, b, 0) = r * s;
                lut.at(r, g, b, 1) = g * s;
                lut.at(r, g, b, 2) = b * s;
            }
    return lut;
}

LatticeCoord map_coordinates(double r, double g, double b, const Lut3D& lut) {
    const double s = lut.domain_max / (lut.dim - 1);
    auto mapc = [&](double v) {
        v = std::clamp(v, 0.0, lut.domain_max);
        return v / s;
    };
    return {mapc(r), mapc(g), mapc(b)};
}

namespace {

struct Cell {
    int i0, j0, k0;
    double fx, fy, fz;
};

// Cell containing the coordinate; the top lattice plane maps to the last
// interior cell with fraction 1 so node queries stay exact.
inline Cell locate(const LatticeCoord& c, int dim) {
    auto split = [dim](double v, int& i0, double& f) {
        i0 = static_cast<int>(v);
        if (i0 > dim - 2) i0 = dim - 2;
        if (i0 < 0) i0 = 0;
        f = v - i0;
    };
    Cell cell;
    split(c.x, cell.i0, cell.fx);
    split(c.y, cell.j0, cell.fy);
    split(c.z, cell.k0, cell.fz);
    return cell;
}

inline void corner_weights(const Cell& c, double w[8]) {
    const double gx = 1.0 - c.fx, gy = 1.0 - c.fy, gz = 1.0 - c.fz;
    w[0] = gx * gy * gz;
    w[1] = c.fx * gy * gz;
    w[2] = gx * c.fy * gz;
    w[3] = c.fx * c.fy * gz;
    w[4] = gx * gy * c.fz;
    w[5] = c.fx * gy * c.fz;
    w[6] = gx * c.fy * c.fz;
    w[7] = c.fx * c.fy * c.fz;
}

inline void corner_indices(const Lut3D& lut, const Cell& c, std::size_t idx[8]) {
    idx[0] = lut.index(c.i0, c.j0, c.k0, 0);
    idx[1] = lut.index(c.i0 + 1, c.j0, c.k0, 0);
    idx[2] = lut.index(c.i0, c.j0 + 1, c.k0, 0);
    idx[3] = lut.index(c.i0 + 1, c.j0 + 1, c.k0, 0);
    idx[4] = lut.index(c.i0, c.j0, c.k0 + 1, 0);
    idx[5] = lut.index(c.i0 + 1, c.j0, c.k0 + 1, 0);
    idx[6] = lut.index(c.i0, c.j0 + 1, c.k0 + 1, 0);
    idx[7] = lut.index(c.i0 + 1, c.j0 + 1, c.k0 + 1, 0);
}

inline void interp_pixel(const Lut3D& lut, const double* px, double* out) {
    LatticeCoord coord = map_coordinates(px[0], px[1], px[2], lut);
    Cell cell = locate(coord, lut.dim);
    double w[8];
    std::size_t idx[8];
    corner_weights(cell, w);
    corner_indices(lut, cell, idx);
    for (int ch = 0; ch < 3; ++ch) {
        double acc = 0.0;
        for (int k = 0; k < 8; ++k) acc += w[k] * lut.data[idx[k] + ch];
        out[ch] = acc;
    }
}

void check_inputs(const Lut3D& lut, const Image& img) {
    lut.validate();
    if (!all_finite(img)) throw InvalidArgument("apply_lut: non-finite pixel value");
}

} // namespace

Image apply_lut_raw(const Lut3D& lut, const Image& img) {
    check_inputs(lut, img);
    Image out(img.height, img.width);
    const std::int64_t n = static_cast<std::int64_t>(img.height) * img.width;
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < n; ++p)
        interp_pixel(lut, &img.data[p * 3], &out.data[p * 3]);
    return out;
}

Image apply_lut(const Lut3D& lut, const Image& img) {
    Image out = apply_lut_raw(lut, img);
    for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
    return out;
}

void apply_lut_backward_entries(const Lut3D& lut, const Image& img,
                                const Image& grad_out,
                                std::vector<double>& grad_entries) {
    check_inputs(lut, img);
    if (!img.same_shape(grad_out))
        throw InvalidArgument("apply_lut_backward_entries: shape mismatch");
    if (grad_entries.size() != lut.data.size())
        throw InvalidArgument("apply_lut_backward_entries: gradient size mismatch");
    const std::int64_t n = static_cast<std::int64_t>(img.height) * img.width;
    for (std::int64_t p = 0; p < n; ++p) {
        LatticeCoord coord =
            map_coordinates(img.data[p * 3], img.data[p * 3 + 1], img.data[p * 3 + 2], lut);
        Cell cell = locate(coord, lut.dim);
        double w[8];
        std::size_t idx[8];
        corner_weights(cell, w);
        corner_indices(lut, cell, idx);
        for (int ch = 0; ch < 3; ++ch) {
            const double g = grad_out.data[p * 3 + ch];
            for (int k = 0; k < 8; ++k) grad_entries[idx[k] + ch] += w[k] * g;
        }
    }
}

Lut3D blend_luts(std::span<const Lut3D> luts, std::span<const double> weights) {
    if (luts.size() != 3 || weights.size() != 3)
        throw InvalidArgument("blend_luts: expected exactly 3 LUTs and 3 weights");
    for (const Lut3D& l : luts) {
        l.validate();
        if (l.dim != luts[0].dim || l.domain_max != luts[0].domain_max)
            throw InvalidArgument("blend_luts: LUTs must share dim and domain_max");
    }
    for (double w : weights)
        if (!std::isfinite(w)) throw InvalidArgument("blend_luts: non-finite weight");
    Lut3D out(luts[0].dim, luts[0].domain_max);
    const std::int64_t n = static_cast<std::int64_t>(out.data.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        out.data[i] = weights[0] * luts[0].data[i] + weights[1] * luts[1].data[i] +
                      weights[2] * luts[2].data[i];
    return out;
}

void blend_luts_backward(std::span<const Lut3D> luts,
                         std::span<const double> weights,
                         const std::vector<double>& grad_blend,
                         std::span<double> grad_weights,
                         std::span<std::vector<double>*> grad_entries) {
    if (luts.size() != 3 || weights.size() != 3 || grad_weights.size() != 3)
        throw InvalidArgument("blend_luts_backward: expected exactly 3 of each");
    if (grad_blend.size() != luts[0].data.size())
        throw InvalidArgument("blend_luts_backward: gradient size mismatch");
    for (int k = 0; k < 3; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < grad_blend.size(); ++i)
            acc += grad_blend[i] * luts[k].data[i];
        grad_weights[k] += acc;
    }
    if (!grad_entries.empty()) {
        if (grad_entries.size() != 3)
            throw InvalidArgument("blend_luts_backward: expected 3 entry gradients");
        for (int k = 0; k < 3; ++k) {
            if (grad_entries[k] == nullptr) continue;
            std::vector<double>& ge = *grad_entries[k];
            if (ge.size() != grad_blend.size())
                throw InvalidArgument("blend_luts_backward: entry gradient size mismatch");
            for (std::size_t i = 0; i < grad_blend.size(); ++i)
                ge[i] += weights[k] * grad_blend[i];
        }
    }
}

namespace ref {

Image apply_lut_raw(const Lut3D& lut, const Image& img) {
    check_inputs(lut, img);
    Image out(img.height, img.width);
    const std::int64_t n = static_cast<std::int64_t>(img.height) * img.width;
    for (std::int64_t p = 0; p < n; ++p)
        interp_pixel(lut, &img.data[p * 3], &out.data[p * 3]);
    return out;
}

} // namespace ref

} // namespace clut
