#pragma once

#include <array>
#include <span>
#include <vector>

#include "clut/image.hpp"

namespace clut {

// Cubic lattice of RGB entries defining a color transform. Memory layout is
// red-fastest: entry (r, g, b) channel c sits at ((b*D + g)*D + r)*3 + c,
// matching the .cube file row order. Entries are unconstrained reals; outputs
// are clamped to [0, 1] only at application time.
struct Lut3D {
    int dim = 0;
    double domain_max = 1.0;
    std::vector<double> data;

    Lut3D() = default;
    Lut3D(int d, double dmax = 1.0)
        : dim(d), domain_max(dmax),
          data(static_cast<std::size_t>(d) * d * d * 3, 0.0) {}

    std::size_t index(int r, int g, int b, int c) const {
        return ((static_cast<std::size_t>(b) * dim + g) * dim + r) * 3 + c;
    }
    double& at(int r, int g, int b, int c) { return data[index(r, g, b, c)]; }
    double at(int r, int g, int b, int c) const { return data[index(r, g, b, c)]; }

    // Throws InvalidArgument if dim < 2 or any entry is non-finite.
    void validate() const;
};

// Continuous lattice coordinates, each in [0, dim-1].
struct LatticeCoord {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// Lattice whose trilinear application is the identity transform on
// [0, domain_max]^3: entry (i, j, k) = (i, j, k) * domain_max / (dim-1).
Lut3D identity_lut(int dim, double domain_max = 1.0);

// Maps an input color to lattice coordinates: x = r/s with s = C_max/(dim-1).
// Out-of-range channels are clamped to [0, domain_max] first.
LatticeCoord map_coordinates(double r, double g, double b, const Lut3D& lut);

// Trilinear lookup. apply_lut clamps the result to [0, 1]; apply_lut_raw
// returns the pre-clamp interpolation (the value training losses see).
// Both run the OpenMP kernel; clut::ref holds the serial reference.
Image apply_lut(const Lut3D& lut, const Image& img);
Image apply_lut_raw(const Lut3D& lut, const Image& img);

// Accumulates d(sum(grad_out * apply_lut_raw))/d(entries) into grad_entries,
// which must have lut.data.size() elements. Scatter order is the fixed pixel
// order, so results are independent of threading.
void apply_lut_backward_entries(const Lut3D& lut, const Image& img,
                                const Image& grad_out,
                                std::vector<double>& grad_entries);

// Entrywise weighted sum of exactly three LUTs sharing dim and domain_max.
Lut3D blend_luts(std::span<const Lut3D> luts, std::span<const double> weights);

// Gradients of blend_luts: given d(loss)/d(blended entries), fills the
// per-weight scalars and (optionally) per-LUT entry gradients.
void blend_luts_backward(std::span<const Lut3D> luts,
                         std::span<const double> weights,
                         const std::vector<double>& grad_blend,
                         std::span<double> grad_weights,
                         std::span<std::vector<double>*> grad_entries);

namespace ref {
// Serial reference implementation kept for backend-equality tests and the
// kernel benchmark.
Image apply_lut_raw(const Lut3D& lut, const Image& img);
} // namespace ref

} // namespace clut
