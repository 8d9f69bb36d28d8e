#pragma once

#include "clut/image.hpp"

namespace clut {

struct MetricReport {
    double psnr = 0.0;
    double ssim = 0.0;
    double delta_e = 0.0;
};

// 10*log10(1/MSE) for images in [0, 1]; +infinity when the images are equal.
double psnr(const Image& a, const Image& b);

double mean_squared_error(const Image& a, const Image& b);

// Mean local SSIM over 11x11 Gaussian windows (sigma 1.5), K1=0.01, K2=0.03,
// dynamic range 1, computed per channel on valid windows and averaged.
// Throws InvalidArgument when either dimension is smaller than the window.
double ssim(const Image& a, const Image& b);

// SSIM value plus d(ssim)/d(a) when grad_a is non-null.
double ssim_with_grad(const Image& a, const Image& b, Image* grad_a);

// sRGB in [0, 1] -> CIELab (D65, IEC 61966-2-1 transfer). The returned image
// carries (L, a, b) triples in place of RGB.
Image rgb_to_lab(const Image& img);
Image lab_to_rgb(const Image& lab);

// Mean per-pixel Euclidean distance in Lab (CIE76).
double delta_e(const Image& a, const Image& b);
double delta_e_lab(const Image& lab_a, const Image& lab_b);

MetricReport evaluate_pair(const Image& output, const Image& target);

namespace ref {
// Serial SSIM kept for backend-equality tests and the kernel benchmark.
double ssim(const Image& a, const Image& b);
} // namespace ref

} // namespace clut
