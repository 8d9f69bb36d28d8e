#include "clut/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "clut/errors.hpp"

namespace clut {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 1e-4;   // (0.01 * 1.0)^2
constexpr double kC2 = 9e-4;   // (0.03 * 1.0)^2

const std::array<double, kWindow>& gaussian_kernel() {
    static const std::array<double, kWindow> k = [] {
        std::array<double, kWindow> g{};
        double sum = 0.0;
        for (int i = 0; i < kWindow; ++i) {
            double d = i - (kWindow - 1) / 2.0;
            g[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            sum += g[i];
        }
        for (double& v : g) v /= sum;
        return g;
    }();
    return k;
}

struct Plane {
    int h = 0, w = 0;
    std::vector<double> v;
    Plane() = default;
    Plane(int h_, int w_) : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_, 0.0) {}
    double& at(int y, int x) { return v[static_cast<std::size_t>(y) * w + x]; }
    double at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

Plane channel_plane(const Image& img, int c) {
    Plane p(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) p.at(y, x) = img.at(y, x, c);
    return p;
}

Plane multiply(const Plane& a, const Plane& b) {
    Plane out(a.h, a.w);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
    return out;
}

// Separable valid-mode correlation with the Gaussian kernel.
Plane filter_valid(const Plane& p) {
    const auto& g = gaussian_kernel();
    Plane tmp(p.h, p.w - kWindow + 1);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < tmp.h; ++y)
        for (int x = 0; x < tmp.w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) acc += g[k] * p.at(y, x + k);
            tmp.at(y, x) = acc;
        }
    Plane out(p.h - kWindow + 1, tmp.w);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) acc += g[k] * tmp.at(y + k, x);
            out.at(y, x) = acc;
        }
    return out;
}

// Adjoint of filter_valid: scatters window-space gradients back to pixel
// space. Written as a gather per pixel so it parallelizes deterministically.
Plane filter_valid_adjoint(const Plane& grad, int out_h, int out_w) {
    const auto& g = gaussian_kernel();
    Plane tmp(out_h, grad.w);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < tmp.h; ++y)
        for (int x = 0; x < tmp.w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) {
                int src = y - k;
                if (src >= 0 && src < grad.h) acc += g[k] * grad.at(src, x);
            }
            tmp.at(y, x) = acc;
        }
    Plane out(out_h, out_w);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) {
                int src = x - k;
                if (src >= 0 && src < tmp.w) acc += g[k] * tmp.at(y, src);
            }
            out.at(y, x) = acc;
        }
    return out;
}

void check_ssim_inputs(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw InvalidArgument("ssim: shape mismatch");
    if (a.height < kWindow || a.width < kWindow)
        throw InvalidArgument("ssim: image smaller than the 11x11 window");
}

double ssim_channel(const Plane& x, const Plane& y, Plane* grad_x) {
    Plane mu_x = filter_valid(x);
    Plane mu_y = filter_valid(y);
    Plane sxx = filter_valid(multiply(x, x));
    Plane syy = filter_valid(multiply(y, y));
    Plane sxy = filter_valid(multiply(x, y));

    const std::size_t n = mu_x.v.size();
    double total = 0.0;
    Plane g_mu(mu_x.h, mu_x.w), g_sxx(mu_x.h, mu_x.w), g_sxy(mu_x.h, mu_x.w);
    for (std::size_t i = 0; i < n; ++i) {
        const double mx = mu_x.v[i], my = mu_y.v[i];
        const double vx = sxx.v[i] - mx * mx;
        const double vy = syy.v[i] - my * my;
        const double cxy = sxy.v[i] - mx * my;
        const double a1 = 2.0 * mx * my + kC1;
        const double a2 = 2.0 * cxy + kC2;
        const double b1 = mx * mx + my * my + kC1;
        const double b2 = vx + vy + kC2;
        const double s = (a1 * a2) / (b1 * b2);
        total += s;
        if (grad_x) {
            const double inv_b1b2 = 1.0 / (b1 * b2);
            g_mu.v[i] = 2.0 * my * a2 * inv_b1b2 - 2.0 * mx * s / b1 -
                        2.0 * my * a1 * inv_b1b2 + 2.0 * mx * s / b2;
            g_sxx.v[i] = -s / b2;
            g_sxy.v[i] = 2.0 * a1 * inv_b1b2;
        }
    }
    const double mean = total / static_cast<double>(n);
    if (grad_x) {
        // d(mean)/dx = G^T(g_mu)/n + G^T(g_sxx)*2x/n + G^T(g_sxy)*y/n
        Plane back_mu = filter_valid_adjoint(g_mu, x.h, x.w);
        Plane back_sxx = filter_valid_adjoint(g_sxx, x.h, x.w);
        Plane back_sxy = filter_valid_adjoint(g_sxy, x.h, x.w);
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < back_mu.v.size(); ++i)
            grad_x->v[i] = inv_n * (back_mu.v[i] + 2.0 * x.v[i] * back_sxx.v[i] +
                                    y.v[i] * back_sxy.v[i]);
    }
    return mean;
}

} // namespace

double mean_squared_error(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw InvalidArgument("mse: shape mismatch");
    // Fixed-size blocks with a serial reduction over block partials keep the
    // result identical for any thread count.
    constexpr std::int64_t kBlock = 4096;
    const std::int64_t n = static_cast<std::int64_t>(a.data.size());
    const std::int64_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t bi = 0; bi < nblocks; ++bi) {
        double acc = 0.0;
        const std::int64_t end = std::min(n, (bi + 1) * kBlock);
        for (std::int64_t i = bi * kBlock; i < end; ++i) {
            const double d = a.data[i] - b.data[i];
            acc += d * d;
        }
        partial[bi] = acc;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total / static_cast<double>(n);
}

double psnr(const Image& a, const Image& b) {
    const double mse = mean_squared_error(a, b);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b) { return ssim_with_grad(a, b, nullptr); }

double ssim_with_grad(const Image& a, const Image& b, Image* grad_a) {
    check_ssim_inputs(a, b);
    if (grad_a && !grad_a->same_shape(a)) *grad_a = Image(a.height, a.width);
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        Plane x = channel_plane(a, c);
        Plane y = channel_plane(b, c);
        Plane gx;
        if (grad_a) gx = Plane(a.height, a.width);
        total += ssim_channel(x, y, grad_a ? &gx : nullptr);
        if (grad_a) {
            for (int yy = 0; yy < a.height; ++yy)
                for (int xx = 0; xx < a.width; ++xx)
                    grad_a->at(yy, xx, c) = gx.at(yy, xx) / 3.0;
        }
    }
    return total / 3.0;
}

namespace {

constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

// White point taken as the matrix rows applied to (1,1,1), so sRGB white maps
// to Lab (100, 0, 0) by construction.
const double kWhite[3] = {
    kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
    kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
    kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2],
};

struct Mat3 {
    double m[3][3];
};

Mat3 invert(const double a[3][3]) {
    Mat3 r;
    const double det =
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
        a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
        a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    const double inv = 1.0 / det;
    r.m[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * inv;
    r.m[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * inv;
    r.m[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * inv;
    r.m[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * inv;
    r.m[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * inv;
    r.m[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * inv;
    r.m[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * inv;
    r.m[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * inv;
    r.m[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * inv;
    return r;
}

const Mat3 kXyzToRgb = invert(kRgbToXyz);

inline double srgb_to_linear(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double linear_to_srgb(double c) {
    return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

constexpr double kDelta = 6.0 / 29.0;

inline double lab_f(double t) {
    return t > kDelta * kDelta * kDelta ? std::cbrt(t)
                                        : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

inline double lab_f_inv(double u) {
    return u > kDelta ? u * u * u : 3.0 * kDelta * kDelta * (u - 4.0 / 29.0);
}

} // namespace

Image rgb_to_lab(const Image& img) {
    Image out(img.height, img.width);
    const std::int64_t n = static_cast<std::int64_t>(img.height) * img.width;
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < n; ++p) {
        double lin[3];
        for (int c = 0; c < 3; ++c) lin[c] = srgb_to_linear(img.data[p * 3 + c]);
        double xyz[3];
        for (int i = 0; i < 3; ++i)
            xyz[i] = kRgbToXyz[i][0] * lin[0] + kRgbToXyz[i][1] * lin[1] +
                     kRgbToXyz[i][2] * lin[2];
        const double fx = lab_f(xyz[0] / kWhite[0]);
        const double fy = lab_f(xyz[1] / kWhite[1]);
        const double fz = lab_f(xyz[2] / kWhite[2]);
        out.data[p * 3 + 0] = 116.0 * fy - 16.0;
        out.data[p * 3 + 1] = 500.0 * (fx - fy);
        out.data[p * 3 + 2] = 200.0 * (fy - fz);
    }
    return out;
}

Image lab_to_rgb(const Image& lab) {
    Image out(lab.height, lab.width);
    const std::int64_t n = static_cast<std::int64_t>(lab.height) * lab.width;
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < n; ++p) {
        const double L = lab.data[p * 3 + 0];
        const double a = lab.data[p * 3 + 1];
        const double b = lab.data[p * 3 + 2];
        const double fy = (L + 16.0) / 116.0;
        const double fx = fy + a / 500.0;
        const double fz = fy - b / 200.0;
        const double xyz[3] = {lab_f_inv(fx) * kWhite[0], lab_f_inv(fy) * kWhite[1],
                               lab_f_inv(fz) * kWhite[2]};
        for (int i = 0; i < 3; ++i) {
            double lin = kXyzToRgb.m[i][0] * xyz[0] + kXyzToRgb.m[i][1] * xyz[1] +
                         kXyzToRgb.m[i][2] * xyz[2];
            out.data[p * 3 + i] = linear_to_srgb(lin);
        }
    }
    return out;
}

double delta_e_lab(const Image& lab_a, const Image& lab_b) {
    if (!lab_a.same_shape(lab_b)) throw InvalidArgument("delta_e: shape mismatch");
    const std::int64_t n = static_cast<std::int64_t>(lab_a.height) * lab_a.width;
    double total = 0.0;
    for (std::int64_t p = 0; p < n; ++p) {
        double acc = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double d = lab_a.data[p * 3 + c] - lab_b.data[p * 3 + c];
            acc += d * d;
        }
        total += std::sqrt(acc);
    }
    return total / static_cast<double>(n);
}

double delta_e(const Image& a, const Image& b) {
    return delta_e_lab(rgb_to_lab(a), rgb_to_lab(b));
}

MetricReport evaluate_pair(const Image& output, const Image& target) {
    return {psnr(output, target), ssim(output, target), delta_e(output, target)};
}

namespace ref {

double ssim(const Image& a, const Image& b) {
    check_ssim_inputs(a, b);
    const auto& g = gaussian_kernel();
    const int oh = a.height - kWindow + 1;
    const int ow = a.width - kWindow + 1;
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        double channel = 0.0;
        for (int wy = 0; wy < oh; ++wy)
            for (int wx = 0; wx < ow; ++wx) {
                double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
                for (int i = 0; i < kWindow; ++i)
                    for (int j = 0; j < kWindow; ++j) {
                        const double wgt = g[i] * g[j];
                        const double xv = a.at(wy + i, wx + j, c);
                        const double yv = b.at(wy + i, wx + j, c);
                        mx += wgt * xv;
                        my += wgt * yv;
                        sxx += wgt * xv * xv;
                        syy += wgt * yv * yv;
                        sxy += wgt * xv * yv;
                    }
                const double vx = sxx - mx * mx;
                const double vy = syy - my * my;
                const double cxy = sxy - mx * my;
                channel += ((2.0 * mx * my + kC1) * (2.0 * cxy + kC2)) /
                           ((mx * mx + my * my + kC1) * (vx + vy + kC2));
            }
        total += channel / (static_cast<double>(oh) * ow);
    }
    return total / 3.0;
}

} // namespace ref

} // namespace clut
