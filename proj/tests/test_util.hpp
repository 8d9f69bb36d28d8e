#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>

#include "clut/image.hpp"
#include "clut/lut3d.hpp"
#include "clut/rng.hpp"

namespace clut::testutil {

inline double rel_err(double a, double b) {
    const double m = std::max(std::abs(a), std::abs(b));
    if (m < 1e-8) return 0.0;  // both effectively zero
    return std::abs(a - b) / m;
}

// Central finite difference of f at *x with the spec step size.
inline double fd_central(double* x, const std::function<double()>& f,
                         double step = 1e-4) {
    const double orig = *x;
    *x = orig + step;
    const double fp = f();
    *x = orig - step;
    const double fm = f();
    *x = orig;
    return (fp - fm) / (2.0 * step);
}

inline Lut3D random_lut(int dim, Rng& rng, double spread = 1.0) {
    Lut3D lut = identity_lut(dim);
    for (double& v : lut.data) v += spread * 0.1 * rng.normal();
    return lut;
}

// Scalar 8-corner trilinear oracle, written directly from the closed form.
inline void trilinear_oracle(const Lut3D& lut, double r, double g, double b,
                             double out[3]) {
    const int m = lut.dim - 1;
    auto clamp01 = [](double v) { return v < 0 ? 0.0 : (v > 1 ? 1.0 : v); };
    const double x = clamp01(r / lut.domain_max) * m;
    const double y = clamp01(g / lut.domain_max) * m;
    const double z = clamp01(b / lut.domain_max) * m;
    int i0 = std::min(static_cast<int>(std::floor(x)), m - 1);
    int j0 = std::min(static_cast<int>(std::floor(y)), m - 1);
    int k0 = std::min(static_cast<int>(std::floor(z)), m - 1);
    const double fx = x - i0, fy = y - j0, fz = z - k0;
    for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int dz = 0; dz < 2; ++dz)
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const double w = (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy) *
                                     (dz ? fz : 1 - fz);
                    acc += w * lut.at(i0 + dx, j0 + dy, k0 + dz, c);
                }
        out[c] = acc;
    }
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("clut_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace clut::testutil
