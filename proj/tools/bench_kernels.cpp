// Compares the OpenMP kernels against their serial references and reports
// timings plus the max absolute deviation (which must be zero for kernels
// that share per-output arithmetic).

#include <chrono>
#include <cstdio>
#include <functional>

#include "clut/encoder.hpp"
#include "clut/image.hpp"
#include "clut/lut3d.hpp"
#include "clut/metrics.hpp"
#include "clut/parallel.hpp"
#include "clut/predictor.hpp"
#include "clut/rng.hpp"

using namespace clut;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double omp_ms, double max_diff) {
    std::printf("%-28s %10.3f ms %10.3f ms %8.2fx   %.3e\n", name, serial_ms, omp_ms,
                serial_ms / omp_ms, max_diff);
}

} // namespace

int main() {
    std::printf("threads: %d (openmp %s)\n\n", parallel::max_threads(),
                parallel::openmp_enabled() ? "on" : "off");
    std::printf("%-28s %13s %13s %9s   %s\n", "kernel", "serial", "openmp", "speedup",
                "max |diff|");

    Rng rng(7);
    const Image img = random_image(1024, 1024, rng);
    const Lut3D lut = [&] {
        Lut3D l = identity_lut(33);
        Rng r2(11);
        for (double& v : l.data) v += 0.05 * r2.normal();
        return l;
    }();

    {
        Image out_serial, out_omp;
        const double ts = time_ms([&] { out_serial = ref::apply_lut_raw(lut, img); }, 3);
        const double tp = time_ms([&] { out_omp = apply_lut_raw(lut, img); }, 3);
        report("apply_lut 1024x1024 d33", ts, tp, max_abs_diff(out_serial, out_omp));
    }

    {
        const Image a = random_image(512, 512, rng);
        const Image b = random_image(512, 512, rng);
        double vs = 0, vp = 0;
        const double ts = time_ms([&] { vs = ref::ssim(a, b); }, 3);
        const double tp = time_ms([&] { vp = ssim(a, b); }, 3);
        // Independent formulations; agreement is numerical, not bitwise.
        report("ssim 512x512", ts, tp, std::abs(vs - vp));
    }

    {
        Rng pr(3);
        Tensor3 feat(16, 256, 256);
        for (double& v : feat.data) v = pr.normal();
        Conv2D conv;
        conv.in_ch = 16;
        conv.out_ch = 32;
        conv.ksize = 3;
        conv.stride = 2;
        conv.pad = 1;
        conv.weight = normal_vector(pr, 32 * 16 * 9);
        conv.bias = normal_vector(pr, 32);
        Tensor3 out_serial, out_omp;
        const double ts = time_ms([&] { out_serial = ref::conv2d(conv, feat); }, 3);
        const double tp = time_ms([&] { out_omp = conv2d(conv, feat); }, 3);
        double md = 0;
        for (std::size_t i = 0; i < out_serial.data.size(); ++i)
            md = std::max(md, std::abs(out_serial.data[i] - out_omp.data[i]));
        report("conv3x3 s2 16->32 256px", ts, tp, md);
    }

    {
        // Same kernel at 1 thread vs all threads: must be bit-identical.
        parallel::set_threads(1);
        const Image lab1 = rgb_to_lab(img);
        parallel::set_threads(0);
        const Image labN = rgb_to_lab(img);
        const double ts = time_ms([&] {
            parallel::set_threads(1);
            rgb_to_lab(img);
        }, 3);
        const double tp = time_ms([&] {
            parallel::set_threads(0);
            rgb_to_lab(img);
        }, 3);
        report("rgb_to_lab 1024x1024", ts, tp, max_abs_diff(lab1, labN));
    }

    return 0;
}
