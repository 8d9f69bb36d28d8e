#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "clut/image.hpp"
#include "clut/lut3d.hpp"

namespace clut {

// C x H x W feature map, channel-major.
struct Tensor3 {
    int channels = 0, height = 0, width = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(int c, int h, int w)
        : channels(c), height(h), width(w),
          data(static_cast<std::size_t>(c) * h * w, 0.0) {}

    double& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
};

struct Conv2D {
    int in_ch = 0, out_ch = 0, ksize = 1, stride = 1, pad = 0;
    std::vector<double> weight;  // out * in * k * k
    std::vector<double> bias;    // out
};

// Channel attention projection: x * (W . pool(x)), W a C x C map, no bias.
struct ScaLayer {
    int channels = 0;
    std::vector<double> weight;  // C x C, row-major [out][in]
};

Tensor3 conv2d(const Conv2D& conv, const Tensor3& input);
void conv2d_backward(const Conv2D& conv, const Tensor3& input, const Tensor3& grad_out,
                     Tensor3* grad_input, std::vector<double>* grad_weight,
                     std::vector<double>* grad_bias);

// Splits channels into halves X, Y and returns X * Y elementwise.
// Throws InvalidArgument on an odd channel count.
Tensor3 simple_gate(const Tensor3& input);
Tensor3 simple_gate_backward(const Tensor3& input, const Tensor3& grad_out);

std::vector<double> global_avg_pool(const Tensor3& input);
Tensor3 sca(const ScaLayer& layer, const Tensor3& input);
void sca_backward(const ScaLayer& layer, const Tensor3& input, const Tensor3& grad_out,
                  Tensor3* grad_input, std::vector<double>* grad_weight);

struct PredictorConfig {
    int base_width = 16;
    int stage_count = 3;
};

struct PredictorStage {
    Conv2D down;    // 3x3 stride 2, doubles channels
    Conv2D expand;  // 1x1 to twice the doubled width, feeds the gate
    ScaLayer sca;
};

// All trainable state of the enhancer: the convolutional weight predictor
// plus the three learnable LUT lattices of the blend.
struct PredictorParams {
    PredictorConfig cfg;
    Conv2D stem;
    std::vector<PredictorStage> stages;
    std::vector<double> head_weight;  // 3 x final_channels
    std::vector<double> head_bias;    // 3
    std::array<Lut3D, 3> luts;

    int final_channels() const;

    // Visits every trainable tensor in a fixed order with stable names.
    template <typename F>
    void for_each_tensor(F&& f) {
        f("stem.weight", stem.weight);
        f("stem.bias", stem.bias);
        for (std::size_t s = 0; s < stages.size(); ++s) {
            const std::string p = "stage" + std::to_string(s) + ".";
            f(p + "down.weight", stages[s].down.weight);
            f(p + "down.bias", stages[s].down.bias);
            f(p + "expand.weight", stages[s].expand.weight);
            f(p + "expand.bias", stages[s].expand.bias);
            f(p + "sca.weight", stages[s].sca.weight);
        }
        f("head.weight", head_weight);
        f("head.bias", head_bias);
        for (int k = 0; k < 3; ++k)
            f("lut" + std::to_string(k), luts[k].data);
    }
};

// Seeded initialization: Xavier-normal convolutions, near-identity SCA maps,
// zero head weights with bias (1/3, 1/3, 1/3), identity LUTs of lut_dim.
// A fresh network is therefore exactly the identity enhancer.
PredictorParams init_predictor(const PredictorConfig& cfg, int lut_dim,
                               std::uint64_t seed);

// Zero-valued clone with identical tensor shapes, used as a gradient holder.
PredictorParams zero_like(const PredictorParams& params);

struct PredictorActivations {
    Tensor3 input;
    Tensor3 stem_out;
    struct Stage {
        Tensor3 down, expand, gate, sca_out;
    };
    std::vector<Stage> stages;
    std::vector<double> pooled;
};

// Blend weights for one image. Requires height and width >= 32.
std::array<double, 3> predict_weights(const PredictorParams& params, const Image& img);
std::array<double, 3> predict_weights_cached(const PredictorParams& params,
                                             const Image& img,
                                             PredictorActivations& acts);
void predict_weights_backward(const PredictorParams& params,
                              const PredictorActivations& acts,
                              const std::array<double, 3>& grad_weights,
                              PredictorParams& grads);

// Full enhancement: predict weights, blend the LUTs, apply. enhance clamps
// to [0, 1]; enhance_raw returns the pre-clamp image used by training losses.
Image enhance(const PredictorParams& params, const Image& img);
Image enhance_raw(const PredictorParams& params, const Image& img);

namespace ref {
// Serial reference convolution for backend-equality tests and the benchmark.
Tensor3 conv2d(const Conv2D& conv, const Tensor3& input);
} // namespace ref

} // namespace clut
