#include "clut/predictor.hpp"

#include <cmath>

#include "clut/errors.hpp"
#include "clut/rng.hpp"

namespace clut {

namespace {

int conv_out_size(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

void check_conv(const Conv2D& conv, const Tensor3& input) {
    if (input.channels != conv.in_ch)
        throw InvalidArgument("conv2d: input has " + std::to_string(input.channels) +
                              " channels, layer expects " + std::to_string(conv.in_ch));
    if (conv.weight.size() != static_cast<std::size_t>(conv.out_ch) * conv.in_ch *
                                  conv.ksize * conv.ksize ||
        conv.bias.size() != static_cast<std::size_t>(conv.out_ch))
        throw InvalidArgument("conv2d: weight/bias size mismatch");
    if (conv_out_size(input.height, conv.ksize, conv.stride, conv.pad) < 1 ||
        conv_out_size(input.width, conv.ksize, conv.stride, conv.pad) < 1)
        throw InvalidArgument("conv2d: input smaller than kernel");
}

template <bool Parallel>
Tensor3 conv2d_impl(const Conv2D& conv, const Tensor3& input) {
    check_conv(conv, input);
    const int oh = conv_out_size(input.height, conv.ksize, conv.stride, conv.pad);
    const int ow = conv_out_size(input.width, conv.ksize, conv.stride, conv.pad);
    Tensor3 out(conv.out_ch, oh, ow);
    const int k = conv.ksize;
#pragma omp parallel for collapse(2) schedule(static) if (Parallel)
    for (int oc = 0; oc < conv.out_ch; ++oc)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                double acc = conv.bias[oc];
                for (int ic = 0; ic < conv.in_ch; ++ic) {
                    const double* wbase =
                        &conv.weight[((static_cast<std::size_t>(oc) * conv.in_ch + ic) * k) * k];
                    for (int ky = 0; ky < k; ++ky) {
                        const int iy = oy * conv.stride - conv.pad + ky;
                        if (iy < 0 || iy >= input.height) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            const int ix = ox * conv.stride - conv.pad + kx;
                            if (ix < 0 || ix >= input.width) continue;
                            acc += wbase[ky * k + kx] * input.at(ic, iy, ix);
                        }
                    }
                }
                out.at(oc, oy, ox) = acc;
            }
    return out;
}

} // namespace

Tensor3 conv2d(const Conv2D& conv, const Tensor3& input) {
    return conv2d_impl<true>(conv, input);
}

namespace ref {
Tensor3 conv2d(const Conv2D& conv, const Tensor3& input) {
    return conv2d_impl<false>(conv, input);
}
} // namespace ref

void conv2d_backward(const Conv2D& conv, const Tensor3& input, const Tensor3& grad_out,
                     Tensor3* grad_input, std::vector<double>* grad_weight,
                     std::vector<double>* grad_bias) {
    check_conv(conv, input);
    const int oh = grad_out.height, ow = grad_out.width;
    const int k = conv.ksize;
    if (grad_out.channels != conv.out_ch ||
        oh != conv_out_size(input.height, k, conv.stride, conv.pad) ||
        ow != conv_out_size(input.width, k, conv.stride, conv.pad))
        throw InvalidArgument("conv2d_backward: grad_out shape mismatch");

    if (grad_input) {
        if (!(grad_input->channels == input.channels &&
              grad_input->height == input.height && grad_input->width == input.width))
            *grad_input = Tensor3(input.channels, input.height, input.width);
        // Gather per input element over the output positions it fed.
#pragma omp parallel for collapse(2) schedule(static)
        for (int ic = 0; ic < input.channels; ++ic)
            for (int iy = 0; iy < input.height; ++iy)
                for (int ix = 0; ix < input.width; ++ix) {
                    double acc = 0.0;
                    for (int oc = 0; oc < conv.out_ch; ++oc) {
                        const double* wbase =
                            &conv.weight[((static_cast<std::size_t>(oc) * conv.in_ch + ic) * k) *
                                         k];
                        for (int ky = 0; ky < k; ++ky) {
                            const int num_y = iy + conv.pad - ky;
                            if (num_y < 0 || num_y % conv.stride != 0) continue;
                            const int oy = num_y / conv.stride;
                            if (oy >= oh) continue;
                            for (int kx = 0; kx < k; ++kx) {
                                const int num_x = ix + conv.pad - kx;
                                if (num_x < 0 || num_x % conv.stride != 0) continue;
                                const int ox = num_x / conv.stride;
                                if (ox >= ow) continue;
                                acc += wbase[ky * k + kx] * grad_out.at(oc, oy, ox);
                            }
                        }
                    }
                    grad_input->at(ic, iy, ix) += acc;
                }
    }

    if (grad_weight) {
        if (grad_weight->size() != conv.weight.size())
            throw InvalidArgument("conv2d_backward: grad_weight size mismatch");
        const std::int64_t nw = static_cast<std::int64_t>(conv.weight.size());
#pragma omp parallel for schedule(static)
        for (std::int64_t wi = 0; wi < nw; ++wi) {
            const int kx = static_cast<int>(wi % k);
            const int ky = static_cast<int>((wi / k) % k);
            const int ic = static_cast<int>((wi / (k * k)) % conv.in_ch);
            const int oc = static_cast<int>(wi / (static_cast<std::int64_t>(k) * k * conv.in_ch));
            double acc = 0.0;
            for (int oy = 0; oy < oh; ++oy) {
                const int iy = oy * conv.stride - conv.pad + ky;
                if (iy < 0 || iy >= input.height) continue;
                for (int ox = 0; ox < ow; ++ox) {
                    const int ix = ox * conv.stride - conv.pad + kx;
                    if (ix < 0 || ix >= input.width) continue;
                    acc += grad_out.at(oc, oy, ox) * input.at(ic, iy, ix);
                }
            }
            (*grad_weight)[wi] += acc;
        }
    }

    if (grad_bias) {
        if (grad_bias->size() != conv.bias.size())
            throw InvalidArgument("conv2d_backward: grad_bias size mismatch");
#pragma omp parallel for schedule(static)
        for (int oc = 0; oc < conv.out_ch; ++oc) {
            double acc = 0.0;
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) acc += grad_out.at(oc, oy, ox);
            (*grad_bias)[oc] += acc;
        }
    }
}

Tensor3 simple_gate(const Tensor3& input) {
    if (input.channels % 2 != 0)
        throw InvalidArgument("simple_gate: odd channel count " +
                              std::to_string(input.channels));
    const int half = input.channels / 2;
    Tensor3 out(half, input.height, input.width);
    const std::size_t plane = input.plane_size();
    const std::int64_t n = static_cast<std::int64_t>(half) * plane;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        out.data[i] = input.data[i] * input.data[i + n];
    return out;
}

Tensor3 simple_gate_backward(const Tensor3& input, const Tensor3& grad_out) {
    const int half = input.channels / 2;
    if (grad_out.channels != half || grad_out.height != input.height ||
        grad_out.width != input.width)
        throw InvalidArgument("simple_gate_backward: shape mismatch");
    Tensor3 grad(input.channels, input.height, input.width);
    const std::int64_t n = static_cast<std::int64_t>(half) * input.plane_size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        grad.data[i] = grad_out.data[i] * input.data[i + n];
        grad.data[i + n] = grad_out.data[i] * input.data[i];
    }
    return grad;
}

std::vector<double> global_avg_pool(const Tensor3& input) {
    std::vector<double> pool(input.channels, 0.0);
    const std::size_t plane = input.plane_size();
#pragma omp parallel for schedule(static)
    for (int c = 0; c < input.channels; ++c) {
        double acc = 0.0;
        const double* base = &input.data[c * plane];
        for (std::size_t i = 0; i < plane; ++i) acc += base[i];
        pool[c] = acc / static_cast<double>(plane);
    }
    return pool;
}

Tensor3 sca(const ScaLayer& layer, const Tensor3& input) {
    if (input.channels != layer.channels ||
        layer.weight.size() != static_cast<std::size_t>(layer.channels) * layer.channels)
        throw InvalidArgument("sca: shape mismatch");
    const std::vector<double> pool = global_avg_pool(input);
    Tensor3 out(input.channels, input.height, input.width);
    const std::size_t plane = input.plane_size();
#pragma omp parallel for schedule(static)
    for (int c = 0; c < input.channels; ++c) {
        double scale = 0.0;
        const double* row = &layer.weight[static_cast<std::size_t>(c) * layer.channels];
        for (int c2 = 0; c2 < layer.channels; ++c2) scale += row[c2] * pool[c2];
        const double* src = &input.data[c * plane];
        double* dst = &out.data[c * plane];
        for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] * scale;
    }
    return out;
}

void sca_backward(const ScaLayer& layer, const Tensor3& input, const Tensor3& grad_out,
                  Tensor3* grad_input, std::vector<double>* grad_weight) {
    const int C = layer.channels;
    if (grad_out.channels != C || grad_out.height != input.height ||
        grad_out.width != input.width)
        throw InvalidArgument("sca_backward: shape mismatch");
    const std::vector<double> pool = global_avg_pool(input);
    const std::size_t plane = input.plane_size();

    std::vector<double> scale(C, 0.0), grad_scale(C, 0.0);
    for (int c = 0; c < C; ++c) {
        const double* row = &layer.weight[static_cast<std::size_t>(c) * C];
        double s = 0.0;
        for (int c2 = 0; c2 < C; ++c2) s += row[c2] * pool[c2];
        scale[c] = s;
        const double* go = &grad_out.data[c * plane];
        const double* in = &input.data[c * plane];
        double gs = 0.0;
        for (std::size_t i = 0; i < plane; ++i) gs += go[i] * in[i];
        grad_scale[c] = gs;
    }

    if (grad_weight) {
        if (grad_weight->size() != layer.weight.size())
            throw InvalidArgument("sca_backward: grad_weight size mismatch");
        for (int c = 0; c < C; ++c)
            for (int c2 = 0; c2 < C; ++c2)
                (*grad_weight)[static_cast<std::size_t>(c) * C + c2] +=
                    grad_scale[c] * pool[c2];
    }

    if (grad_input) {
        if (!(grad_input->channels == C && grad_input->height == input.height &&
              grad_input->width == input.width))
            *grad_input = Tensor3(C, input.height, input.width);
        std::vector<double> grad_pool(C, 0.0);
        for (int c2 = 0; c2 < C; ++c2) {
            double acc = 0.0;
            for (int c = 0; c < C; ++c)
                acc += layer.weight[static_cast<std::size_t>(c) * C + c2] * grad_scale[c];
            grad_pool[c2] = acc;
        }
        const double inv_plane = 1.0 / static_cast<double>(plane);
#pragma omp parallel for schedule(static)
        for (int c = 0; c < C; ++c) {
            const double* go = &grad_out.data[c * plane];
            double* gi = &grad_input->data[c * plane];
            const double pool_term = grad_pool[c] * inv_plane;
            for (std::size_t i = 0; i < plane; ++i)
                gi[i] += go[i] * scale[c] + pool_term;
        }
    }
}

namespace {

Conv2D make_conv(int in_ch, int out_ch, int ksize, int stride, int pad, Rng& rng) {
    Conv2D c;
    c.in_ch = in_ch;
    c.out_ch = out_ch;
    c.ksize = ksize;
    c.stride = stride;
    c.pad = pad;
    c.weight.resize(static_cast<std::size_t>(out_ch) * in_ch * ksize * ksize);
    const double sd = std::sqrt(1.0 / (static_cast<double>(in_ch) * ksize * ksize));
    for (double& w : c.weight) w = sd * rng.normal();
    c.bias.assign(out_ch, 0.0);
    return c;
}

Tensor3 image_to_tensor(const Image& img) {
    Tensor3 t(3, img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) t.at(c, y, x) = img.at(y, x, c);
    return t;
}

} // namespace

int PredictorParams::final_channels() const {
    int c = cfg.base_width;
    for (std::size_t s = 0; s < stages.size(); ++s) c *= 2;
    return c;
}

PredictorParams init_predictor(const PredictorConfig& cfg, int lut_dim,
                               std::uint64_t seed) {
    if (cfg.base_width < 2 || cfg.base_width % 2 != 0)
        throw InvalidArgument("init_predictor: base_width must be even and >= 2");
    if (cfg.stage_count < 1) throw InvalidArgument("init_predictor: need >= 1 stage");
    PredictorParams p;
    p.cfg = cfg;
    Rng rng(Rng::mix(seed, 0x707265646963ULL));
    p.stem = make_conv(3, cfg.base_width, 3, 1, 1, rng);
    int ch = cfg.base_width;
    for (int s = 0; s < cfg.stage_count; ++s) {
        PredictorStage stage;
        stage.down = make_conv(ch, 2 * ch, 3, 2, 1, rng);
        // Damped weights with unit bias center the gate inputs at 1, which
        // keeps every stage's activation scale near 1 regardless of depth
        // (the gate and channel attention are multiplicative, so an
        // uncentered cascade decays or explodes polynomially).
        stage.expand = make_conv(2 * ch, 4 * ch, 1, 1, 0, rng);
        for (double& w : stage.expand.weight) w *= 0.2;
        for (double& b : stage.expand.bias) b = 1.0;
        stage.sca.channels = 2 * ch;
        stage.sca.weight.assign(static_cast<std::size_t>(2 * ch) * 2 * ch, 0.0);
        for (int i = 0; i < 2 * ch; ++i)
            for (int j = 0; j < 2 * ch; ++j)
                stage.sca.weight[static_cast<std::size_t>(i) * 2 * ch + j] =
                    (i == j ? 1.0 : 0.0) + 0.02 * rng.normal();
        p.stages.push_back(std::move(stage));
        ch *= 2;
    }
    // Zero head weights + one-third bias make a fresh network predict exactly
    // (1/3, 1/3, 1/3), so identity LUTs yield the identity enhancer.
    p.head_weight.assign(static_cast<std::size_t>(3) * ch, 0.0);
    p.head_bias.assign(3, 1.0 / 3.0);
    for (int k = 0; k < 3; ++k) p.luts[k] = identity_lut(lut_dim);
    return p;
}

PredictorParams zero_like(const PredictorParams& params) {
    PredictorParams z = params;
    z.for_each_tensor([](const std::string&, std::vector<double>& t) {
        std::fill(t.begin(), t.end(), 0.0);
    });
    return z;
}

std::array<double, 3> predict_weights_cached(const PredictorParams& params,
                                             const Image& img,
                                             PredictorActivations& acts) {
    if (img.height < 32 || img.width < 32)
        throw InvalidArgument("predict_weights: image must be at least 32x32");
    acts.input = image_to_tensor(img);
    acts.stem_out = conv2d(params.stem, acts.input);
    acts.stages.clear();
    const Tensor3* cur = &acts.stem_out;
    for (const PredictorStage& stage : params.stages) {
        PredictorActivations::Stage sa;
        sa.down = conv2d(stage.down, *cur);
        sa.expand = conv2d(stage.expand, sa.down);
        sa.gate = simple_gate(sa.expand);
        sa.sca_out = sca(stage.sca, sa.gate);
        acts.stages.push_back(std::move(sa));
        cur = &acts.stages.back().sca_out;
    }
    acts.pooled = global_avg_pool(*cur);
    const int fc = params.final_channels();
    std::array<double, 3> w{};
    for (int o = 0; o < 3; ++o) {
        double acc = params.head_bias[o];
        const double* row = &params.head_weight[static_cast<std::size_t>(o) * fc];
        for (int c = 0; c < fc; ++c) acc += row[c] * acts.pooled[c];
        w[o] = acc;
    }
    return w;
}

std::array<double, 3> predict_weights(const PredictorParams& params, const Image& img) {
    PredictorActivations acts;
    return predict_weights_cached(params, img, acts);
}

void predict_weights_backward(const PredictorParams& params,
                              const PredictorActivations& acts,
                              const std::array<double, 3>& grad_weights,
                              PredictorParams& grads) {
    const int fc = params.final_channels();
    std::vector<double> grad_pool(fc, 0.0);
    for (int o = 0; o < 3; ++o) {
        grads.head_bias[o] += grad_weights[o];
        const double* row = &params.head_weight[static_cast<std::size_t>(o) * fc];
        double* grow = &grads.head_weight[static_cast<std::size_t>(o) * fc];
        for (int c = 0; c < fc; ++c) {
            grow[c] += grad_weights[o] * acts.pooled[c];
            grad_pool[c] += grad_weights[o] * row[c];
        }
    }

    const Tensor3& last =
        acts.stages.empty() ? acts.stem_out : acts.stages.back().sca_out;
    Tensor3 grad_cur(last.channels, last.height, last.width);
    const double inv_plane = 1.0 / static_cast<double>(last.plane_size());
    for (int c = 0; c < last.channels; ++c) {
        const double g = grad_pool[c] * inv_plane;
        double* base = &grad_cur.data[c * last.plane_size()];
        for (std::size_t i = 0; i < last.plane_size(); ++i) base[i] = g;
    }

    for (int s = static_cast<int>(params.stages.size()) - 1; s >= 0; --s) {
        const PredictorStage& stage = params.stages[s];
        const PredictorActivations::Stage& sa = acts.stages[s];
        PredictorStage& gstage = grads.stages[s];

        Tensor3 grad_gate(sa.gate.channels, sa.gate.height, sa.gate.width);
        sca_backward(stage.sca, sa.gate, grad_cur, &grad_gate, &gstage.sca.weight);

        Tensor3 grad_expand = simple_gate_backward(sa.expand, grad_gate);

        const Tensor3& down_in = s == 0 ? acts.stem_out : acts.stages[s - 1].sca_out;
        Tensor3 grad_down(sa.down.channels, sa.down.height, sa.down.width);
        conv2d_backward(stage.expand, sa.down, grad_expand, &grad_down,
                        &gstage.expand.weight, &gstage.expand.bias);

        Tensor3 grad_in(down_in.channels, down_in.height, down_in.width);
        conv2d_backward(stage.down, down_in, grad_down, &grad_in, &gstage.down.weight,
                        &gstage.down.bias);
        grad_cur = std::move(grad_in);
    }

    conv2d_backward(params.stem, acts.input, grad_cur, nullptr, &grads.stem.weight,
                    &grads.stem.bias);
}

Image enhance_raw(const PredictorParams& params, const Image& img) {
    const std::array<double, 3> w = predict_weights(params, img);
    const Lut3D blended = blend_luts(params.luts, w);
    return apply_lut_raw(blended, img);
}

Image enhance(const PredictorParams& params, const Image& img) {
    const std::array<double, 3> w = predict_weights(params, img);
    const Lut3D blended = blend_luts(params.luts, w);
    return apply_lut(blended, img);
}

} // namespace clut
