#include "clut/losses.hpp"

#include <cmath>

#include "clut/errors.hpp"
#include "clut/metrics.hpp"

namespace clut {

double mse_loss(const Image& out, const Image& target) {
    return mean_squared_error(out, target);
}

Image mse_loss_backward(const Image& out, const Image& target, double upstream) {
    if (!out.same_shape(target)) throw InvalidArgument("mse: shape mismatch");
    Image grad(out.height, out.width);
    const double scale = upstream * 2.0 / static_cast<double>(out.data.size());
    const std::int64_t n = static_cast<std::int64_t>(out.data.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        grad.data[i] = scale * (out.data[i] - target.data[i]);
    return grad;
}

double ssim_loss(const Image& out, const Image& target) {
    return 1.0 - ssim(out, target);
}

Image ssim_loss_backward(const Image& out, const Image& target, double upstream) {
    Image grad;
    ssim_with_grad(out, target, &grad);
    for (double& v : grad.data) v *= -upstream;
    return grad;
}

double perceptual_prompt_loss_embedded(const Embedding& out_embed,
                                       const Embedding& text_original,
                                       const Embedding& text_enhanced,
                                       double temperature) {
    return 1.0 - score_embedded(out_embed, text_original, text_enhanced, temperature);
}

double perceptual_prompt_loss(const Image& out, const PromptPair& prompts,
                              const EncoderPair& enc, double temperature) {
    return perceptual_prompt_loss_embedded(enc.encode_image(out),
                                           enc.encode_prompt(prompts.original_tokens),
                                           enc.encode_prompt(prompts.enhanced_tokens),
                                           temperature);
}

double perceptual_prompt_loss_grad(const Image& out, const Embedding& text_original,
                                   const Embedding& text_enhanced, const EncoderPair& enc,
                                   double temperature, Image& grad_out) {
    const Embedding u = enc.encode_image(out);
    const double s = score_embedded(u, text_original, text_enhanced, temperature);
    const double loss = 1.0 - s;
    // d(loss)/d(cos_o) = t*s*(1-s), d(loss)/d(cos_e) = -t*s*(1-s).
    const double d = temperature * s * (1.0 - s);
    Embedding grad_u;
    for (int k = 0; k < kEmbedDim; ++k)
        grad_u.v[k] = d * (text_original.v[k] - text_enhanced.v[k]);
    grad_out = enc.encode_image_backward(out, grad_u);
    return loss;
}

LossBreakdown total_loss(const Image& out, const Image& target,
                         const PromptPair* prompts, const EncoderPair* enc,
                         const LossWeights& weights, double temperature) {
    LossBreakdown b;
    b.mse = mse_loss(out, target);
    b.ssim_loss = ssim_loss(out, target);
    if (prompts) {
        if (!enc) throw InvalidArgument("total_loss: prompts given without an encoder");
        b.perceptual = perceptual_prompt_loss(out, *prompts, *enc, temperature);
    }
    b.total = weights.mse * b.mse + weights.perceptual * b.perceptual +
              weights.ssim * b.ssim_loss;
    return b;
}

LossBreakdown total_loss_grad(const Image& out, const Image& target,
                              const PromptPair* prompts, const EncoderPair* enc,
                              Image& grad_out, const LossWeights& weights,
                              double temperature) {
    LossBreakdown b;
    grad_out = mse_loss_backward(out, target, weights.mse);
    b.mse = mse_loss(out, target);

    Image ssim_grad;
    b.ssim_loss = 1.0 - ssim_with_grad(out, target, &ssim_grad);
    for (std::size_t i = 0; i < grad_out.data.size(); ++i)
        grad_out.data[i] -= weights.ssim * ssim_grad.data[i];

    if (prompts) {
        if (!enc) throw InvalidArgument("total_loss: prompts given without an encoder");
        const Embedding t_o = enc->encode_prompt(prompts->original_tokens);
        const Embedding t_e = enc->encode_prompt(prompts->enhanced_tokens);
        Image perc_grad;
        b.perceptual =
            perceptual_prompt_loss_grad(out, t_o, t_e, *enc, temperature, perc_grad);
        for (std::size_t i = 0; i < grad_out.data.size(); ++i)
            grad_out.data[i] += weights.perceptual * perc_grad.data[i];
    }
    b.total = weights.mse * b.mse + weights.perceptual * b.perceptual +
              weights.ssim * b.ssim_loss;
    return b;
}

} // namespace clut
