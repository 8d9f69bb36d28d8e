#pragma once

#include "clut/encoder.hpp"
#include "clut/image.hpp"
#include "clut/prompts.hpp"

namespace clut {

struct LossWeights {
    double mse = 1.0;
    double perceptual = 0.4;
    double ssim = 0.4;
};

struct LossBreakdown {
    double mse = 0.0;
    double ssim_loss = 0.0;
    double perceptual = 0.0;
    double total = 0.0;
};

double mse_loss(const Image& out, const Image& target);
// d(mse)/d(out), scaled by upstream.
Image mse_loss_backward(const Image& out, const Image& target, double upstream = 1.0);

double ssim_loss(const Image& out, const Image& target);
Image ssim_loss_backward(const Image& out, const Image& target, double upstream = 1.0);

// Softmax probability that the output image matches the ORIGINAL prompt;
// equals 1 - score(out) exactly. Minimizing it drives outputs toward the
// enhanced prompt.
double perceptual_prompt_loss(const Image& out, const PromptPair& prompts,
                              const EncoderPair& enc, double temperature = 1.0);
double perceptual_prompt_loss_embedded(const Embedding& out_embed,
                                       const Embedding& text_original,
                                       const Embedding& text_enhanced,
                                       double temperature = 1.0);
// Value plus d(perceptual)/d(out pixels).
double perceptual_prompt_loss_grad(const Image& out, const Embedding& text_original,
                                   const Embedding& text_enhanced, const EncoderPair& enc,
                                   double temperature, Image& grad_out);

// total = w.mse * MSE + w.perceptual * L_perc + w.ssim * (1 - SSIM).
// Passing prompts == nullptr drops the perceptual term entirely (recorded as
// exactly zero), which is the no-prompts ablation.
LossBreakdown total_loss(const Image& out, const Image& target,
                         const PromptPair* prompts, const EncoderPair* enc,
                         const LossWeights& weights = {}, double temperature = 1.0);
LossBreakdown total_loss_grad(const Image& out, const Image& target,
                              const PromptPair* prompts, const EncoderPair* enc,
                              Image& grad_out, const LossWeights& weights = {},
                              double temperature = 1.0);

} // namespace clut
