#include "clut/trainer.hpp"

#include "clut/data.hpp"
#include "clut/errors.hpp"
#include "clut/metrics.hpp"

namespace clut {

Stage2Trainer::Stage2Trainer(std::vector<std::pair<Image, Image>> pairs,
                             const Stage2Options& opts, const EncoderPair* enc,
                             const PromptPair* prompts)
    : pairs_(std::move(pairs)), opts_(opts), enc_(enc), prompts_(prompts) {
    if (pairs_.empty()) throw InvalidArgument("Stage2Trainer: empty dataset");
    if (prompts_ && !enc_)
        throw InvalidArgument("Stage2Trainer: prompts require an encoder");
    for (const auto& [input, target] : pairs_)
        if (!input.same_shape(target))
            throw InvalidArgument("Stage2Trainer: input/target shape mismatch");

    params_ = init_predictor(opts_.predictor, opts_.lut_dim, opts_.seed);
    params_.for_each_tensor([this](const std::string& name, std::vector<double>& t) {
        tensor_names_.push_back(name);
        optimizers_.emplace_back(t.size());
    });
    if (prompts_) {
        text_original_ = enc_->encode_prompt(prompts_->original_tokens);
        text_enhanced_ = enc_->encode_prompt(prompts_->enhanced_tokens);
    }
}

void Stage2Trainer::train_step(const std::vector<std::size_t>& batch,
                               Stage2EpochStats& stats, std::size_t& images_seen) {
    PredictorParams grads = zero_like(params_);
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    for (std::size_t idx : batch) {
        const Image& input = pairs_[idx].first;
        const Image& target = pairs_[idx].second;

        PredictorActivations acts;
        const std::array<double, 3> omega = predict_weights_cached(params_, input, acts);
        const Lut3D blended = blend_luts(params_.luts, omega);
        const Image out_raw = apply_lut_raw(blended, input);

        Image grad_out;
        LossBreakdown lb;
        if (prompts_) {
            grad_out = mse_loss_backward(out_raw, target, opts_.weights.mse);
            lb.mse = mse_loss(out_raw, target);
            Image sgrad;
            lb.ssim_loss = 1.0 - ssim_with_grad(out_raw, target, &sgrad);
            for (std::size_t i = 0; i < grad_out.data.size(); ++i)
                grad_out.data[i] -= opts_.weights.ssim * sgrad.data[i];
            Image pgrad;
            lb.perceptual = perceptual_prompt_loss_grad(
                out_raw, *text_original_, *text_enhanced_, *enc_, opts_.temperature, pgrad);
            for (std::size_t i = 0; i < grad_out.data.size(); ++i)
                grad_out.data[i] += opts_.weights.perceptual * pgrad.data[i];
            lb.total = opts_.weights.mse * lb.mse +
                       opts_.weights.perceptual * lb.perceptual +
                       opts_.weights.ssim * lb.ssim_loss;
        } else {
            lb = total_loss_grad(out_raw, target, nullptr, nullptr, grad_out,
                                 opts_.weights, opts_.temperature);
        }
        for (double& v : grad_out.data) v *= inv_b;

        std::vector<double> grad_blend(blended.data.size(), 0.0);
        apply_lut_backward_entries(blended, input, grad_out, grad_blend);

        std::array<double, 3> grad_omega{};
        std::array<std::vector<double>*, 3> lut_grads = {
            &grads.luts[0].data, &grads.luts[1].data, &grads.luts[2].data};
        blend_luts_backward(params_.luts, omega, grad_blend, grad_omega, lut_grads);

        predict_weights_backward(params_, acts, grad_omega, grads);

        stats.mse += lb.mse;
        stats.ssim_loss += lb.ssim_loss;
        stats.perceptual += lb.perceptual;
        stats.total += lb.total;
        stats.psnr += psnr(clamp01(out_raw), target);
        ++images_seen;
    }

    // for_each_tensor visits params and grads in the same fixed order.
    std::vector<std::vector<double>*> param_tensors, grad_tensors;
    params_.for_each_tensor(
        [&](const std::string&, std::vector<double>& t) { param_tensors.push_back(&t); });
    grads.for_each_tensor(
        [&](const std::string&, std::vector<double>& t) { grad_tensors.push_back(&t); });
    for (std::size_t i = 0; i < param_tensors.size(); ++i) {
        const double lr =
            tensor_names_[i].rfind("lut", 0) == 0 ? opts_.lr_lut : opts_.lr_predictor;
        optimizers_[i].step(*param_tensors[i], *grad_tensors[i], lr);
    }
    ++steps_done_;
}

void Stage2Trainer::run_epoch() {
    const auto batches =
        plan_batches(pairs_.size(), opts_.batch_size, opts_.seed, epochs_done_);
    Stage2EpochStats stats;
    stats.epoch = epochs_done_;
    std::size_t images_seen = 0;
    for (const auto& batch : batches) train_step(batch, stats, images_seen);
    const double inv = 1.0 / static_cast<double>(images_seen);
    stats.mse *= inv;
    stats.ssim_loss *= inv;
    stats.perceptual *= inv;
    stats.total *= inv;
    stats.psnr *= inv;
    history_.push_back(stats);
    ++epochs_done_;
}

void Stage2Trainer::run_epochs(int n) {
    for (int i = 0; i < n; ++i) run_epoch();
}

double Stage2Trainer::train_psnr() const {
    double total = 0.0;
    for (const auto& [input, target] : pairs_)
        total += psnr(enhance(params_, input), target);
    return total / static_cast<double>(pairs_.size());
}

} // namespace clut
