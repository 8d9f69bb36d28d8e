#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "clut/adam.hpp"
#include "clut/encoder.hpp"
#include "clut/losses.hpp"
#include "clut/predictor.hpp"
#include "clut/prompts.hpp"

namespace clut {

struct Stage2Options {
    int epochs = 200;
    int batch_size = 8;
    double lr_predictor = 1e-4;
    double lr_lut = 1e-3;
    LossWeights weights;
    double temperature = 1.0;
    std::uint64_t seed = 0;
    PredictorConfig predictor;
    int lut_dim = 33;
};

struct Stage2EpochStats {
    int epoch = 0;
    double mse = 0.0;
    double ssim_loss = 0.0;
    double perceptual = 0.0;
    double total = 0.0;
    double psnr = 0.0;  // mean over the epoch's forward passes, clamped outputs
};

// Stage-2 optimization of the weight predictor and the three LUT lattices on
// the total loss. The encoder and prompts are frozen; passing prompts ==
// nullptr drops the perceptual term (the no-prompts ablation). Deterministic
// given (options.seed, data): batch order, initialization, and updates are
// all derived from the seed.
class Stage2Trainer {
public:
    Stage2Trainer(std::vector<std::pair<Image, Image>> pairs, const Stage2Options& opts,
                  const EncoderPair* enc, const PromptPair* prompts);

    void run_epoch();
    void run_epochs(int n);

    int epochs_done() const { return epochs_done_; }
    long steps_done() const { return steps_done_; }
    const std::vector<Stage2EpochStats>& history() const { return history_; }

    PredictorParams& params() { return params_; }
    const PredictorParams& params() const { return params_; }

    // Mean PSNR of the current model over the training pairs.
    double train_psnr() const;

private:
    void train_step(const std::vector<std::size_t>& batch, Stage2EpochStats& stats,
                    std::size_t& images_seen);

    std::vector<std::pair<Image, Image>> pairs_;
    Stage2Options opts_;
    const EncoderPair* enc_;
    const PromptPair* prompts_;
    std::optional<Embedding> text_original_, text_enhanced_;
    PredictorParams params_;
    std::vector<std::string> tensor_names_;
    std::vector<Adam> optimizers_;
    std::vector<Stage2EpochStats> history_;
    int epochs_done_ = 0;
    long steps_done_ = 0;
};

} // namespace clut
