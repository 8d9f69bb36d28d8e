#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "clut/encoder.hpp"
#include "clut/image.hpp"

namespace clut {

// Learnable original/enhanced prompt token matrices, both N x 512.
struct PromptPair {
    TokenMatrix original_tokens;
    TokenMatrix enhanced_tokens;
    int token_count() const { return original_tokens.rows; }
};

struct LabeledImage {
    Image image;
    int label = 0;  // 0 = original, 1 = enhanced
};

struct LabeledEmbedding {
    Embedding embedding;
    int label = 0;
};

// Seeded standard-normal initialization of both token matrices.
PromptPair init_prompts(int token_count, std::uint64_t seed);

// Softmax-of-cosines probability that the image matches the enhanced prompt:
// exp(t*cos_e) / (exp(t*cos_o) + exp(t*cos_e)), strictly inside (0, 1).
double score(const Image& img, const PromptPair& prompts, const EncoderPair& enc,
             double temperature = 1.0);
double score_embedded(const Embedding& img, const Embedding& text_original,
                      const Embedding& text_enhanced, double temperature = 1.0);

// Mean binary cross entropy of score against labels, probabilities clamped to
// [1e-7, 1 - 1e-7] before the logs.
double prompt_loss(std::span<const LabeledImage> batch, const PromptPair& prompts,
                   const EncoderPair& enc, double temperature = 1.0);
double prompt_loss_embedded(std::span<const LabeledEmbedding> batch,
                            const PromptPair& prompts, const EncoderPair& enc,
                            double temperature = 1.0);

// Same loss plus its gradient with respect to both token matrices.
double prompt_loss_grad(std::span<const LabeledEmbedding> batch,
                        const PromptPair& prompts, const EncoderPair& enc,
                        double temperature, TokenMatrix& grad_original,
                        TokenMatrix& grad_enhanced);

double classify_accuracy(std::span<const LabeledImage> dataset,
                         const PromptPair& prompts, const EncoderPair& enc,
                         double temperature = 1.0);
double classify_accuracy_embedded(std::span<const LabeledEmbedding> dataset,
                                  const PromptPair& prompts, const EncoderPair& enc,
                                  double temperature = 1.0);

struct PromptTrainConfig {
    int epochs = 100;
    int batch_size = 16;      // labeled images per step
    double learning_rate = 1e-3;
    int token_count = 16;
    double temperature = 1.0;
    std::uint64_t seed = 0;
};

struct PromptEpochStats {
    double loss = 0.0;      // mean step loss across the epoch
    double accuracy = 0.0;  // full-set accuracy at the end of the epoch
};

struct PromptTrainResult {
    PromptPair prompts;
    std::vector<PromptEpochStats> history;
};

// Stage-1 training: stochastic gradient steps on prompt_loss with the encoder
// frozen. Deterministic given the seed; epochs = 0 returns the seeded
// initialization unchanged.
PromptTrainResult train_prompts(const std::vector<std::pair<Image, Image>>& pairs,
                                const EncoderPair& enc, const PromptTrainConfig& cfg);
PromptTrainResult train_prompts_embedded(const std::vector<LabeledEmbedding>& dataset,
                                         const EncoderPair& enc,
                                         const PromptTrainConfig& cfg);

} // namespace clut
