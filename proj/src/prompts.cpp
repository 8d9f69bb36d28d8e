#include "clut/prompts.hpp"

#include <cmath>

#include "clut/adam.hpp"
#include "clut/errors.hpp"
#include "clut/rng.hpp"

namespace clut {

namespace {

constexpr double kProbEps = 1e-7;

double logistic(double z) {
    if (z >= 0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct ScoreParts {
    double cos_o, cos_e, yhat;
};

ScoreParts score_parts(const Embedding& img, const Embedding& t_o, const Embedding& t_e,
                       double temperature) {
    ScoreParts p;
    p.cos_o = cosine_similarity(img, t_o);
    p.cos_e = cosine_similarity(img, t_e);
    p.yhat = logistic(temperature * (p.cos_e - p.cos_o));
    return p;
}

} // namespace

PromptPair init_prompts(int token_count, std::uint64_t seed) {
    if (token_count < 1) throw InvalidArgument("init_prompts: token_count must be >= 1");
    PromptPair p;
    Rng ro(Rng::mix(seed, 0x6f726967ULL));
    p.original_tokens = TokenMatrix(token_count);
    for (double& v : p.original_tokens.data) v = ro.normal();
    Rng re(Rng::mix(seed, 0x656e6863ULL));
    p.enhanced_tokens = TokenMatrix(token_count);
    for (double& v : p.enhanced_tokens.data) v = re.normal();
    return p;
}

double score_embedded(const Embedding& img, const Embedding& text_original,
                      const Embedding& text_enhanced, double temperature) {
    return score_parts(img, text_original, text_enhanced, temperature).yhat;
}

double score(const Image& img, const PromptPair& prompts, const EncoderPair& enc,
             double temperature) {
    return score_embedded(enc.encode_image(img), enc.encode_prompt(prompts.original_tokens),
                          enc.encode_prompt(prompts.enhanced_tokens), temperature);
}

double prompt_loss_embedded(std::span<const LabeledEmbedding> batch,
                            const PromptPair& prompts, const EncoderPair& enc,
                            double temperature) {
    if (batch.empty()) throw InvalidArgument("prompt_loss: empty batch");
    const Embedding t_o = enc.encode_prompt(prompts.original_tokens);
    const Embedding t_e = enc.encode_prompt(prompts.enhanced_tokens);
    double total = 0.0;
    for (const auto& item : batch) {
        const double yhat = std::clamp(
            score_parts(item.embedding, t_o, t_e, temperature).yhat, kProbEps,
            1.0 - kProbEps);
        total += item.label == 1 ? -std::log(yhat) : -std::log(1.0 - yhat);
    }
    return total / static_cast<double>(batch.size());
}

double prompt_loss(std::span<const LabeledImage> batch, const PromptPair& prompts,
                   const EncoderPair& enc, double temperature) {
    if (batch.empty()) throw InvalidArgument("prompt_loss: empty batch");
    std::vector<LabeledEmbedding> embedded;
    embedded.reserve(batch.size());
    for (const auto& item : batch)
        embedded.push_back({enc.encode_image(item.image), item.label});
    return prompt_loss_embedded(embedded, prompts, enc, temperature);
}

double prompt_loss_grad(std::span<const LabeledEmbedding> batch,
                        const PromptPair& prompts, const EncoderPair& enc,
                        double temperature, TokenMatrix& grad_original,
                        TokenMatrix& grad_enhanced) {
    if (batch.empty()) throw InvalidArgument("prompt_loss_grad: empty batch");
    const Embedding t_o = enc.encode_prompt(prompts.original_tokens);
    const Embedding t_e = enc.encode_prompt(prompts.enhanced_tokens);
    Embedding grad_to{}, grad_te{};
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const auto& item : batch) {
        const ScoreParts p = score_parts(item.embedding, t_o, t_e, temperature);
        const double yhat = std::clamp(p.yhat, kProbEps, 1.0 - kProbEps);
        total += item.label == 1 ? -std::log(yhat) : -std::log(1.0 - yhat);
        // d(loss)/d(logit) = yhat - y; zero where the clamp is active.
        double dz = 0.0;
        if (p.yhat > kProbEps && p.yhat < 1.0 - kProbEps)
            dz = (p.yhat - static_cast<double>(item.label)) * inv_n;
        const double dce = temperature * dz;
        for (int k = 0; k < kEmbedDim; ++k) {
            grad_te.v[k] += dce * item.embedding.v[k];
            grad_to.v[k] -= dce * item.embedding.v[k];
        }
    }
    grad_original = enc.encode_prompt_backward(prompts.original_tokens, grad_to);
    grad_enhanced = enc.encode_prompt_backward(prompts.enhanced_tokens, grad_te);
    return total * inv_n;
}

double classify_accuracy_embedded(std::span<const LabeledEmbedding> dataset,
                                  const PromptPair& prompts, const EncoderPair& enc,
                                  double temperature) {
    if (dataset.empty()) throw InvalidArgument("classify_accuracy: empty dataset");
    const Embedding t_o = enc.encode_prompt(prompts.original_tokens);
    const Embedding t_e = enc.encode_prompt(prompts.enhanced_tokens);
    std::size_t correct = 0;
    for (const auto& item : dataset) {
        const double yhat = score_parts(item.embedding, t_o, t_e, temperature).yhat;
        const int predicted = yhat >= 0.5 ? 1 : 0;
        if (predicted == item.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

double classify_accuracy(std::span<const LabeledImage> dataset, const PromptPair& prompts,
                         const EncoderPair& enc, double temperature) {
    if (dataset.empty()) throw InvalidArgument("classify_accuracy: empty dataset");
    std::vector<LabeledEmbedding> embedded;
    embedded.reserve(dataset.size());
    for (const auto& item : dataset)
        embedded.push_back({enc.encode_image(item.image), item.label});
    return classify_accuracy_embedded(embedded, prompts, enc, temperature);
}

PromptTrainResult train_prompts_embedded(const std::vector<LabeledEmbedding>& dataset,
                                         const EncoderPair& enc,
                                         const PromptTrainConfig& cfg) {
    if (dataset.empty()) throw InvalidArgument("train_prompts: empty dataset");
    if (cfg.batch_size < 1) throw InvalidArgument("train_prompts: batch_size must be >= 1");
    if (cfg.epochs < 0) throw InvalidArgument("train_prompts: negative epoch count");

    PromptTrainResult result;
    result.prompts = init_prompts(cfg.token_count, cfg.seed);

    Adam opt_o(result.prompts.original_tokens.data.size());
    Adam opt_e(result.prompts.enhanced_tokens.data.size());

    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(Rng::mix(Rng::mix(cfg.seed, 0x7368756646ULL), epoch));
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t steps = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<LabeledEmbedding> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) batch.push_back(dataset[order[i]]);

            TokenMatrix grad_o, grad_e;
            const double loss = prompt_loss_grad(batch, result.prompts, enc,
                                                 cfg.temperature, grad_o, grad_e);
            opt_o.step(result.prompts.original_tokens.data, grad_o.data, cfg.learning_rate);
            opt_e.step(result.prompts.enhanced_tokens.data, grad_e.data, cfg.learning_rate);
            epoch_loss += loss;
            ++steps;
        }
        PromptEpochStats stats;
        stats.loss = epoch_loss / static_cast<double>(steps);
        stats.accuracy = classify_accuracy_embedded(dataset, result.prompts, enc,
                                                    cfg.temperature);
        result.history.push_back(stats);
    }
    return result;
}

PromptTrainResult train_prompts(const std::vector<std::pair<Image, Image>>& pairs,
                                const EncoderPair& enc, const PromptTrainConfig& cfg) {
    if (pairs.empty()) throw InvalidArgument("train_prompts: empty dataset");
    std::vector<LabeledEmbedding> dataset;
    dataset.reserve(pairs.size() * 2);
    for (const auto& [original, enhanced] : pairs) {
        dataset.push_back({enc.encode_image(original), 0});
        dataset.push_back({enc.encode_image(enhanced), 1});
    }
    return train_prompts_embedded(dataset, enc, cfg);
}

} // namespace clut
