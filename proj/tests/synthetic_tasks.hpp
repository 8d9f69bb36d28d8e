#pragma once

// Synthetic workloads shared by the unit tests and the acceptance suite.

#include <cmath>
#include <utility>
#include <vector>

#include "clut/encoder.hpp"
#include "clut/image.hpp"
#include "clut/prompts.hpp"
#include "clut/rng.hpp"

namespace clut::testutil {

// Blocky image aligned with the encoder's 8x8 pooling grid: every grid cell
// is one uniform random color in [lo, hi].
inline Image block_image(int size, std::uint64_t seed, double lo = 0.2,
                         double hi = 0.8) {
    Rng rng(Rng::mix(seed, 0x626c6f636bULL));
    Image img(size, size);
    const int cell = size / 8;
    double colors[8][8][3];
    for (int by = 0; by < 8; ++by)
        for (int bx = 0; bx < 8; ++bx)
            for (int c = 0; c < 3; ++c) colors[by][bx][c] = rng.uniform(lo, hi);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const int by = std::min(y / cell, 7), bx = std::min(x / cell, 7);
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = colors[by][bx][c];
        }
    return img;
}

// Brightness reshaping used for the prompt-learning task: lift the top half
// and dim the bottom half. The score is a homogeneous function of the
// embedding (no intercept), so the enhanced class must differ from the
// originals in embedding *direction*; a spatially graded shift does that,
// while a uniform global shift only moves the magnitude along the shared
// cone axis and stays inseparable.
inline Image brighten(const Image& img) {
    Image out = img;
    for (int y = 0; y < out.height; ++y) {
        const double shift = y < out.height / 2 ? 0.18 : -0.10;
        for (int x = 0; x < out.width; ++x)
            for (int c = 0; c < 3; ++c)
                out.at(y, x, c) = std::clamp(out.at(y, x, c) + shift, 0.0, 1.0);
    }
    return out;
}

// Original/enhanced pairs where the enhanced side is the brightened copy.
inline std::vector<std::pair<Image, Image>> brightness_pairs(int count, int size,
                                                             std::uint64_t seed) {
    std::vector<std::pair<Image, Image>> pairs;
    pairs.reserve(count);
    for (int i = 0; i < count; ++i) {
        Image original = block_image(size, Rng::mix(seed, i));
        Image enhanced = brighten(original);
        pairs.emplace_back(std::move(original), std::move(enhanced));
    }
    return pairs;
}

inline std::vector<LabeledEmbedding> embed_pairs(
    const std::vector<std::pair<Image, Image>>& pairs, const EncoderPair& enc) {
    std::vector<LabeledEmbedding> out;
    out.reserve(pairs.size() * 2);
    for (const auto& [original, enhanced] : pairs) {
        out.push_back({enc.encode_image(original), 0});
        out.push_back({enc.encode_image(enhanced), 1});
    }
    return out;
}

// Logistic-regression oracle on raw embeddings: full-batch gradient descent
// on w with the same homogeneous form the prompt score uses. Returns
// classification accuracy of the fitted separator on `eval`.
inline double logistic_oracle_accuracy(const std::vector<LabeledEmbedding>& train,
                                       const std::vector<LabeledEmbedding>& eval,
                                       int iters = 3000, double lr = 5.0) {
    std::vector<double> w(kEmbedDim, 0.0);
    const double inv_n = 1.0 / static_cast<double>(train.size());
    for (int it = 0; it < iters; ++it) {
        std::vector<double> grad(kEmbedDim, 0.0);
        for (const auto& item : train) {
            double z = 0.0;
            for (int k = 0; k < kEmbedDim; ++k) z += w[k] * item.embedding.v[k];
            const double p = 1.0 / (1.0 + std::exp(-z));
            const double d = (p - item.label) * inv_n;
            for (int k = 0; k < kEmbedDim; ++k) grad[k] += d * item.embedding.v[k];
        }
        for (int k = 0; k < kEmbedDim; ++k) w[k] -= lr * grad[k];
    }
    std::size_t correct = 0;
    for (const auto& item : eval) {
        double z = 0.0;
        for (int k = 0; k < kEmbedDim; ++k) z += w[k] * item.embedding.v[k];
        if ((z >= 0.0 ? 1 : 0) == item.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(eval.size());
}

} // namespace clut::testutil
