#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "clut/image.hpp"

namespace clut {

inline constexpr int kEmbedDim = 512;

// Unit-norm 512-dim vector in the shared text/image embedding space.
struct Embedding {
    std::array<double, kEmbedDim> v{};
    double dot(const Embedding& o) const {
        double acc = 0.0;
        for (int i = 0; i < kEmbedDim; ++i) acc += v[i] * o.v[i];
        return acc;
    }
    double norm() const;
};

// N x 512 matrix of continuous prompt tokens.
struct TokenMatrix {
    int rows = 0;
    std::vector<double> data;

    TokenMatrix() = default;
    explicit TokenMatrix(int n)
        : rows(n), data(static_cast<std::size_t>(n) * kEmbedDim, 0.0) {}
    double& at(int r, int d) { return data[static_cast<std::size_t>(r) * kEmbedDim + d]; }
    double at(int r, int d) const { return data[static_cast<std::size_t>(r) * kEmbedDim + d]; }
};

double cosine_similarity(const Embedding& a, const Embedding& b);

// Frozen text/image encoder pair. Encoders expose no trainable parameters;
// the backward hooks return input-space gradients for a given embedding-space
// gradient, which is all prompt learning and the perceptual loss need.
class EncoderPair {
public:
    virtual ~EncoderPair() = default;

    virtual Embedding encode_image(const Image& img) const = 0;
    virtual Embedding encode_prompt(const TokenMatrix& tokens) const = 0;

    // d(loss)/d(pixels) given d(loss)/d(embedding).
    virtual Image encode_image_backward(const Image& img,
                                        const Embedding& grad_embed) const = 0;
    // d(loss)/d(tokens) given d(loss)/d(embedding).
    virtual TokenMatrix encode_prompt_backward(const TokenMatrix& tokens,
                                               const Embedding& grad_embed) const = 0;

    virtual std::string name() const = 0;
    virtual bool deterministic() const = 0;
};

// Deterministic stand-in for the frozen CLIP pair: images are area-averaged
// to 8x8, flattened and pushed through a fixed seed-derived 192x512 matrix;
// prompts are mean-pooled and pushed through a fixed 512x512 matrix. Both
// paths end in L2 normalization and are differentiable.
std::unique_ptr<EncoderPair> mock_encoder(std::uint64_t seed);

struct AdapterConfig {
    std::string backend;    // e.g. "http"
    std::string endpoint;   // service URL for http backends
    std::string model;      // model identifier
    std::string device;     // device hint passed through to the backend
};

// Wraps an external CLIP service behind the EncoderPair contract. Construction
// validates the config; a missing or unusable backend raises ConfigError.
// Inference-only: the backward hooks are unavailable across a remote boundary
// and throw ConfigError, so training requires the mock encoder.
std::unique_ptr<EncoderPair> external_clip_adapter(const AdapterConfig& config);

// Exact fractional-area box downsample to grid_h x grid_w per channel,
// shared by the mock encoder and the area-resize preprocessing option.
Image resize_area(const Image& img, int out_h, int out_w);

} // namespace clut
