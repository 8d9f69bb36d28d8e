#include "clut/encoder.hpp"

#include <cmath>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "clut/errors.hpp"
#include "clut/rng.hpp"

namespace clut {

double Embedding::norm() const { return std::sqrt(dot(*this)); }

double cosine_similarity(const Embedding& a, const Embedding& b) { return a.dot(b); }

namespace {

// Per-axis overlap table for exact fractional-area averaging.
struct AxisMap {
    // For each output index: [begin, end) into (index, weight) pairs.
    std::vector<std::pair<int, double>> taps;
    std::vector<std::size_t> offsets;
    double cell_span = 0.0;
};

AxisMap build_axis(int in_n, int out_n) {
    AxisMap m;
    m.cell_span = static_cast<double>(in_n) / out_n;
    m.offsets.push_back(0);
    for (int o = 0; o < out_n; ++o) {
        const double lo = o * m.cell_span;
        const double hi = (o + 1) * m.cell_span;
        for (int i = static_cast<int>(lo); i < in_n && i < hi; ++i) {
            const double w = std::min<double>(i + 1, hi) - std::max<double>(i, lo);
            if (w > 0) m.taps.emplace_back(i, w);
        }
        m.offsets.push_back(m.taps.size());
    }
    return m;
}

} // namespace

Image resize_area(const Image& img, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1 || img.height < 1 || img.width < 1)
        throw InvalidArgument("resize_area: empty image or target");
    const AxisMap ym = build_axis(img.height, out_h);
    const AxisMap xm = build_axis(img.width, out_w);
    Image out(out_h, out_w);
    const double inv_area = 1.0 / (ym.cell_span * xm.cell_span);
#pragma omp parallel for schedule(static)
    for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
            double acc[3] = {0, 0, 0};
            for (std::size_t yi = ym.offsets[oy]; yi < ym.offsets[oy + 1]; ++yi)
                for (std::size_t xi = xm.offsets[ox]; xi < xm.offsets[ox + 1]; ++xi) {
                    const double w = ym.taps[yi].second * xm.taps[xi].second;
                    const double* px = &img.data[(static_cast<std::size_t>(ym.taps[yi].first) *
                                                      img.width +
                                                  xm.taps[xi].first) *
                                                 3];
                    for (int c = 0; c < 3; ++c) acc[c] += w * px[c];
                }
            for (int c = 0; c < 3; ++c) out.at(oy, ox, c) = acc[c] * inv_area;
        }
    }
    return out;
}

namespace {

constexpr int kGrid = 8;
constexpr int kImageFeat = kGrid * kGrid * 3;

void normalize_backward(const std::vector<double>& w, const Embedding& grad_u,
                        std::vector<double>& grad_w) {
    double n2 = 0.0, wg = 0.0;
    for (int k = 0; k < kEmbedDim; ++k) {
        n2 += w[k] * w[k];
        wg += w[k] * grad_u.v[k];
    }
    const double n = std::sqrt(n2);
    if (n == 0.0) throw InvalidArgument("encoder: zero-norm pre-embedding");
    const double n3 = n * n2;
    grad_w.resize(kEmbedDim);
    for (int k = 0; k < kEmbedDim; ++k)
        grad_w[k] = grad_u.v[k] / n - w[k] * wg / n3;
}

class MockEncoder final : public EncoderPair {
public:
    explicit MockEncoder(std::uint64_t seed) : seed_(seed) {
        Rng ri(Rng::mix(seed, 0x696d61676500ULL));
        image_proj_ = normal_vector(ri, static_cast<std::size_t>(kImageFeat) * kEmbedDim);
        Rng rt(Rng::mix(seed, 0x7465787400ULL));
        text_proj_ = normal_vector(rt, static_cast<std::size_t>(kEmbedDim) * kEmbedDim);
    }

    Embedding encode_image(const Image& img) const override {
        std::vector<double> feat = image_features(img);
        std::vector<double> w(kEmbedDim, 0.0);
        for (int j = 0; j < kImageFeat; ++j) {
            const double vj = feat[j];
            const double* row = &image_proj_[static_cast<std::size_t>(j) * kEmbedDim];
            for (int k = 0; k < kEmbedDim; ++k) w[k] += vj * row[k];
        }
        return normalized(w);
    }

    Embedding encode_prompt(const TokenMatrix& tokens) const override {
        std::vector<double> pool = mean_pool(tokens);
        std::vector<double> w(kEmbedDim, 0.0);
        for (int d = 0; d < kEmbedDim; ++d) {
            const double pd = pool[d];
            const double* row = &text_proj_[static_cast<std::size_t>(d) * kEmbedDim];
            for (int k = 0; k < kEmbedDim; ++k) w[k] += pd * row[k];
        }
        return normalized(w);
    }

    Image encode_image_backward(const Image& img,
                                const Embedding& grad_embed) const override {
        std::vector<double> feat = image_features(img);
        std::vector<double> w(kEmbedDim, 0.0);
        for (int j = 0; j < kImageFeat; ++j) {
            const double vj = feat[j];
            const double* row = &image_proj_[static_cast<std::size_t>(j) * kEmbedDim];
            for (int k = 0; k < kEmbedDim; ++k) w[k] += vj * row[k];
        }
        std::vector<double> grad_w;
        normalize_backward(w, grad_embed, grad_w);
        std::vector<double> grad_feat(kImageFeat, 0.0);
        for (int j = 0; j < kImageFeat; ++j) {
            const double* row = &image_proj_[static_cast<std::size_t>(j) * kEmbedDim];
            double acc = 0.0;
            for (int k = 0; k < kEmbedDim; ++k) acc += row[k] * grad_w[k];
            grad_feat[j] = acc;
        }
        // Adjoint of the area average: each pixel receives its coverage share.
        const AxisMap ym = build_axis(img.height, kGrid);
        const AxisMap xm = build_axis(img.width, kGrid);
        const double inv_area = 1.0 / (ym.cell_span * xm.cell_span);
        Image grad(img.height, img.width);
        for (int oy = 0; oy < kGrid; ++oy)
            for (int ox = 0; ox < kGrid; ++ox)
                for (std::size_t yi = ym.offsets[oy]; yi < ym.offsets[oy + 1]; ++yi)
                    for (std::size_t xi = xm.offsets[ox]; xi < xm.offsets[ox + 1]; ++xi) {
                        const double w2 =
                            ym.taps[yi].second * xm.taps[xi].second * inv_area;
                        double* px = &grad.data[(static_cast<std::size_t>(ym.taps[yi].first) *
                                                     img.width +
                                                 xm.taps[xi].first) *
                                                3];
                        for (int c = 0; c < 3; ++c)
                            px[c] += w2 * grad_feat[(oy * kGrid + ox) * 3 + c];
                    }
        return grad;
    }

    TokenMatrix encode_prompt_backward(const TokenMatrix& tokens,
                                       const Embedding& grad_embed) const override {
        std::vector<double> pool = mean_pool(tokens);
        std::vector<double> w(kEmbedDim, 0.0);
        for (int d = 0; d < kEmbedDim; ++d) {
            const double pd = pool[d];
            const double* row = &text_proj_[static_cast<std::size_t>(d) * kEmbedDim];
            for (int k = 0; k < kEmbedDim; ++k) w[k] += pd * row[k];
        }
        std::vector<double> grad_w;
        normalize_backward(w, grad_embed, grad_w);
        TokenMatrix grad(tokens.rows);
        const double inv_rows = 1.0 / tokens.rows;
        for (int d = 0; d < kEmbedDim; ++d) {
            const double* row = &text_proj_[static_cast<std::size_t>(d) * kEmbedDim];
            double acc = 0.0;
            for (int k = 0; k < kEmbedDim; ++k) acc += row[k] * grad_w[k];
            const double gd = acc * inv_rows;
            for (int r = 0; r < tokens.rows; ++r) grad.at(r, d) = gd;
        }
        return grad;
    }

    std::string name() const override { return "mock(" + std::to_string(seed_) + ")"; }
    bool deterministic() const override { return true; }

private:
    static std::vector<double> image_features(const Image& img) {
        Image small = resize_area(img, kGrid, kGrid);
        return small.data;
    }

    static std::vector<double> mean_pool(const TokenMatrix& tokens) {
        if (tokens.rows < 1) throw InvalidArgument("encode_prompt: empty token matrix");
        std::vector<double> pool(kEmbedDim, 0.0);
        for (int r = 0; r < tokens.rows; ++r)
            for (int d = 0; d < kEmbedDim; ++d) pool[d] += tokens.at(r, d);
        for (double& v : pool) v /= tokens.rows;
        return pool;
    }

    static Embedding normalized(const std::vector<double>& w) {
        double n2 = 0.0;
        for (double v : w) n2 += v * v;
        const double n = std::sqrt(n2);
        if (n == 0.0) throw InvalidArgument("encoder: zero-norm pre-embedding");
        Embedding e;
        for (int k = 0; k < kEmbedDim; ++k) e.v[k] = w[k] / n;
        return e;
    }

    std::uint64_t seed_;
    std::vector<double> image_proj_;  // kImageFeat x kEmbedDim
    std::vector<double> text_proj_;   // kEmbedDim x kEmbedDim
};

class HttpClipAdapter final : public EncoderPair {
public:
    explicit HttpClipAdapter(AdapterConfig config) : cfg_(std::move(config)) {}

    Embedding encode_image(const Image& img) const override {
        nlohmann::json req;
        req["model"] = cfg_.model;
        req["device"] = cfg_.device;
        req["height"] = img.height;
        req["width"] = img.width;
        req["pixels"] = img.data;
        return request_embedding("/embed_image", req);
    }

    Embedding encode_prompt(const TokenMatrix& tokens) const override {
        nlohmann::json req;
        req["model"] = cfg_.model;
        req["device"] = cfg_.device;
        req["rows"] = tokens.rows;
        req["tokens"] = tokens.data;
        return request_embedding("/embed_tokens", req);
    }

    Image encode_image_backward(const Image&, const Embedding&) const override {
        throw ConfigError(
            "external encoder backend does not expose gradients; "
            "training requires the mock encoder");
    }

    TokenMatrix encode_prompt_backward(const TokenMatrix&, const Embedding&) const override {
        throw ConfigError(
            "external encoder backend does not expose gradients; "
            "training requires the mock encoder");
    }

    std::string name() const override { return "external(" + cfg_.endpoint + ")"; }
    bool deterministic() const override { return false; }

private:
    Embedding request_embedding(const std::string& path, const nlohmann::json& req) const {
        httplib::Client client(cfg_.endpoint);
        client.set_connection_timeout(5, 0);
        client.set_read_timeout(30, 0);
        auto res = client.Post(path, req.dump(), "application/json");
        if (!res)
            throw ConfigError("encoder backend unreachable at " + cfg_.endpoint);
        if (res->status != 200)
            throw ConfigError("encoder backend returned HTTP " +
                              std::to_string(res->status));
        nlohmann::json body = nlohmann::json::parse(res->body, nullptr, false);
        if (body.is_discarded() || !body.contains("embedding") ||
            !body["embedding"].is_array())
            throw ConfigError("encoder backend returned malformed response");
        const auto& arr = body["embedding"];
        if (static_cast<int>(arr.size()) != kEmbedDim)
            throw ConfigError("encoder backend returned embedding width " +
                              std::to_string(arr.size()) + ", expected " +
                              std::to_string(kEmbedDim));
        std::vector<double> w(kEmbedDim);
        for (int k = 0; k < kEmbedDim; ++k) w[k] = arr[k].get<double>();
        double n2 = 0.0;
        for (double v : w) n2 += v * v;
        if (n2 == 0.0) throw ConfigError("encoder backend returned a zero embedding");
        Embedding e;
        const double inv = 1.0 / std::sqrt(n2);
        for (int k = 0; k < kEmbedDim; ++k) e.v[k] = w[k] * inv;
        return e;
    }

    AdapterConfig cfg_;
};

} // namespace

std::unique_ptr<EncoderPair> mock_encoder(std::uint64_t seed) {
    return std::make_unique<MockEncoder>(seed);
}

std::unique_ptr<EncoderPair> external_clip_adapter(const AdapterConfig& config) {
    if (config.backend.empty())
        throw ConfigError("external encoder requires a backend kind");
    if (config.backend != "http")
        throw ConfigError("unknown encoder backend '" + config.backend +
                          "' (supported: http)");
    if (config.endpoint.empty())
        throw ConfigError("external http encoder requires an endpoint");
    return std::make_unique<HttpClipAdapter>(config);
}

} // namespace clut
