#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "clut/errors.hpp"
#include "clut/losses.hpp"
#include "clut/metrics.hpp"
#include "clut/rng.hpp"
#include "test_util.hpp"

using namespace clut;
using namespace clut::testutil;

TEST_CASE("mse_loss") {
    Rng rng(1);
    const Image a = random_image(8, 8, rng);
    CHECK(mse_loss(a, a) == 0.0);

    Image low(8, 8);
    for (std::size_t i = 0; i < low.data.size(); ++i) low.data[i] = a.data[i] * 0.5;
    Image shifted = low;
    for (double& v : shifted.data) v += 0.1;
    CHECK(mse_loss(low, shifted) == doctest::Approx(0.01).epsilon(1e-12));

    SUBCASE("brute-force oracle") {
        const Image b = random_image(8, 8, rng);
        double sum = 0;
        for (std::size_t i = 0; i < a.data.size(); ++i)
            sum += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
        CHECK(std::abs(mse_loss(a, b) - sum / a.data.size()) <= 1e-12);
    }

    SUBCASE("gradient") {
        Image x = random_image(6, 6, rng);
        const Image t = random_image(6, 6, rng);
        const Image grad = mse_loss_backward(x, t);
        auto loss = [&] { return mse_loss(x, t); };
        Rng pick(2);
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t i = pick.below(x.data.size());
            CHECK(rel_err(grad.data[i], fd_central(&x.data[i], loss)) <= 1e-4);
        }
    }
}

TEST_CASE("ssim_loss") {
    Rng rng(3);
    const Image a = random_image(16, 16, rng);
    CHECK(ssim_loss(a, a) == 0.0);

    const Image b = random_image(16, 16, rng);
    const double l = ssim_loss(a, b);
    CHECK(l >= 0.0);
    CHECK(l <= 2.0);

    SUBCASE("gradient") {
        Image x = random_image(16, 16, rng);
        const Image t = random_image(16, 16, rng);
        const Image grad = ssim_loss_backward(x, t);
        auto loss = [&] { return ssim_loss(x, t); };
        Rng pick(4);
        for (int trial = 0; trial < 25; ++trial) {
            const std::size_t i = pick.below(x.data.size());
            CHECK(rel_err(grad.data[i], fd_central(&x.data[i], loss)) <= 1e-4);
        }
    }
}

TEST_CASE("perceptual prompt loss") {
    auto enc = mock_encoder(5);
    Rng rng(6);

    SUBCASE("equal cosines give one half") {
        PromptPair p = init_prompts(4, 7);
        p.enhanced_tokens = p.original_tokens;
        const Image img = random_image(16, 16, rng);
        CHECK(perceptual_prompt_loss(img, p, *enc) == 0.5);
    }

    SUBCASE("complement identity against score") {
        for (int rep = 0; rep < 8; ++rep) {
            const Image img = random_image(12, 12, rng);
            const PromptPair p = init_prompts(4, 100 + rep);
            const double s = score(img, p, *enc);
            const double perc = perceptual_prompt_loss(img, p, *enc);
            CHECK(std::abs(perc + s - 1.0) <= 1e-12);
            CHECK(perc > 0.0);
            CHECK(perc < 1.0);
        }
    }

    SUBCASE("cos_o 0.9 vs cos_e 0.1 is the logistic of 0.8") {
        Embedding u{}, t_o{}, t_e{};
        u.v[0] = 1.0;
        t_o.v[0] = 0.9;
        t_o.v[1] = std::sqrt(1.0 - 0.81);
        t_e.v[0] = 0.1;
        t_e.v[2] = std::sqrt(1.0 - 0.01);
        const double expected = 0.6899744811276125;  // 1/(1+exp(-0.8))
        CHECK(std::abs(perceptual_prompt_loss_embedded(u, t_o, t_e) - expected) <= 1e-5);
    }

    SUBCASE("gradient w.r.t. the output image") {
        Image out = random_image(16, 16, rng);
        const PromptPair p = init_prompts(4, 11);
        const Embedding t_o = enc->encode_prompt(p.original_tokens);
        const Embedding t_e = enc->encode_prompt(p.enhanced_tokens);
        Image grad;
        perceptual_prompt_loss_grad(out, t_o, t_e, *enc, 1.0, grad);
        auto loss = [&] {
            return perceptual_prompt_loss_embedded(enc->encode_image(out), t_o, t_e);
        };
        Rng pick(12);
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t i = pick.below(out.data.size());
            CHECK(rel_err(grad.data[i], fd_central(&out.data[i], loss)) <= 1e-4);
        }
    }
}

TEST_CASE("total_loss composition") {
    auto enc = mock_encoder(13);
    Rng rng(14);

    SUBCASE("identical output and equal-cosine prompts total 0.2") {
        PromptPair p = init_prompts(4, 15);
        p.enhanced_tokens = p.original_tokens;
        const Image img = random_image(16, 16, rng);
        const LossBreakdown b = total_loss(img, img, &p, enc.get());
        CHECK(b.mse == 0.0);
        CHECK(b.ssim_loss == 0.0);
        CHECK(b.perceptual == 0.5);
        CHECK(b.total == doctest::Approx(0.2).epsilon(1e-12));
    }

    SUBCASE("degenerate weights reduce to the mse") {
        const Image out = random_image(16, 16, rng);
        const Image target = random_image(16, 16, rng);
        const PromptPair p = init_prompts(4, 16);
        const LossBreakdown b =
            total_loss(out, target, &p, enc.get(), LossWeights{1.0, 0.0, 0.0});
        CHECK(b.total == b.mse);
    }

    SUBCASE("breakdown equals hand-summed components") {
        const Image out = random_image(16, 16, rng);
        const Image target = random_image(16, 16, rng);
        const PromptPair p = init_prompts(4, 17);
        const LossBreakdown b = total_loss(out, target, &p, enc.get());
        const double mse = mse_loss(out, target);
        const double sl = ssim_loss(out, target);
        const double perc = perceptual_prompt_loss(out, p, *enc);
        CHECK(std::abs(b.total - (mse + 0.4 * perc + 0.4 * sl)) <= 1e-9);
        CHECK(std::abs(b.total - (b.mse + 0.4 * b.perceptual + 0.4 * b.ssim_loss)) <=
              1e-9);
    }

    SUBCASE("no-prompts mode records exactly zero perceptual") {
        const Image out = random_image(16, 16, rng);
        const Image target = random_image(16, 16, rng);
        const LossBreakdown b = total_loss(out, target, nullptr, nullptr);
        CHECK(b.perceptual == 0.0);
        CHECK(std::abs(b.total - (b.mse + 0.4 * b.ssim_loss)) <= 1e-12);
    }

    SUBCASE("gradient w.r.t. output pixels") {
        Image out = random_image(16, 16, rng);
        const Image target = random_image(16, 16, rng);
        const PromptPair p = init_prompts(4, 18);
        Image grad;
        total_loss_grad(out, target, &p, enc.get(), grad);
        auto loss = [&] { return total_loss(out, target, &p, enc.get()).total; };
        Rng pick(19);
        for (int trial = 0; trial < 25; ++trial) {
            const std::size_t i = pick.below(out.data.size());
            CHECK(rel_err(grad.data[i], fd_central(&out.data[i], loss)) <= 1e-4);
        }
    }
}
