#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "clut/checkpoint.hpp"
#include "clut/config.hpp"
#include "clut/errors.hpp"
#include "clut/model_io.hpp"
#include "clut/rng.hpp"
#include "test_util.hpp"

using namespace clut;
using namespace clut::testutil;

namespace {

std::string file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("checkpoint save/load round trip") {
    TempDir tmp("ckpt");
    const auto path = tmp.path() / "test.ckpt";

    Checkpoint ckpt;
    ckpt.metadata["stage"] = "model";
    ckpt.metadata["seed"] = "42";
    Rng rng(1);
    NamedTensor t1{"alpha", {2, 3}, {}};
    for (int i = 0; i < 6; ++i) t1.values.push_back(rng.normal());
    NamedTensor t2{"beta", {4}, {0.25, -1.5, 3.0, 0.0}};  // exact in float32
    ckpt.tensors = {t1, t2};

    save_checkpoint(ckpt, path);
    const Checkpoint back = load_checkpoint(path);

    CHECK(back.metadata == ckpt.metadata);
    REQUIRE(back.tensors.size() == 2);
    CHECK(back.tensors[0].name == "alpha");
    CHECK(back.tensors[0].dims == std::vector<std::uint64_t>{2, 3});
    for (int i = 0; i < 6; ++i)
        CHECK(back.tensors[0].values[i] ==
              static_cast<double>(static_cast<float>(t1.values[i])));
    CHECK(back.tensors[1].values == t2.values);

    SUBCASE("save(load(f)) is byte-identical") {
        const auto path2 = tmp.path() / "again.ckpt";
        save_checkpoint(back, path2);
        CHECK(file_bytes(path) == file_bytes(path2));
    }

    SUBCASE("bad magic is rejected") {
        const auto bad = tmp.path() / "bad.ckpt";
        std::ofstream(bad, std::ios::binary) << "NOTACKPTxxxxxxx";
        CHECK_THROWS_WITH_AS(load_checkpoint(bad), doctest::Contains("magic"), ParseError);
    }

    SUBCASE("wrong version is a clean error") {
        std::string bytes = file_bytes(path);
        bytes[8] = 99;  // version field follows the 8-byte magic
        const auto bad = tmp.path() / "vers.ckpt";
        std::ofstream(bad, std::ios::binary) << bytes;
        CHECK_THROWS_WITH_AS(load_checkpoint(bad), doctest::Contains("version 99"),
                             ParseError);
    }

    SUBCASE("truncation is a clean error") {
        std::string bytes = file_bytes(path);
        bytes.resize(bytes.size() / 2);
        const auto bad = tmp.path() / "trunc.ckpt";
        std::ofstream(bad, std::ios::binary) << bytes;
        CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
    }

    SUBCASE("missing tensors are reported by name") {
        CHECK_THROWS_WITH_AS(back.require("gamma"), doctest::Contains("gamma"),
                             ParseError);
    }
}

TEST_CASE("config defaults and round trip") {
    const RunConfig def;
    CHECK(def.stage1_epochs == 100);
    CHECK(def.prompt_batch == 16);
    CHECK(def.stage2_epochs == 200);
    CHECK(def.image_batch == 8);
    CHECK(def.lut_dim == 33);
    CHECK(def.loss_w_mse == 1.0);
    CHECK(def.loss_w_perceptual == 0.4);
    CHECK(def.loss_w_ssim == 0.4);
    CHECK(def.prompt_mode == "learned");
    CHECK(def.encoder == "mock");
    CHECK(def.image_size == 256);
    CHECK(def.prompt_tokens == 16);
    CHECK(def.lr_prompts == 1e-3);
    CHECK(def.lr_predictor == 1e-4);
    CHECK(def.lr_lut == 1e-3);

    SUBCASE("text round trip is lossless") {
        RunConfig cfg;
        cfg.seed = 123456789012345ULL;
        cfg.dataset_root = "/data/fivek";
        cfg.lr_predictor = 0.000123456789012345;
        cfg.loss_w_perceptual = 0.12345678901234567;
        cfg.prompt_mode = "random";
        cfg.encoder_seed_set = true;
        cfg.encoder_seed = 99;
        cfg.threads = 4;
        const RunConfig back = parse_config_text(config_to_text(cfg));
        CHECK(config_to_text(back) == config_to_text(cfg));
        CHECK(back.seed == cfg.seed);
        CHECK(back.lr_predictor == cfg.lr_predictor);
        CHECK(back.loss_w_perceptual == cfg.loss_w_perceptual);
        CHECK(back.encoder_seed == 99);
        CHECK(back.effective_encoder_seed() == 99);
    }

    SUBCASE("encoder seed defaults to the run seed") {
        RunConfig cfg;
        cfg.seed = 7;
        CHECK(cfg.effective_encoder_seed() == 7);
        const RunConfig back = parse_config_text(config_to_text(cfg));
        CHECK(back.effective_encoder_seed() == 7);
    }

    SUBCASE("unknown keys fail fast") {
        CHECK_THROWS_WITH_AS(parse_config_text("lut_dims = 33\n"),
                             doctest::Contains("unknown key"), ConfigError);
    }

    SUBCASE("malformed values are rejected") {
        CHECK_THROWS_AS(parse_config_text("lut_dim = many\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("seed 5\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("lut_dim = 1\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("prompt_mode = sometimes\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("resize = nearest\n"), ConfigError);
    }

    SUBCASE("comments and blank lines are ignored") {
        const RunConfig cfg =
            parse_config_text("# comment\n\nlut_dim = 17  # inline\nseed = 3\n");
        CHECK(cfg.lut_dim == 17);
        CHECK(cfg.seed == 3);
    }
}

TEST_CASE("model parameter checkpoints") {
    TempDir tmp("model_io");
    const auto path = tmp.path() / "model.ckpt";

    const PredictorConfig cfg{4, 2};
    PredictorParams params = init_predictor(cfg, 5, 77);
    Rng rng(2);
    for (double& v : params.head_weight) v = rng.normal();
    for (double& v : params.luts[1].data) v += 0.25;  // exact in float32

    save_checkpoint(params_to_checkpoint(params, {{"seed", "77"}}), path);
    const Checkpoint ck = load_checkpoint(path);
    CHECK(ck.metadata.at("kind") == "model");
    CHECK(ck.metadata.at("seed") == "77");
    const PredictorParams back = params_from_checkpoint(ck);

    CHECK(back.cfg.base_width == 4);
    CHECK(back.cfg.stage_count == 2);
    CHECK(back.luts[0].dim == 5);
    std::vector<std::vector<double>*> orig_t, back_t;
    params.for_each_tensor(
        [&](const std::string&, std::vector<double>& t) { orig_t.push_back(&t); });
    const_cast<PredictorParams&>(back).for_each_tensor(
        [&](const std::string&, std::vector<double>& t) { back_t.push_back(&t); });
    REQUIRE(orig_t.size() == back_t.size());
    for (std::size_t i = 0; i < orig_t.size(); ++i) {
        REQUIRE(orig_t[i]->size() == back_t[i]->size());
        for (std::size_t j = 0; j < orig_t[i]->size(); ++j)
            CHECK((*back_t[i])[j] ==
                  static_cast<double>(static_cast<float>((*orig_t[i])[j])));
    }

    SUBCASE("prompt checkpoints round trip") {
        const PromptPair p = init_prompts(6, 5);
        const auto ppath = tmp.path() / "prompts.ckpt";
        save_checkpoint(prompts_to_checkpoint(p, {}), ppath);
        const PromptPair pback = prompts_from_checkpoint(load_checkpoint(ppath));
        CHECK(pback.token_count() == 6);
        for (std::size_t i = 0; i < p.original_tokens.data.size(); ++i)
            CHECK(pback.original_tokens.data[i] ==
                  static_cast<double>(static_cast<float>(p.original_tokens.data[i])));
    }

    SUBCASE("a prompts checkpoint does not load as a model") {
        const auto ppath = tmp.path() / "p.ckpt";
        save_checkpoint(prompts_to_checkpoint(init_prompts(2, 1), {}), ppath);
        CHECK_THROWS_AS(params_from_checkpoint(load_checkpoint(ppath)), ParseError);
    }
}
