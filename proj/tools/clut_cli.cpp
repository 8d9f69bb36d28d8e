// Command-line driver: two-stage training, inference, evaluation, LUT export,
// and a synthetic-dataset generator.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "clut/config.hpp"
#include "clut/cube_io.hpp"
#include "clut/data.hpp"
#include "clut/encoder.hpp"
#include "clut/errors.hpp"
#include "clut/evaluate.hpp"
#include "clut/model_io.hpp"
#include "clut/parallel.hpp"
#include "clut/png_io.hpp"
#include "clut/prompts.hpp"
#include "clut/rng.hpp"
#include "clut/synth.hpp"
#include "clut/trainer.hpp"

namespace fs = std::filesystem;
using namespace clut;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
};

RunConfig resolve_config(const CommonArgs& args, bool require_dataset) {
    RunConfig cfg;
    if (!args.config_path.empty()) cfg = load_config(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    cfg.validate();
    if (require_dataset && cfg.dataset_root.empty())
        throw ConfigError("dataset_root is not set (pass --config with a dataset_root)");
    parallel::set_threads(cfg.threads);
    return cfg;
}

std::unique_ptr<EncoderPair> make_encoder(const RunConfig& cfg) {
    if (cfg.encoder == "mock") return mock_encoder(cfg.effective_encoder_seed());
    AdapterConfig ac;
    ac.backend = cfg.external_backend;
    ac.endpoint = cfg.external_endpoint;
    ac.model = cfg.external_model;
    ac.device = cfg.external_device;
    return external_clip_adapter(ac);
}

void print_warnings(const PairedDataset& ds) {
    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";
}

std::vector<std::pair<Image, Image>> load_all_pairs(const PairedDataset& ds,
                                                    const RunConfig& cfg) {
    std::vector<std::pair<Image, Image>> pairs;
    pairs.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i)
        pairs.push_back(load_pair(ds, i, cfg.image_size, cfg.resize == "area"));
    return pairs;
}

int cmd_train_prompts(const CommonArgs& common, const std::string& out_path,
                      std::string metrics_path) {
    const RunConfig cfg = resolve_config(common, true);
    auto enc = make_encoder(cfg);

    PairedDataset ds = scan_dataset(cfg.dataset_root, cfg.dataset_layout);
    print_warnings(ds);

    std::vector<LabeledEmbedding> dataset;
    dataset.reserve(ds.size() * 2);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto [input, target] = load_pair(ds, i, cfg.image_size, cfg.resize == "area");
        dataset.push_back({enc->encode_image(input), 0});
        dataset.push_back({enc->encode_image(target), 1});
    }

    PromptTrainConfig tc;
    tc.epochs = cfg.stage1_epochs;
    tc.batch_size = cfg.prompt_batch;
    tc.learning_rate = cfg.lr_prompts;
    tc.token_count = cfg.prompt_tokens;
    tc.temperature = cfg.temperature;
    tc.seed = cfg.seed;
    PromptTrainResult result = train_prompts_embedded(dataset, *enc, tc);

    std::map<std::string, std::string> meta;
    meta["config"] = config_to_text(cfg);
    meta["seed"] = std::to_string(cfg.seed);
    meta["epochs"] = std::to_string(cfg.stage1_epochs);
    if (!result.history.empty()) {
        meta["final_loss"] = std::to_string(result.history.back().loss);
        meta["final_accuracy"] = std::to_string(result.history.back().accuracy);
    }
    save_checkpoint(prompts_to_checkpoint(result.prompts, std::move(meta)), out_path);

    if (metrics_path.empty()) metrics_path = out_path + ".metrics.tsv";
    std::ofstream mf(metrics_path);
    if (!mf) throw IoError("cannot open " + metrics_path + " for writing");
    mf << "epoch\tloss\taccuracy\n";
    for (std::size_t e = 0; e < result.history.size(); ++e)
        mf << e << "\t" << result.history[e].loss << "\t" << result.history[e].accuracy
           << "\n";

    std::cout << "trained prompts on " << ds.size() << " pairs";
    if (!result.history.empty())
        std::cout << ", final loss " << result.history.back().loss << ", accuracy "
                  << result.history.back().accuracy;
    std::cout << "\nwrote " << out_path << "\n";
    return 0;
}

int cmd_train_enhancer(const CommonArgs& common, const std::string& prompts_path,
                       const std::string& out_path, std::string metrics_path) {
    const RunConfig cfg = resolve_config(common, true);
    auto enc = make_encoder(cfg);

    PromptPair prompts;
    const PromptPair* prompts_ptr = nullptr;
    if (cfg.prompt_mode == "learned") {
        if (prompts_path.empty())
            throw ConfigError("prompt_mode = learned requires --prompts CKPT");
        prompts = prompts_from_checkpoint(load_checkpoint(prompts_path));
        prompts_ptr = &prompts;
    } else if (cfg.prompt_mode == "random") {
        prompts = init_prompts(cfg.prompt_tokens, Rng::mix(cfg.seed, 0x72616e64ULL));
        prompts_ptr = &prompts;
    }

    PairedDataset ds = scan_dataset(cfg.dataset_root, cfg.dataset_layout);
    print_warnings(ds);
    auto pairs = load_all_pairs(ds, cfg);

    Stage2Options opts;
    opts.epochs = cfg.stage2_epochs;
    opts.batch_size = cfg.image_batch;
    opts.lr_predictor = cfg.lr_predictor;
    opts.lr_lut = cfg.lr_lut;
    opts.weights = cfg.loss_weights();
    opts.temperature = cfg.temperature;
    opts.seed = cfg.seed;
    opts.predictor = {cfg.predictor_base_width, cfg.predictor_stages};
    opts.lut_dim = cfg.lut_dim;

    Stage2Trainer trainer(std::move(pairs), opts, enc.get(), prompts_ptr);

    if (metrics_path.empty()) metrics_path = out_path + ".metrics.tsv";
    std::ofstream mf(metrics_path);
    if (!mf) throw IoError("cannot open " + metrics_path + " for writing");
    mf << "epoch\tmse\tssim_loss\tperceptual\ttotal\tpsnr\n";
    for (int e = 0; e < cfg.stage2_epochs; ++e) {
        trainer.run_epoch();
        const Stage2EpochStats& s = trainer.history().back();
        mf << s.epoch << "\t" << s.mse << "\t" << s.ssim_loss << "\t" << s.perceptual
           << "\t" << s.total << "\t" << s.psnr << "\n";
        if ((e + 1) % 10 == 0 || e + 1 == cfg.stage2_epochs)
            std::cout << "epoch " << (e + 1) << "/" << cfg.stage2_epochs << " total "
                      << s.total << " psnr " << s.psnr << "\n";
    }

    std::map<std::string, std::string> meta;
    meta["config"] = config_to_text(cfg);
    meta["seed"] = std::to_string(cfg.seed);
    meta["epochs"] = std::to_string(cfg.stage2_epochs);
    meta["prompt_mode"] = cfg.prompt_mode;
    save_checkpoint(params_to_checkpoint(trainer.params(), std::move(meta)), out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_enhance(const CommonArgs& common, const std::string& model_path,
                const std::string& in_dir, const std::string& out_dir) {
    if (!common.config_path.empty() || common.seed) {
        const RunConfig cfg = resolve_config(common, false);
        parallel::set_threads(cfg.threads);
    }
    const PredictorParams params = params_from_checkpoint(load_checkpoint(model_path));

    if (!fs::is_directory(in_dir)) throw DataError("input directory missing: " + in_dir);
    fs::create_directories(out_dir);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(in_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    if (files.empty()) {
        std::cerr << "warning: no .png inputs in " << in_dir << "\n";
        return 0;
    }

    int failures = 0;
    for (const auto& file : files) {
        try {
            const Image input = read_png(file);
            const Image output = enhance(params, input);
            write_png(output, fs::path(out_dir) / file.filename());
        } catch (const std::exception& e) {
            std::cerr << "error: " << file.string() << ": " << e.what() << "\n";
            ++failures;
        }
    }
    std::cout << "enhanced " << (files.size() - failures) << "/" << files.size()
              << " images into " << out_dir << "\n";
    return failures == 0 ? 0 : 2;
}

int cmd_evaluate(const std::string& pairs_dir, const std::string& manifest,
                 const std::string& report_path, const std::string& summary_path,
                 bool float_metrics) {
    PairedDataset ds;
    if (!manifest.empty())
        ds = scan_dataset(manifest, "manifest");
    else if (!pairs_dir.empty())
        ds = scan_dataset(pairs_dir, "dirs");
    else
        throw ConfigError("evaluate needs --pairs DIR or --manifest FILE");
    print_warnings(ds);

    const EvalResult result = evaluate_dataset(ds, float_metrics);
    for (const auto& e : result.errors) std::cerr << "error: " << e << "\n";

    if (!report_path.empty()) write_eval_report(result, report_path);
    if (!summary_path.empty()) write_eval_summary(result, summary_path);

    std::printf("pairs scored: %zu\n", result.rows.size());
    std::printf("mean psnr %.4f  ssim %.6f  delta_e %.4f\n", result.mean.psnr,
                result.mean.ssim, result.mean.delta_e);
    return result.errors.empty() ? 0 : 2;
}

int cmd_export_lut(const std::string& model_path, const std::string& image_path,
                   const std::string& out_path) {
    const PredictorParams params = params_from_checkpoint(load_checkpoint(model_path));
    const Image image = read_png(image_path);
    const std::array<double, 3> omega = predict_weights(params, image);
    const Lut3D blended = blend_luts(params.luts, omega);
    write_cube(blended, out_path);
    std::cout << "weights " << omega[0] << " " << omega[1] << " " << omega[2]
              << ", wrote " << out_path << " (dim " << blended.dim << ")\n";
    return 0;
}

int cmd_make_synth(const std::string& out_dir, int count, int size,
                   std::uint64_t seed, int lut_dim) {
    write_synthetic_dataset(out_dir, count, size, seed, lut_dim);
    std::cout << "wrote " << count << " synthetic pairs under " << out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CLIP-guided LUT image enhancement"};
    app.require_subcommand(1);

    CommonArgs common;

    auto add_common = [&common](CLI::App* cmd) {
        cmd->add_option("--config", common.config_path, "run configuration file");
        cmd->add_option("--seed", common.seed, "override the config seed");
    };

    std::string out_path, metrics_path, prompts_path, model_path;
    std::string in_dir, out_dir, pairs_dir, manifest, report_path, summary_path;
    std::string image_path;
    bool float_metrics = false;
    int synth_count = 16, synth_size = 64, synth_lut_dim = 17;
    std::uint64_t synth_seed = 0;

    CLI::App* tp = app.add_subcommand("train-prompts", "stage 1: learn image-perceptive prompts");
    add_common(tp);
    tp->add_option("--out", out_path, "output checkpoint")->capture_default_str();
    tp->add_option("--metrics", metrics_path, "per-epoch metrics TSV");

    CLI::App* te = app.add_subcommand("train-enhancer", "stage 2: train the LUT enhancer");
    add_common(te);
    te->add_option("--prompts", prompts_path, "prompt checkpoint (learned mode)");
    te->add_option("--out", out_path, "output checkpoint")->capture_default_str();
    te->add_option("--metrics", metrics_path, "per-epoch metrics TSV");

    CLI::App* en = app.add_subcommand("enhance", "apply a trained model to a directory");
    add_common(en);
    en->add_option("--model", model_path, "model checkpoint")->required();
    en->add_option("--in", in_dir, "input image directory")->required();
    en->add_option("--out", out_dir, "output image directory")->required();

    CLI::App* ev = app.add_subcommand("evaluate", "PSNR/SSIM/deltaE over paired images");
    ev->add_option("--pairs", pairs_dir, "directory with input/ and target/");
    ev->add_option("--manifest", manifest, "manifest file of pairs");
    ev->add_option("--report", report_path, "write per-image TSV report");
    ev->add_option("--summary", summary_path, "write JSON summary");
    ev->add_flag("--float-metrics", float_metrics, "skip 8-bit quantization");

    CLI::App* ex = app.add_subcommand("export-lut", "export the per-image blended .cube");
    ex->add_option("--model", model_path, "model checkpoint")->required();
    ex->add_option("--image", image_path, "image the weights are predicted from")->required();
    ex->add_option("--out", out_path, "output .cube path")->required();

    CLI::App* ms = app.add_subcommand("make-synth", "generate a synthetic paired dataset");
    ms->add_option("--out", out_dir, "output dataset root")->required();
    ms->add_option("--count", synth_count, "pair count")->capture_default_str();
    ms->add_option("--size", synth_size, "image size")->capture_default_str();
    ms->add_option("--seed", synth_seed, "generator seed")->capture_default_str();
    ms->add_option("--lut-dim", synth_lut_dim, "grade LUT size")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (tp->parsed()) {
            if (out_path.empty()) out_path = "prompts.ckpt";
            return cmd_train_prompts(common, out_path, metrics_path);
        }
        if (te->parsed()) {
            if (out_path.empty()) out_path = "model.ckpt";
            return cmd_train_enhancer(common, prompts_path, out_path, metrics_path);
        }
        if (en->parsed()) return cmd_enhance(common, model_path, in_dir, out_dir);
        if (ev->parsed())
            return cmd_evaluate(pairs_dir, manifest, report_path, summary_path,
                                float_metrics);
        if (ex->parsed()) return cmd_export_lut(model_path, image_path, out_path);
        if (ms->parsed())
            return cmd_make_synth(out_dir, synth_count, synth_size, synth_seed,
                                  synth_lut_dim);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
