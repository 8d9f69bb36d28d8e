#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "clut/losses.hpp"

namespace clut {

// Flat key = value run configuration. Unknown keys are errors. The defaults
// below are the canonical run settings; every key serializes losslessly.
struct RunConfig {
    std::uint64_t seed = 0;
    std::string dataset_root;
    std::string dataset_layout = "dirs";  // dirs | manifest
    std::string resize = "bilinear";      // bilinear | area
    int image_size = 256;

    int stage1_epochs = 100;
    int prompt_batch = 16;   // labeled images per step
    int prompt_tokens = 16;
    double lr_prompts = 1e-3;

    int stage2_epochs = 200;
    int image_batch = 8;
    double lr_predictor = 1e-4;
    double lr_lut = 1e-3;

    double loss_w_mse = 1.0;
    double loss_w_perceptual = 0.4;
    double loss_w_ssim = 0.4;

    int lut_dim = 33;
    int predictor_base_width = 16;
    int predictor_stages = 3;

    std::string prompt_mode = "learned";  // learned | random | none
    std::string encoder = "mock";         // mock | external
    bool encoder_seed_set = false;        // when false the run seed is used
    std::uint64_t encoder_seed = 0;
    double temperature = 1.0;
    int threads = 0;

    std::string external_backend = "http";
    std::string external_endpoint;
    std::string external_model;
    std::string external_device;

    std::uint64_t effective_encoder_seed() const {
        return encoder_seed_set ? encoder_seed : seed;
    }
    LossWeights loss_weights() const {
        return {loss_w_mse, loss_w_perceptual, loss_w_ssim};
    }

    // Throws ConfigError when a value is out of contract.
    void validate() const;
};

RunConfig parse_config_text(const std::string& text, const std::string& source = "config");
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_text(const RunConfig& cfg);
void save_config(const RunConfig& cfg, const std::filesystem::path& path);

} // namespace clut
