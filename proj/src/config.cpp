#include "clut/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "clut/errors.hpp"

namespace clut {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

long long parse_int(const std::string& key, const std::string& v) {
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value,
               const std::string& source, long line_no) {
    auto as_int = [&] { return static_cast<int>(parse_int(key, value)); };
    if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "dataset_root") cfg.dataset_root = value;
    else if (key == "dataset_layout") cfg.dataset_layout = value;
    else if (key == "resize") cfg.resize = value;
    else if (key == "image_size") cfg.image_size = as_int();
    else if (key == "stage1_epochs") cfg.stage1_epochs = as_int();
    else if (key == "prompt_batch") cfg.prompt_batch = as_int();
    else if (key == "prompt_tokens") cfg.prompt_tokens = as_int();
    else if (key == "lr_prompts") cfg.lr_prompts = parse_double(key, value);
    else if (key == "stage2_epochs") cfg.stage2_epochs = as_int();
    else if (key == "image_batch") cfg.image_batch = as_int();
    else if (key == "lr_predictor") cfg.lr_predictor = parse_double(key, value);
    else if (key == "lr_lut") cfg.lr_lut = parse_double(key, value);
    else if (key == "loss_w_mse") cfg.loss_w_mse = parse_double(key, value);
    else if (key == "loss_w_perceptual") cfg.loss_w_perceptual = parse_double(key, value);
    else if (key == "loss_w_ssim") cfg.loss_w_ssim = parse_double(key, value);
    else if (key == "lut_dim") cfg.lut_dim = as_int();
    else if (key == "predictor_base_width") cfg.predictor_base_width = as_int();
    else if (key == "predictor_stages") cfg.predictor_stages = as_int();
    else if (key == "prompt_mode") cfg.prompt_mode = value;
    else if (key == "encoder") cfg.encoder = value;
    else if (key == "encoder_seed") {
        if (value == "auto") {
            cfg.encoder_seed_set = false;
        } else {
            cfg.encoder_seed = parse_u64(key, value);
            cfg.encoder_seed_set = true;
        }
    } else if (key == "temperature") cfg.temperature = parse_double(key, value);
    else if (key == "threads") cfg.threads = as_int();
    else if (key == "external_backend") cfg.external_backend = value;
    else if (key == "external_endpoint") cfg.external_endpoint = value;
    else if (key == "external_model") cfg.external_model = value;
    else if (key == "external_device") cfg.external_device = value;
    else
        throw ConfigError(source + ":" + std::to_string(line_no) + ": unknown key '" +
                          key + "'");
}

} // namespace

void RunConfig::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(dataset_layout == "dirs" || dataset_layout == "manifest",
            "dataset_layout must be dirs or manifest");
    require(resize == "bilinear" || resize == "area", "resize must be bilinear or area");
    require(image_size >= 32, "image_size must be >= 32");
    require(stage1_epochs >= 0, "stage1_epochs must be >= 0");
    require(prompt_batch >= 1, "prompt_batch must be >= 1");
    require(prompt_tokens >= 1, "prompt_tokens must be >= 1");
    require(stage2_epochs >= 0, "stage2_epochs must be >= 0");
    require(image_batch >= 1, "image_batch must be >= 1");
    require(lr_prompts > 0 && lr_predictor > 0 && lr_lut > 0,
            "learning rates must be positive");
    require(lut_dim >= 2, "lut_dim must be >= 2");
    require(predictor_base_width >= 2 && predictor_base_width % 2 == 0,
            "predictor_base_width must be even and >= 2");
    require(predictor_stages >= 1, "predictor_stages must be >= 1");
    require(prompt_mode == "learned" || prompt_mode == "random" || prompt_mode == "none",
            "prompt_mode must be learned, random, or none");
    require(encoder == "mock" || encoder == "external",
            "encoder must be mock or external");
    require(temperature > 0, "temperature must be positive");
}

RunConfig parse_config_text(const std::string& text, const std::string& source) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
        apply_key(cfg, key, value, source, line_no);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

std::string config_to_text(const RunConfig& cfg) {
    std::ostringstream out;
    out << "seed = " << cfg.seed << "\n";
    out << "dataset_root = " << cfg.dataset_root << "\n";
    out << "dataset_layout = " << cfg.dataset_layout << "\n";
    out << "resize = " << cfg.resize << "\n";
    out << "image_size = " << cfg.image_size << "\n";
    out << "stage1_epochs = " << cfg.stage1_epochs << "\n";
    out << "prompt_batch = " << cfg.prompt_batch << "\n";
    out << "prompt_tokens = " << cfg.prompt_tokens << "\n";
    out << "lr_prompts = " << fmt_double(cfg.lr_prompts) << "\n";
    out << "stage2_epochs = " << cfg.stage2_epochs << "\n";
    out << "image_batch = " << cfg.image_batch << "\n";
    out << "lr_predictor = " << fmt_double(cfg.lr_predictor) << "\n";
    out << "lr_lut = " << fmt_double(cfg.lr_lut) << "\n";
    out << "loss_w_mse = " << fmt_double(cfg.loss_w_mse) << "\n";
    out << "loss_w_perceptual = " << fmt_double(cfg.loss_w_perceptual) << "\n";
    out << "loss_w_ssim = " << fmt_double(cfg.loss_w_ssim) << "\n";
    out << "lut_dim = " << cfg.lut_dim << "\n";
    out << "predictor_base_width = " << cfg.predictor_base_width << "\n";
    out << "predictor_stages = " << cfg.predictor_stages << "\n";
    out << "prompt_mode = " << cfg.prompt_mode << "\n";
    out << "encoder = " << cfg.encoder << "\n";
    if (cfg.encoder_seed_set)
        out << "encoder_seed = " << cfg.encoder_seed << "\n";
    else
        out << "encoder_seed = auto\n";
    out << "temperature = " << fmt_double(cfg.temperature) << "\n";
    out << "threads = " << cfg.threads << "\n";
    out << "external_backend = " << cfg.external_backend << "\n";
    out << "external_endpoint = " << cfg.external_endpoint << "\n";
    out << "external_model = " << cfg.external_model << "\n";
    out << "external_device = " << cfg.external_device << "\n";
    return out.str();
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << config_to_text(cfg);
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace clut
