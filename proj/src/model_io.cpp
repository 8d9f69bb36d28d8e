#include "clut/model_io.hpp"

#include <charconv>

#include "clut/errors.hpp"

namespace clut {

namespace {

int meta_int(const Checkpoint& ckpt, const std::string& key) {
    auto it = ckpt.metadata.find(key);
    if (it == ckpt.metadata.end())
        throw ParseError("checkpoint is missing metadata key '" + key + "'");
    int v = 0;
    auto [p, ec] = std::from_chars(it->second.data(),
                                   it->second.data() + it->second.size(), v);
    if (ec != std::errc{} || p != it->second.data() + it->second.size())
        throw ParseError("checkpoint metadata '" + key + "' is not an integer");
    return v;
}

std::vector<std::uint64_t> conv_dims(const Conv2D& c) {
    return {static_cast<std::uint64_t>(c.out_ch), static_cast<std::uint64_t>(c.in_ch),
            static_cast<std::uint64_t>(c.ksize), static_cast<std::uint64_t>(c.ksize)};
}

} // namespace

Checkpoint prompts_to_checkpoint(const PromptPair& prompts,
                                 std::map<std::string, std::string> metadata) {
    Checkpoint ckpt;
    ckpt.metadata = std::move(metadata);
    ckpt.metadata["kind"] = "prompts";
    ckpt.metadata["token_count"] = std::to_string(prompts.token_count());
    ckpt.tensors.push_back({"prompts.original",
                            {static_cast<std::uint64_t>(prompts.original_tokens.rows),
                             static_cast<std::uint64_t>(kEmbedDim)},
                            prompts.original_tokens.data});
    ckpt.tensors.push_back({"prompts.enhanced",
                            {static_cast<std::uint64_t>(prompts.enhanced_tokens.rows),
                             static_cast<std::uint64_t>(kEmbedDim)},
                            prompts.enhanced_tokens.data});
    return ckpt;
}

PromptPair prompts_from_checkpoint(const Checkpoint& ckpt) {
    const NamedTensor& orig = ckpt.require("prompts.original");
    const NamedTensor& enh = ckpt.require("prompts.enhanced");
    if (orig.dims.size() != 2 || orig.dims[1] != kEmbedDim || orig.dims != enh.dims)
        throw ParseError("prompt tensors have unexpected shapes");
    PromptPair p;
    p.original_tokens = TokenMatrix(static_cast<int>(orig.dims[0]));
    p.original_tokens.data = orig.values;
    p.enhanced_tokens = TokenMatrix(static_cast<int>(enh.dims[0]));
    p.enhanced_tokens.data = enh.values;
    return p;
}

Checkpoint params_to_checkpoint(const PredictorParams& params,
                                std::map<std::string, std::string> metadata) {
    Checkpoint ckpt;
    ckpt.metadata = std::move(metadata);
    ckpt.metadata["kind"] = "model";
    ckpt.metadata["base_width"] = std::to_string(params.cfg.base_width);
    ckpt.metadata["stage_count"] = std::to_string(params.cfg.stage_count);
    ckpt.metadata["lut_dim"] = std::to_string(params.luts[0].dim);

    auto add = [&](const std::string& name, const std::vector<double>& values,
                   std::vector<std::uint64_t> dims) {
        ckpt.tensors.push_back({name, std::move(dims), values});
    };
    add("stem.weight", params.stem.weight, conv_dims(params.stem));
    add("stem.bias", params.stem.bias, {static_cast<std::uint64_t>(params.stem.out_ch)});
    for (std::size_t s = 0; s < params.stages.size(); ++s) {
        const auto& st = params.stages[s];
        const std::string p = "stage" + std::to_string(s) + ".";
        add(p + "down.weight", st.down.weight, conv_dims(st.down));
        add(p + "down.bias", st.down.bias, {static_cast<std::uint64_t>(st.down.out_ch)});
        add(p + "expand.weight", st.expand.weight, conv_dims(st.expand));
        add(p + "expand.bias", st.expand.bias,
            {static_cast<std::uint64_t>(st.expand.out_ch)});
        add(p + "sca.weight", st.sca.weight,
            {static_cast<std::uint64_t>(st.sca.channels),
             static_cast<std::uint64_t>(st.sca.channels)});
    }
    add("head.weight", params.head_weight,
        {3, static_cast<std::uint64_t>(params.final_channels())});
    add("head.bias", params.head_bias, {3});
    const std::uint64_t d = static_cast<std::uint64_t>(params.luts[0].dim);
    for (int k = 0; k < 3; ++k)
        add("lut" + std::to_string(k), params.luts[k].data, {d, d, d, 3});
    return ckpt;
}

PredictorParams params_from_checkpoint(const Checkpoint& ckpt) {
    PredictorConfig cfg;
    cfg.base_width = meta_int(ckpt, "base_width");
    cfg.stage_count = meta_int(ckpt, "stage_count");
    const int lut_dim = meta_int(ckpt, "lut_dim");

    PredictorParams params = init_predictor(cfg, lut_dim, 0);
    params.for_each_tensor([&](const std::string& name, std::vector<double>& t) {
        const NamedTensor& stored = ckpt.require(name);
        if (stored.values.size() != t.size())
            throw ParseError("checkpoint tensor '" + name + "' has " +
                             std::to_string(stored.values.size()) + " values, expected " +
                             std::to_string(t.size()));
        t = stored.values;
    });
    return params;
}

} // namespace clut
