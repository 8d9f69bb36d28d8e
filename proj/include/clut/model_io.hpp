#pragma once

#include <map>
#include <string>

#include "clut/checkpoint.hpp"
#include "clut/predictor.hpp"
#include "clut/prompts.hpp"

namespace clut {

// Prompt checkpoints: tensors prompts.original / prompts.enhanced (N x 512).
Checkpoint prompts_to_checkpoint(const PromptPair& prompts,
                                 std::map<std::string, std::string> metadata);
PromptPair prompts_from_checkpoint(const Checkpoint& ckpt);

// Model checkpoints: every predictor tensor plus the three LUT lattices.
// Architecture metadata (base_width, stage_count, lut_dim) is stored so the
// parameter shapes can be rebuilt and verified on load.
Checkpoint params_to_checkpoint(const PredictorParams& params,
                                std::map<std::string, std::string> metadata);
PredictorParams params_from_checkpoint(const Checkpoint& ckpt);

} // namespace clut
