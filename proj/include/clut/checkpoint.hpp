#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace clut {

// Versioned binary container of named tensors plus a string metadata map.
// Tensor payloads are little-endian 32-bit floats with shape headers; the
// in-memory values are doubles, so load(save(x)) reproduces the float32
// rounding of x and save(load(f)) reproduces f byte for byte.
struct NamedTensor {
    std::string name;
    std::vector<std::uint64_t> dims;
    std::vector<double> values;
};

struct Checkpoint {
    static constexpr std::uint32_t kVersion = 1;
    std::map<std::string, std::string> metadata;
    std::vector<NamedTensor> tensors;

    const NamedTensor* find(const std::string& name) const;
    const NamedTensor& require(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
// Throws ParseError on a bad magic, wrong version, or truncated payload.
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace clut
