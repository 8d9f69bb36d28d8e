#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "clut/image.hpp"

namespace clut {

// Paired original/target images matched by filename stem. Pair order is
// lexicographic by id before any shuffling.
struct PairedDataset {
    std::filesystem::path base;  // paths below are relative to this
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<std::string> ids;
    std::string split = "train";
    std::uint64_t manifest_checksum = 0;
    std::vector<std::string> warnings;  // unmatched files, one message each

    std::size_t size() const { return pairs.size(); }
};

// layout "dirs": root must contain input/ and target/ subdirectories; files
// are paired by stem and orphans become warnings.
// layout "manifest": root is a manifest file with one
// `input_relpath<TAB>target_relpath` line per pair, '#' comments, UTF-8;
// relative paths resolve against the manifest's directory.
PairedDataset scan_dataset(const std::filesystem::path& root, const std::string& layout);

// Resize to size x size (bilinear by default, exact area averaging when
// area = true). Values pass through unchanged when the image already has the
// target size.
Image preprocess(const Image& img, int size = 256, bool area = false);

struct Batch {
    std::vector<Image> inputs;
    std::vector<Image> targets;
    std::vector<std::string> ids;
};

// Deterministic shuffle keyed by (seed, epoch), chunked into batches with the
// final partial batch kept.
std::vector<std::vector<std::size_t>> plan_batches(std::size_t count, int batch_size,
                                                   std::uint64_t seed, int epoch);

// Loads and preprocesses one pair / one batch.
std::pair<Image, Image> load_pair(const PairedDataset& ds, std::size_t index,
                                  int size = 256, bool area = false);
Batch load_batch(const PairedDataset& ds, const std::vector<std::size_t>& indices,
                 int size = 256, bool area = false);

} // namespace clut
