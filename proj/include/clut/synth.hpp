#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "clut/image.hpp"
#include "clut/lut3d.hpp"

namespace clut {

// Fixed nonidentity color grade used for synthetic targets: a gentle
// brightening affine mix of the channels, exactly representable by a lattice
// of any size.
Lut3D synthetic_grade_lut(int dim);

// Smooth random test image: gradients plus soft blobs plus mild noise,
// covering [0, 1] in every channel.
Image synthetic_image(int height, int width, std::uint64_t seed);

// In-memory paired set: inputs are synthetic images, targets are the grade
// LUT applied to them.
std::vector<std::pair<Image, Image>> synthetic_pairs(int count, int size,
                                                     std::uint64_t seed, int lut_dim);

// Writes input/NNN.png and target/NNN.png under root.
void write_synthetic_dataset(const std::filesystem::path& root, int count, int size,
                             std::uint64_t seed, int lut_dim);

} // namespace clut
