#pragma once

#include <filesystem>

#include "clut/image.hpp"

namespace clut {

// Decodes an 8- or 16-bit PNG (gray, palette, RGB, or RGBA) to an RGB image
// with values in [0, 1] (255 -> 1.0 exactly, 65535 -> 1.0 exactly).
// Throws IoError naming the file on decode failure.
Image read_png(const std::filesystem::path& path);

// Writes an 8-bit RGB PNG; values are clamped and rounded to the 8-bit grid.
void write_png(const Image& img, const std::filesystem::path& path);

} // namespace clut
