#pragma once

#include <filesystem>

#include "clut/lut3d.hpp"

namespace clut {

// Adobe/Resolve .cube text format: optional '#' comment lines and TITLE,
// required LUT_3D_SIZE, optional DOMAIN_MIN/DOMAIN_MAX (default 0/1), then
// D^3 whitespace-separated RGB rows with the red index varying fastest.
// Parse failures throw ParseError carrying the offending line number.
Lut3D read_cube(const std::filesystem::path& path);

// Writes entries with 9 significant digits; write -> read is lossless at
// that precision.
void write_cube(const Lut3D& lut, const std::filesystem::path& path);

} // namespace clut
