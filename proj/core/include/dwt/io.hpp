#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "dwt/grid.hpp"
#include "dwt/image.hpp"

namespace dwt {

/// 8-bit grayscale PGM payload (P5 binary or P2 ASCII, maxval <= 255).
/// Malformed input throws ParseError with the byte offset of the fault.
Image<std::uint8_t> parse_pgm(std::string_view bytes, double spacing = kDefaultSpacingMm);

/// P5 encoding of an 8-bit image.
std::string encode_pgm(const Image<std::uint8_t>& image);

/// Nonzero pixels become wall.
BinaryMask load_mask(std::string_view bytes, double spacing = kDefaultSpacingMm);
std::string encode_mask(const BinaryMask& mask);

/// Boundary label image: 0 = none, 128 = inner, 255 = outer.
Image<BoundaryLabel> load_boundary_labels(std::string_view bytes);
std::string encode_boundary_labels(const Image<BoundaryLabel>& labels);

/// Greyscale portable float map: "Pf", little-endian scale -1.0, rows stored
/// bottom to top.
std::string encode_pfm(const Image<float>& image);
Image<float> parse_pfm(std::string_view bytes, double spacing = 1.0);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Reads `spacing_mm` from a JSON sidecar document.
double parse_spacing_sidecar(std::string_view json_text);

}  // namespace dwt
