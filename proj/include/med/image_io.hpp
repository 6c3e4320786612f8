#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "med/image.hpp"

namespace med {

/// Reads an 8- or 16-bit PNG. Gray is promoted to RGB; alpha is dropped and a
/// note is appended to `warnings` when given.
ImageBuffer read_png(const std::filesystem::path& path,
                     std::vector<std::string>* warnings = nullptr);
/// Writes 8-bit RGB, quantizing with round-half-up.
void write_png(const ImageBuffer& img, const std::filesystem::path& path);

/// Single-channel mask: 0 is a hole, 255 keeps the pixel. Any other value is
/// rejected. Colour inputs must have equal channels.
Mask read_mask(const std::filesystem::path& path);
void write_mask(const Mask& mask, const std::filesystem::path& path);

/// 8-bit quantization used by write_png.
inline unsigned char quantize8(float v) {
  const float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return static_cast<unsigned char>(static_cast<int>(c * 255.0f + 0.5f));
}

}  // namespace med
