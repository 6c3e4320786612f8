#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "med/tensor.hpp"

namespace med {

/// Planar RGB image with values in [0, 1].
class ImageBuffer {
 public:
  static constexpr int kChannels = 3;

  ImageBuffer() = default;
  ImageBuffer(int width, int height, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  float& at(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  float at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  const std::string& source() const { return source_; }
  void set_source(std::string path) { source_ = std::move(path); }

  /// Clamps every value into [0, 1].
  void clamp();

  ad::Tensor to_tensor() const;
  /// `t` must have 3 channels; values are clamped into [0, 1].
  static ImageBuffer from_tensor(const ad::Tensor& t);

  bool operator==(const ImageBuffer& o) const {
    return width_ == o.width_ && height_ == o.height_ && data_ == o.data_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
  std::string source_;
};

/// Binary pixel mask: 1 keeps a pixel, 0 marks a hole.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, std::uint8_t fill = 1);

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint8_t& at(int y, int x) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t at(int y, int x) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const std::vector<std::uint8_t>& data() const { return data_; }

  std::size_t holes() const;
  /// Nearest-neighbour downsample keeping the top-left pixel of each block.
  Mask downsample(int factor) const;
  /// (1, 3, H, W) tensor of zeros and ones.
  ad::Tensor to_tensor() const;

  bool operator==(const Mask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Padding applied to reach divisible extents, so outputs can be cropped back.
struct PadGeometry {
  int width = 0;   // original extents
  int height = 0;
  int padded_width = 0;
  int padded_height = 0;
};

/// Reflect-pads on the bottom and right to the next multiple of `divisor`.
ImageBuffer pad_to_divisible(const ImageBuffer& img, int divisor, PadGeometry* geometry);
Mask pad_to_divisible(const Mask& mask, int divisor);
ImageBuffer crop(const ImageBuffer& img, int width, int height);
inline ImageBuffer crop_back(const ImageBuffer& img, const PadGeometry& g) {
  return crop(img, g.width, g.height);
}

/// Fills the hole pixels of `img` with `value`.
ImageBuffer fill_holes(const ImageBuffer& img, const Mask& mask, float value);

}  // namespace med
