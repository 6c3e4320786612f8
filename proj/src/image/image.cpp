#include "med/image.hpp"

#include <algorithm>

#include "med/error.hpp"

namespace med {

namespace {

// Reflection without edge repeat: -1 -> 1, n -> n - 2.
int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

int round_up(int v, int divisor) { return (v + divisor - 1) / divisor * divisor; }

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, float fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw ShapeError("image extents must be >= 1, got " + std::to_string(width) +
                     "x" + std::to_string(height));
  }
  data_.assign(static_cast<std::size_t>(kChannels) * width * height, fill);
}

void ImageBuffer::clamp() {
  for (auto& v : data_) v = std::clamp(v, 0.0f, 1.0f);
}

ad::Tensor ImageBuffer::to_tensor() const {
  return ad::Tensor(ad::Shape{1, kChannels, height_, width_}, data_);
}

ImageBuffer ImageBuffer::from_tensor(const ad::Tensor& t) {
  const auto& s = t.shape();
  if (s.n != 1 || s.c != kChannels) {
    throw ShapeError("image tensor must be (1,3,H,W), got " + s.str());
  }
  ImageBuffer img(s.w, s.h);
  std::copy(t.data().begin(), t.data().end(), img.data_.begin());
  img.clamp();
  return img;
}

Mask::Mask(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw ShapeError("mask extents must be >= 1");
  if (fill > 1) throw ShapeError("mask values must be 0 or 1");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

std::size_t Mask::holes() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), 0));
}

Mask Mask::downsample(int factor) const {
  if (factor < 1 || width_ % factor != 0 || height_ % factor != 0) {
    throw ShapeError("mask " + std::to_string(width_) + "x" + std::to_string(height_) +
                     " is not divisible by " + std::to_string(factor));
  }
  Mask out(width_ / factor, height_ / factor);
  for (int y = 0; y < out.height_; ++y) {
    for (int x = 0; x < out.width_; ++x) out.at(y, x) = at(y * factor, x * factor);
  }
  return out;
}

ad::Tensor Mask::to_tensor() const {
  ad::Tensor t(ad::Shape{1, ImageBuffer::kChannels, height_, width_});
  const std::size_t plane = data_.size();
  for (int c = 0; c < ImageBuffer::kChannels; ++c) {
    for (std::size_t i = 0; i < plane; ++i) t[c * plane + i] = data_[i];
  }
  return t;
}

ImageBuffer pad_to_divisible(const ImageBuffer& img, int divisor, PadGeometry* geometry) {
  if (divisor < 1) throw ShapeError("divisor must be >= 1");
  const int pw = round_up(img.width(), divisor);
  const int ph = round_up(img.height(), divisor);
  if (geometry) *geometry = {img.width(), img.height(), pw, ph};
  if (pw == img.width() && ph == img.height()) return img;
  ImageBuffer out(pw, ph);
  for (int c = 0; c < ImageBuffer::kChannels; ++c) {
    for (int y = 0; y < ph; ++y) {
      const int sy = reflect(y, img.height());
      for (int x = 0; x < pw; ++x) out.at(c, y, x) = img.at(c, sy, reflect(x, img.width()));
    }
  }
  out.set_source(img.source());
  return out;
}

Mask pad_to_divisible(const Mask& mask, int divisor) {
  const int pw = round_up(mask.width(), divisor);
  const int ph = round_up(mask.height(), divisor);
  if (pw == mask.width() && ph == mask.height()) return mask;
  Mask out(pw, ph);
  for (int y = 0; y < ph; ++y) {
    const int sy = reflect(y, mask.height());
    for (int x = 0; x < pw; ++x) out.at(y, x) = mask.at(sy, reflect(x, mask.width()));
  }
  return out;
}

ImageBuffer crop(const ImageBuffer& img, int width, int height) {
  if (width > img.width() || height > img.height()) {
    throw ShapeError("crop extents exceed the image");
  }
  if (width == img.width() && height == img.height()) return img;
  ImageBuffer out(width, height);
  for (int c = 0; c < ImageBuffer::kChannels; ++c) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) out.at(c, y, x) = img.at(c, y, x);
    }
  }
  out.set_source(img.source());
  return out;
}

ImageBuffer fill_holes(const ImageBuffer& img, const Mask& mask, float value) {
  if (mask.width() != img.width() || mask.height() != img.height()) {
    throw ShapeError("mask and image extents differ");
  }
  ImageBuffer out = img;
  for (int c = 0; c < ImageBuffer::kChannels; ++c) {
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        if (mask.at(y, x) == 0) out.at(c, y, x) = value;
      }
    }
  }
  return out;
}

}  // namespace med
