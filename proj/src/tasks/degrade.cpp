#include <algorithm>
#include <cmath>
#include <numeric>

#include "med/error.hpp"
#include "med/resize.hpp"
#include "med/task.hpp"

namespace med {

std::vector<double> noise_field(std::size_t count, double sigma, Rng& rng) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("noise sigma must be finite and >= 0");
  }
  std::vector<double> field(count);
  const double s = sigma / 255.0;
  for (auto& v : field) v = s * rng.normal();
  return field;
}

ImageBuffer degrade_noise(const ImageBuffer& img, double sigma, Rng& rng) {
  const auto field = noise_field(img.size(), sigma, rng);
  ImageBuffer out = img;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = static_cast<float>(std::clamp(img.data()[i] + field[i], 0.0, 1.0));
  }
  return out;
}

ImageBuffer degrade_downsample(const ImageBuffer& img, int t) {
  if (t != 2 && t != 4) throw ConfigError("downsample factor must be 2 or 4");
  return downsample(img, t, ResizeMethod::kArea);
}

MaskedImage degrade_mask_random(const ImageBuffer& img, double drop_fraction, Rng& rng) {
  if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) {
    throw ConfigError("drop fraction must be in [0, 1)");
  }
  const std::size_t n = static_cast<std::size_t>(img.width()) * img.height();
  // The epsilon absorbs representation error in decimal fractions (0.29 * 100).
  const auto drop = static_cast<std::size_t>(std::floor(drop_fraction * n + 1e-9));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < drop; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(order[i], order[j]);
  }
  Mask mask(img.width(), img.height());
  for (std::size_t i = 0; i < drop; ++i) {
    mask.at(static_cast<int>(order[i] / img.width()), static_cast<int>(order[i] % img.width())) = 0;
  }
  return degrade_mask_region(img, mask);
}

MaskedImage degrade_mask_region(const ImageBuffer& img, const Mask& mask) {
  if (mask.width() != img.width() || mask.height() != img.height()) {
    throw ShapeError("mask extents differ from the image");
  }
  return {fill_holes(img, mask, 0.0f), mask};
}

Mask rect_mask(int width, int height, int x, int y, int rect_width, int rect_height) {
  Mask mask(width, height);
  const int x0 = std::max(0, x);
  const int y0 = std::max(0, y);
  const int x1 = std::min(width, x + rect_width);
  const int y1 = std::min(height, y + rect_height);
  for (int yy = y0; yy < y1; ++yy) {
    for (int xx = x0; xx < x1; ++xx) mask.at(yy, xx) = 0;
  }
  return mask;
}

}  // namespace med
