#include "med/resize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "med/error.hpp"

namespace med {

namespace {

double cubic(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

// Source taps and weights for one output coordinate along one axis.
struct Taps {
  std::array<int, 4> index{};
  std::array<double, 4> weight{};
  int count = 0;
};

Taps taps_for(int dst, int src_extent, int dst_extent, ResizeMethod method) {
  const double scale = static_cast<double>(src_extent) / dst_extent;
  const double s = (dst + 0.5) * scale - 0.5;
  auto clampi = [&](int i) { return std::clamp(i, 0, src_extent - 1); };
  Taps t;
  switch (method) {
    case ResizeMethod::kNearest: {
      const int i = static_cast<int>(std::floor((dst + 0.5) * scale));
      t.index[0] = clampi(i);
      t.weight[0] = 1.0;
      t.count = 1;
      break;
    }
    case ResizeMethod::kBilinear: {
      const double sc = std::max(s, 0.0);
      const int i0 = static_cast<int>(std::floor(sc));
      const double f = sc - i0;
      t.index = {clampi(i0), clampi(i0 + 1), 0, 0};
      t.weight = {1.0 - f, f, 0.0, 0.0};
      t.count = 2;
      break;
    }
    case ResizeMethod::kBicubic: {
      const int i0 = static_cast<int>(std::floor(s));
      const double f = s - i0;
      double total = 0.0;
      for (int k = 0; k < 4; ++k) {
        t.index[k] = clampi(i0 - 1 + k);
        t.weight[k] = cubic(f - (k - 1));
        total += t.weight[k];
      }
      for (auto& w : t.weight) w /= total;
      t.count = 4;
      break;
    }
    case ResizeMethod::kArea:
      break;
  }
  return t;
}

ImageBuffer area(const ImageBuffer& img, int width, int height) {
  if (width <= img.width() && height <= img.height()) {
    if (img.width() % width != 0 || img.height() % height != 0 ||
        img.width() / width != img.height() / height) {
      throw ShapeError("area resize needs one integer shrink factor");
    }
    const int f = img.width() / width;
    ImageBuffer out(width, height);
    const double inv = 1.0 / (f * f);
    for (int c = 0; c < ImageBuffer::kChannels; ++c) {
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          double acc = 0.0;
          for (int dy = 0; dy < f; ++dy) {
            for (int dx = 0; dx < f; ++dx) acc += img.at(c, y * f + dy, x * f + dx);
          }
          out.at(c, y, x) = static_cast<float>(acc * inv);
        }
      }
    }
    return out;
  }
  if (width % img.width() != 0 || height % img.height() != 0 ||
      width / img.width() != height / img.height()) {
    throw ShapeError("area resize needs one integer enlarge factor");
  }
  return resize(img, width, height, ResizeMethod::kNearest);
}

}  // namespace

ResizeMethod parse_resize_method(std::string_view s) {
  if (s == "nearest") return ResizeMethod::kNearest;
  if (s == "bilinear") return ResizeMethod::kBilinear;
  if (s == "area") return ResizeMethod::kArea;
  if (s == "bicubic") return ResizeMethod::kBicubic;
  throw ConfigError("unknown resize method '" + std::string(s) +
                    "' (expected nearest|bilinear|area|bicubic)");
}

ImageBuffer resize(const ImageBuffer& img, int width, int height, ResizeMethod method) {
  if (width < 1 || height < 1) throw ShapeError("resize target must be >= 1x1");
  if (width == img.width() && height == img.height()) return img;
  if (method == ResizeMethod::kArea) return area(img, width, height);

  std::vector<Taps> tx(width), ty(height);
  for (int x = 0; x < width; ++x) tx[x] = taps_for(x, img.width(), width, method);
  for (int y = 0; y < height; ++y) ty[y] = taps_for(y, img.height(), height, method);

  ImageBuffer out(width, height);
  for (int c = 0; c < ImageBuffer::kChannels; ++c) {
    for (int y = 0; y < height; ++y) {
      const Taps& a = ty[y];
      for (int x = 0; x < width; ++x) {
        const Taps& b = tx[x];
        double acc = 0.0;
        for (int i = 0; i < a.count; ++i) {
          double row = 0.0;
          for (int j = 0; j < b.count; ++j) row += b.weight[j] * img.at(c, a.index[i], b.index[j]);
          acc += a.weight[i] * row;
        }
        out.at(c, y, x) = static_cast<float>(acc);
      }
    }
  }
  if (method == ResizeMethod::kBicubic) out.clamp();
  return out;
}

ImageBuffer upsample(const ImageBuffer& img, int factor, ResizeMethod method) {
  if (factor < 1) throw ShapeError("upsample factor must be >= 1");
  return resize(img, img.width() * factor, img.height() * factor, method);
}

ImageBuffer downsample(const ImageBuffer& img, int factor, ResizeMethod method) {
  if (factor < 1 || img.width() % factor != 0 || img.height() % factor != 0) {
    throw ShapeError("image " + std::to_string(img.width()) + "x" +
                     std::to_string(img.height()) + " is not divisible by " +
                     std::to_string(factor));
  }
  return resize(img, img.width() / factor, img.height() / factor, method);
}

}  // namespace med
