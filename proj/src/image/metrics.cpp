#include "med/metrics.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "med/error.hpp"

namespace med {

namespace {

void require_same(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ShapeError(std::string(what) + ": extents differ (" + std::to_string(a.width()) +
                     "x" + std::to_string(a.height()) + " vs " +
                     std::to_string(b.width()) + "x" + std::to_string(b.height()) + ")");
  }
}

double from_mse(double mse) {
  if (mse == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(1.0 / mse);
}

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::vector<double> gaussian_window() {
  std::vector<double> g(kWindow);
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    g[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    total += g[i];
  }
  for (auto& v : g) v /= total;
  return g;
}

// Separable "valid" filtering of a single plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int w, int h,
                                 const std::vector<double>& g) {
  const int ow = w - kWindow + 1;
  const int oh = h - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * plane[static_cast<std::size_t>(y) * w + x + k];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  require_same(a, b, "psnr");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.data()[i]) - b.data()[i];
    acc += d * d;
  }
  return from_mse(acc / static_cast<double>(a.size()));
}

double psnr_region(const ImageBuffer& a, const ImageBuffer& b, const Mask& mask,
                   int select) {
  require_same(a, b, "psnr_region");
  if (mask.width() != a.width() || mask.height() != a.height()) {
    throw ShapeError("psnr_region: mask extents differ from the images");
  }
  double acc = 0.0;
  std::size_t count = 0;
  for (int c = 0; c < ImageBuffer::kChannels; ++c) {
    for (int y = 0; y < a.height(); ++y) {
      for (int x = 0; x < a.width(); ++x) {
        if (mask.at(y, x) != select) continue;
        const double d = static_cast<double>(a.at(c, y, x)) - b.at(c, y, x);
        acc += d * d;
        ++count;
      }
    }
  }
  if (count == 0) throw ShapeError("psnr_region: no pixel selected");
  return from_mse(acc / static_cast<double>(count));
}

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
  require_same(a, b, "ssim");
  const int w = a.width();
  const int h = a.height();
  if (w < kWindow || h < kWindow) {
    throw ShapeError("ssim: image " + std::to_string(w) + "x" + std::to_string(h) +
                     " is smaller than the 11x11 window");
  }
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const auto g = gaussian_window();
  const std::size_t n = static_cast<std::size_t>(w) * h;

  double total = 0.0;
  for (int c = 0; c < ImageBuffer::kChannels; ++c) {
    std::vector<double> pa(n), pb(n), aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
      pa[i] = a.data()[c * n + i];
      pb[i] = b.data()[c * n + i];
      aa[i] = pa[i] * pa[i];
      bb[i] = pb[i] * pb[i];
      ab[i] = pa[i] * pb[i];
    }
    const auto mu_a = filter_valid(pa, w, h, g);
    const auto mu_b = filter_valid(pb, w, h, g);
    const auto e_aa = filter_valid(aa, w, h, g);
    const auto e_bb = filter_valid(bb, w, h, g);
    const auto e_ab = filter_valid(ab, w, h, g);
    double acc = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
      const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
      const double mu_ab = mu_a[i] * mu_b[i];
      const double cov = e_ab[i] - mu_ab;
      const double num = (2.0 * mu_ab + c1) * (2.0 * cov + c2);
      const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2);
      acc += num / den;
    }
    total += acc / static_cast<double>(mu_a.size());
  }
  return total / ImageBuffer::kChannels;
}

}  // namespace med
