#pragma once

#include <limits>

#include "med/image.hpp"

namespace med {

/// Returned by psnr for identical inputs.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// 10 log10(1 / MSE) over all pixels and channels, peak value 1.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

/// PSNR over the pixels whose mask value equals `select` (0 = holes).
/// Throws ShapeError when no pixel is selected.
double psnr_region(const ImageBuffer& a, const ImageBuffer& b, const Mask& mask,
                   int select);

/// Mean SSIM over every valid 11x11 Gaussian window (sigma 1.5), with
/// K1 = 0.01, K2 = 0.03 and L = 1, averaged over the three channels.
/// Both extents must be at least 11.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace med
