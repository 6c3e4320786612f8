#pragma once

#include <string_view>

#include "med/image.hpp"

namespace med {

enum class ResizeMethod { kNearest, kBilinear, kArea, kBicubic };

ResizeMethod parse_resize_method(std::string_view s);

/// Resamples to `width` x `height` with half-pixel centre alignment.
/// kArea supports integer-factor shrinking (block mean) and integer-factor
/// enlarging (replication) only. Bicubic uses the Keys kernel with a = -0.5
/// and clamps its output into [0, 1].
ImageBuffer resize(const ImageBuffer& img, int width, int height, ResizeMethod method);

/// Enlarges by an integer factor.
ImageBuffer upsample(const ImageBuffer& img, int factor,
                     ResizeMethod method = ResizeMethod::kBicubic);
/// Shrinks by an integer factor; extents must be divisible.
ImageBuffer downsample(const ImageBuffer& img, int factor,
                       ResizeMethod method = ResizeMethod::kArea);

}  // namespace med
