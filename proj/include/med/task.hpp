#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "med/image.hpp"
#include "med/med_network.hpp"
#include "med/rng.hpp"

namespace med {

enum class TaskKind { kDenoise, kSuperResolve, kInpaint, kFlash };

std::string_view to_string(TaskKind kind);
/// Accepts "denoise", "sr", "inpaint", "flash".
TaskKind parse_task_kind(std::string_view s);

/// One restoration problem.
///
/// `corrupted` is the observed image: the noisy image, the low-resolution
/// image, the masked image, or the no-flash image respectively. `flash` is
/// only used by kFlash, `mask` only by kInpaint and `scale` only by
/// kSuperResolve. `reference` is the clean image at output resolution and is
/// used for metrics only.
struct TaskSpec {
  TaskKind kind = TaskKind::kDenoise;
  ImageBuffer corrupted;
  std::optional<ImageBuffer> reference;
  Mask mask;
  ImageBuffer flash;
  int scale = 1;
  std::array<double, 3> lambda{1.0, 1.0, 1.0};

  /// Throws ConfigError on inconsistent fields.
  void validate() const;
  int output_width() const { return corrupted.width() * (kind == TaskKind::kSuperResolve ? scale : 1); }
  int output_height() const { return corrupted.height() * (kind == TaskKind::kSuperResolve ? scale : 1); }
};

/// Per-head targets (and masks for inpainting): entry l has the output
/// extents divided by 2^l.
struct PyramidTargets {
  std::vector<ad::Tensor> targets;
  std::vector<ad::Tensor> masks;
  ad::Tensor flash;  // full-resolution flash image (kFlash only)
};

/// Builds targets for `levels` heads. Denoise, inpaint and flash targets are
/// area downsamples of the observed image. Super-resolution targets are the
/// bicubic upsample U(lr, t / 2^l) while t / 2^l >= 1 and area downsamples
/// below that. Masks are downsampled by nearest neighbour.
PyramidTargets build_targets(const TaskSpec& task, int levels);

// Multi-scale losses. Each sums over the available heads (one to three), with
// weight lambda[l] on head l; mse is the mean over all elements.
template <class T>
ad::Var<T> loss_denoise(const Heads<T>& heads, const PyramidTargets& targets,
                        const std::array<double, 3>& lambda);
template <class T>
ad::Var<T> loss_sr(const Heads<T>& heads, const PyramidTargets& targets,
                   const std::array<double, 3>& lambda);
/// Hole pixels (mask 0) contribute exactly zero.
template <class T>
ad::Var<T> loss_inpaint(const Heads<T>& heads, const PyramidTargets& targets,
                        const std::array<double, 3>& lambda);
/// lambda[0] * sum_l mse(head_l, f_l) + lambda[1] * mse(head_0, flash).
template <class T>
ad::Var<T> loss_flash(const Heads<T>& heads, const PyramidTargets& targets,
                      double lambda1, double lambda2);

/// Dispatches on the task kind.
template <class T>
ad::Var<T> task_loss(const TaskSpec& task, const Heads<T>& heads,
                     const PyramidTargets& targets);

// Degradations.

/// clamp(img + N(0, (sigma / 255)^2)); noise is drawn in planar order.
ImageBuffer degrade_noise(const ImageBuffer& img, double sigma, Rng& rng);
/// The unclamped noise field degrade_noise adds for the same generator state.
std::vector<double> noise_field(std::size_t count, double sigma, Rng& rng);

/// Area downsample by t in {2, 4}.
ImageBuffer degrade_downsample(const ImageBuffer& img, int t);

struct MaskedImage {
  ImageBuffer image;
  Mask mask;
};

/// Drops exactly floor(p H W) pixels (all channels together).
MaskedImage degrade_mask_random(const ImageBuffer& img, double drop_fraction, Rng& rng);
/// Applies a supplied mask.
MaskedImage degrade_mask_region(const ImageBuffer& img, const Mask& mask);
/// All-ones mask with a rectangular hole; the rectangle is clipped to the image.
Mask rect_mask(int width, int height, int x, int y, int rect_width, int rect_height);

}  // namespace med
