#include "med/fit.hpp"

#include <array>
#include <chrono>
#include <cmath>

#include "med/error.hpp"
#include "med/med_network.hpp"
#include "med/metrics.hpp"
#include "med/ops.hpp"
#include "med/resize.hpp"

namespace med {

namespace {

constexpr std::array<std::pair<InputMode, std::string_view>, 3> kInputModes{{
    {InputMode::kNoise, "noise"},
    {InputMode::kImage, "image"},
    {InputMode::kConcatFlash, "concat_flash"},
}};
constexpr std::array<std::pair<StopMode, std::string_view>, 2> kStopModes{{
    {StopMode::kFixed, "fixed"},
    {StopMode::kBestPsnr, "best_psnr"},
}};

constexpr double kDivergenceFactor = 1e3;
constexpr int kDivergencePatience = 100;
constexpr double kNoiseInputScale = 0.1;

// Stream tags for generators forked from the fit seed.
constexpr std::uint64_t kInputStream = 1;
constexpr std::uint64_t kPerturbStream = 2;

void copy_plane(const ImageBuffer& img, ad::Tensor& t, int first_channel) {
  const std::size_t plane = static_cast<std::size_t>(img.width()) * img.height();
  for (int c = 0; c < ImageBuffer::kChannels; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      t[(first_channel + c) * plane + i] = img.data()[c * plane + i];
    }
  }
}

}  // namespace

std::string_view to_string(InputMode mode) {
  for (const auto& [m, s] : kInputModes) {
    if (m == mode) return s;
  }
  return "?";
}

InputMode parse_input_mode(std::string_view s) {
  for (const auto& [m, name] : kInputModes) {
    if (name == s) return m;
  }
  throw ConfigError("unknown input mode '" + std::string(s) +
                    "' (expected noise|image|concat_flash)");
}

std::string_view to_string(StopMode mode) {
  for (const auto& [m, s] : kStopModes) {
    if (m == mode) return s;
  }
  return "?";
}

StopMode parse_stop_mode(std::string_view s) {
  for (const auto& [m, name] : kStopModes) {
    if (name == s) return m;
  }
  throw ConfigError("unknown stop mode '" + std::string(s) + "' (expected fixed|best_psnr)");
}

FitConfig FitConfig::defaults(TaskKind kind) {
  FitConfig c;
  switch (kind) {
    case TaskKind::kDenoise:
      c.iterations = 1800;
      c.input_mode = InputMode::kNoise;
      break;
    case TaskKind::kSuperResolve:
      c.iterations = 2000;
      c.input_mode = InputMode::kImage;
      break;
    case TaskKind::kInpaint:
      c.iterations = 3000;
      c.input_mode = InputMode::kNoise;
      break;
    case TaskKind::kFlash:
      c.iterations = 2000;
      c.input_mode = InputMode::kConcatFlash;
      break;
  }
  return c;
}

void FitConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (!(adam.learning_rate > 0.0) || !std::isfinite(adam.learning_rate)) {
    throw ConfigError("learning_rate must be finite and > 0");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) throw ConfigError("beta1 must be in [0, 1)");
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) throw ConfigError("beta2 must be in [0, 1)");
  if (!(adam.eps > 0.0)) throw ConfigError("eps must be > 0");
  if (input_channels < 1) throw ConfigError("input_channels must be >= 1");
  if (!(input_noise_std >= 0.0) || !std::isfinite(input_noise_std)) {
    throw ConfigError("input_noise_std must be finite and >= 0");
  }
  if (trace_every < 1) throw ConfigError("trace_every must be >= 1");
}

ad::Tensor prepare_input(const TaskSpec& task, InputMode mode, int channels, Rng& rng) {
  const int w = task.output_width();
  const int h = task.output_height();
  switch (mode) {
    case InputMode::kNoise: {
      if (channels < 1) throw ConfigError("noise input needs >= 1 channel");
      ad::Tensor z(ad::Shape{1, channels, h, w});
      for (auto& v : z.data()) v = static_cast<float>(kNoiseInputScale * rng.uniform());
      return z;
    }
    case InputMode::kImage: {
      if (task.kind == TaskKind::kFlash) {
        throw ConfigError("flash tasks need the concat_flash input mode");
      }
      if (task.kind == TaskKind::kSuperResolve) {
        return upsample(task.corrupted, task.scale, ResizeMethod::kBicubic).to_tensor();
      }
      return task.corrupted.to_tensor();
    }
    case InputMode::kConcatFlash: {
      if (task.kind != TaskKind::kFlash) {
        throw ConfigError("concat_flash input mode is only valid for flash tasks");
      }
      ad::Tensor z(ad::Shape{1, 2 * ImageBuffer::kChannels, h, w});
      copy_plane(task.flash, z, 0);
      copy_plane(task.corrupted, z, ImageBuffer::kChannels);
      return z;
    }
  }
  throw ConfigError("unknown input mode");
}

TaskSpec pad_task(const TaskSpec& task, int divisor, PadGeometry* geometry) {
  TaskSpec out = task;
  const int lr_divisor =
      task.kind == TaskKind::kSuperResolve ? std::max(1, divisor / task.scale) : divisor;
  PadGeometry g;
  out.corrupted = pad_to_divisible(task.corrupted, lr_divisor, &g);
  if (task.kind == TaskKind::kInpaint) out.mask = pad_to_divisible(task.mask, lr_divisor);
  if (task.kind == TaskKind::kFlash) out.flash = pad_to_divisible(task.flash, lr_divisor, nullptr);
  if (geometry) {
    const int s = task.kind == TaskKind::kSuperResolve ? task.scale : 1;
    *geometry = {g.width * s, g.height * s, g.padded_width * s, g.padded_height * s};
  }
  return out;
}

RestorationRun fit(const MedSpec& spec_in, const TaskSpec& task, const FitConfig& config,
                   const TraceCallback& on_trace) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  task.validate();
  if (config.stop_mode == StopMode::kBestPsnr && !task.reference) {
    throw ConfigError("stop mode best_psnr needs a reference image");
  }

  Rng base(config.seed);
  Rng input_rng = base.fork(kInputStream);
  Rng perturb_rng = base.fork(kPerturbStream);

  PadGeometry geometry;
  const TaskSpec padded = pad_task(task, spec_in.required_divisor(), &geometry);
  const ad::Tensor z = prepare_input(padded, config.input_mode, config.input_channels, input_rng);

  MedSpec spec = spec_in;
  spec.input_channels = z.channels();
  MedNetwork net = MedNetwork::build(spec);
  const PyramidTargets targets = build_targets(padded, spec.levels());
  Adam adam(config.adam);

  RestorationRun run;
  run.spec = spec;
  run.parameter_count = net.parameter_count();
  run.losses.reserve(config.iterations + 1);

  std::optional<double> initial_loss;
  int diverging = 0;
  ImageBuffer best_image;
  ImageBuffer last_image;
  ad::Tensor zi = z;

  for (int it = 0; it <= config.iterations; ++it) {
    if (config.input_noise_std > 0.0) {
      for (std::size_t i = 0; i < zi.numel(); ++i) {
        zi[i] = static_cast<float>(z[i] + config.input_noise_std * perturb_rng.normal());
      }
    }
    ad::Graph<float> graph;
    Heads<float> heads = net.forward(graph, graph.constant(zi, "z"));
    ad::Var<float> loss = task_loss(padded, heads, targets);
    const double value = loss.value().item();
    run.losses.push_back(value);

    if (!initial_loss) initial_loss = value;
    diverging = value > kDivergenceFactor * *initial_loss ? diverging + 1 : 0;
    if (diverging >= kDivergencePatience) {
      throw NumericalError("fit", "fit diverged: loss " + format_number(value) +
                                      " exceeded 1000x the initial loss for " +
                                      std::to_string(kDivergencePatience) +
                                      " consecutive iterations");
    }

    const bool last = it == config.iterations;
    if (it % config.trace_every == 0 || last) {
      ImageBuffer out = crop_back(ImageBuffer::from_tensor(heads[0].value()), geometry);
      TraceRow row{it, value, std::nullopt, std::nullopt};
      if (task.reference) {
        row.psnr = psnr(out, *task.reference);
        row.ssim = ssim(out, *task.reference);
        if (!run.best_psnr || *row.psnr > *run.best_psnr) {
          run.best_psnr = row.psnr;
          run.best_iteration = it;
          if (config.stop_mode == StopMode::kBestPsnr) best_image = out;
        }
      }
      run.trace.push_back(row);
      if (on_trace) on_trace(row);
      if (last) {
        last_image = std::move(out);
        run.final_psnr = row.psnr;
        run.final_ssim = row.ssim;
      }
    }
    if (last) break;

    net.zero_grad();
    graph.backward(loss);
    adam.step(net.parameters());
  }

  if (config.stop_mode == StopMode::kBestPsnr) {
    run.restored = std::move(best_image);
    run.selected_iteration = run.best_iteration;
  } else {
    run.restored = std::move(last_image);
    run.selected_iteration = config.iterations;
  }
  run.restored.set_source({});
  run.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return run;
}

}  // namespace med
