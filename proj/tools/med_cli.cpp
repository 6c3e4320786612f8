#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "med/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Single-image restoration with untrained multi-level encoder-decoder networks"};
  app.require_subcommand(1);

  med::Overrides overrides;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;

  auto* restore = app.add_subcommand("restore", "fit one network to one corrupted image");
  std::string config;
  restore->add_option("--config", config, "experiment JSON")->required();
  restore->add_option("--out", out, "output directory (overrides the config)");
  restore->add_option("--seed", seed, "network and fit seed (overrides the config)");

  auto* degrade = app.add_subcommand("degrade", "write a corrupted copy of a clean image");
  med::DegradeRequest request;
  std::string kind = "denoise";
  std::string degrade_out;
  std::optional<double> drop;
  std::vector<int> rect;
  degrade->add_option("--input", request.input, "clean PNG")->required()->check(CLI::ExistingFile);
  degrade->add_option("--kind", kind, "denoise | sr | inpaint")
      ->check(CLI::IsMember({"denoise", "sr", "inpaint"}));
  degrade->add_option("--sigma", request.sigma, "noise std on the 0..255 scale");
  degrade->add_option("--scale", request.scale, "sr downsampling factor (2 or 4)");
  degrade->add_option("--drop", drop, "fraction of pixels to drop");
  degrade->add_option("--rect", rect, "hole rectangle: x y width height")->expected(4);
  degrade->add_option("--seed", request.seed, "degradation seed");
  degrade->add_option("--out", degrade_out, "output directory")->required();

  auto* ablate = app.add_subcommand("ablate", "fit every variant of an ablation plan");
  std::string plan;
  std::optional<int> workers;
  ablate->add_option("--plan", plan, "ablation plan JSON")->required();
  ablate->add_option("--out", out, "output directory (overrides the plan)");
  ablate->add_option("--seed", seed, "seed shared by all variants (overrides the plan)");
  ablate->add_option("--workers", workers, "parallel variants (default: $MED_WORKERS or 1)")
      ->check(CLI::PositiveNumber);

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every op");
  med::GradcheckRequest gc;
  std::string spec;
  gradcheck->add_option("--config", spec, "network spec JSON (default: 3-level IntraSkip)");
  gradcheck->add_option("--size", gc.size, "input side length (<= 16)");
  gradcheck->add_option("--seed", gc.seed, "seed for the per-op fixtures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : med::kExitValidation;
  }

  if (out) overrides.output_dir = *out;
  overrides.seed = seed;

  if (*restore) return med::cmd_restore(config, overrides, std::cout, std::cerr);
  if (*degrade) {
    request.kind = med::parse_task_kind(kind);
    request.drop_fraction = drop;
    if (!rect.empty()) request.rect = std::array<int, 4>{rect[0], rect[1], rect[2], rect[3]};
    request.output_dir = degrade_out;
    return med::cmd_degrade(request, std::cout, std::cerr);
  }
  if (*ablate) return med::cmd_ablate(plan, overrides, workers, std::cout, std::cerr);
  if (!spec.empty()) gc.spec_path = spec;
  return med::cmd_gradcheck(gc, std::cout, std::cerr);
}
