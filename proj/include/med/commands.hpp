#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "med/config.hpp"
#include "med/gradcheck.hpp"

namespace med {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitNumerical = 2,
  kExitGradcheck = 3,
};

/// Runs `body`, mapping configuration and I/O errors to exit 1 and numerical
/// aborts to exit 2. Diagnostics go to `err`.
int guarded(const std::function<int()>& body, std::ostream& err);

/// Fits one experiment and writes restored.png, trace.csv and run.json into
/// its output directory. Nothing is written if the fit fails.
RestorationRun run_experiment(const ExperimentConfig& config, std::ostream& log);
int cmd_restore(const std::filesystem::path& config_path, const Overrides& overrides,
                std::ostream& out, std::ostream& err);

struct DegradeRequest {
  std::filesystem::path input;
  TaskKind kind = TaskKind::kDenoise;
  double sigma = 25.0;
  int scale = 2;
  std::optional<double> drop_fraction;
  std::optional<std::array<int, 4>> rect;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
};

/// Writes corrupted.png (plus mask.png for inpainting) into output_dir.
int cmd_degrade(const DegradeRequest& request, std::ostream& out, std::ostream& err);

struct AblationRow {
  std::string name;
  std::string directory;
  std::optional<double> final_psnr;
  std::optional<double> best_psnr;
  int best_iteration = 0;
  std::optional<double> ssim;
  std::size_t parameter_count = 0;
  double seconds = 0.0;
  std::string status = "ok";
  std::vector<TraceRow> trace;
};

/// Runs every variant (up to `workers` at once) and writes per-variant
/// outputs, summary.csv and curves.csv. A failing variant becomes a row with
/// an error status.
std::vector<AblationRow> run_ablation(const AblationPlan& plan, int workers, std::ostream& log);
int cmd_ablate(const std::filesystem::path& plan_path, const Overrides& overrides,
               std::optional<int> workers, std::ostream& out, std::ostream& err);

/// Worker count from MED_WORKERS, else 1.
int default_workers();

std::string summary_csv(const std::vector<AblationRow>& rows);
/// One column per variant: PSNR against the reference, or loss without one.
std::string curves_csv(const std::vector<AblationRow>& rows);

struct GradcheckRequest {
  std::optional<std::filesystem::path> spec_path;
  int size = 16;
  std::uint64_t seed = 1;
  GradcheckOptions options;
};

/// Per-op and end-to-end finite-difference report; exit 3 if any case
/// exceeds the tolerance. `extra` cases are appended to the suite.
int cmd_gradcheck(const GradcheckRequest& request, std::ostream& out, std::ostream& err,
                  const std::vector<GradcheckCase>& extra = {});

}  // namespace med
