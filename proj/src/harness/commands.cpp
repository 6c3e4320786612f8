#include "med/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "med/error.hpp"
#include "med/image_io.hpp"
#include "med/med_network.hpp"

namespace med {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json metric(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (!std::isfinite(*v)) return format_number(*v);
  return *v;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

json run_summary(const RestorationRun& run) {
  return json{
      {"variant", variant_name(run.spec)},
      {"parameter_count", run.parameter_count},
      {"selected_iteration", run.selected_iteration},
      {"final_psnr", metric(run.final_psnr)},
      {"final_ssim", metric(run.final_ssim)},
      {"best_psnr", metric(run.best_psnr)},
      {"best_iteration", run.best_iteration},
      {"final_loss", run.losses.back()},
      {"seconds", run.seconds},
  };
}

void write_outputs(const fs::path& dir, const json& config, const RestorationRun& run) {
  fs::create_directories(dir);
  write_png(run.restored, dir / "restored.png");
  write_text(dir / "trace.csv", trace_csv(run.trace));
  const json doc{{"config", config}, {"result", run_summary(run)}};
  write_text(dir / "run.json", doc.dump(2) + "\n");
}

std::string directory_name(std::size_t index, const std::string& name) {
  std::string safe;
  for (char c : name) safe += c == '*' ? std::string("_star") : std::string(1, c);
  std::ostringstream s;
  s << std::setw(2) << std::setfill('0') << index << "_" << safe;
  return s.str();
}

}  // namespace

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const NumericalError& e) {
    err << "numerical abort in '" << e.op() << "': " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ShapeError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitValidation;
  }
}

RestorationRun run_experiment(const ExperimentConfig& config, std::ostream& log) {
  const TaskSpec task = materialize(config.task);
  RestorationRun run = fit(config.network, task, config.fit, [&](const TraceRow& row) {
    log << "iter " << row.iteration << " loss " << format_number(row.loss);
    if (row.psnr) log << " psnr " << format_number(*row.psnr);
    log << "\n";
  });
  ExperimentConfig resolved = config;
  resolved.network = run.spec;
  write_outputs(config.output_dir, resolved.resolved(), run);
  return run;
}

int cmd_restore(const fs::path& config_path, const Overrides& overrides, std::ostream& out,
                std::ostream& err) {
  return guarded(
      [&] {
        const ExperimentConfig config = load_experiment(config_path, overrides);
        const RestorationRun run = run_experiment(config, out);
        out << "restored " << variant_name(run.spec) << " -> " << config.output_dir.string()
            << "\n";
        return kExitOk;
      },
      err);
}

int cmd_degrade(const DegradeRequest& r, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const ImageBuffer img = read_png(r.input);
        Rng rng(r.seed);
        fs::create_directories(r.output_dir);
        switch (r.kind) {
          case TaskKind::kDenoise:
            write_png(degrade_noise(img, r.sigma, rng), r.output_dir / "corrupted.png");
            break;
          case TaskKind::kSuperResolve:
            write_png(degrade_downsample(img, r.scale), r.output_dir / "corrupted.png");
            break;
          case TaskKind::kInpaint: {
            if (r.drop_fraction.has_value() == r.rect.has_value()) {
              throw ConfigError("inpaint degradation needs exactly one of --drop or --rect");
            }
            MaskedImage m;
            if (r.drop_fraction) {
              m = degrade_mask_random(img, *r.drop_fraction, rng);
            } else {
              const auto& q = *r.rect;
              m = degrade_mask_region(img,
                                      rect_mask(img.width(), img.height(), q[0], q[1], q[2], q[3]));
            }
            write_png(m.image, r.output_dir / "corrupted.png");
            write_mask(m.mask, r.output_dir / "mask.png");
            break;
          }
          case TaskKind::kFlash:
            throw ConfigError("flash tasks have no synthetic degradation");
        }
        out << "wrote " << (r.output_dir / "corrupted.png").string() << "\n";
        return kExitOk;
      },
      err);
}

int default_workers() {
  if (const char* env = std::getenv("MED_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<int>(n);
  }
  return 1;
}

std::vector<AblationRow> run_ablation(const AblationPlan& plan, int workers, std::ostream& log) {
  plan.validate();
  if (workers < 1) throw ConfigError("workers must be >= 1");
  const TaskSpec task = materialize(plan.task);
  std::vector<AblationRow> rows(plan.variants.size());
  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < plan.variants.size(); i = next++) {
      const MedSpec& spec = plan.variants[i];
      AblationRow& row = rows[i];
      row.name = variant_name(spec);
      row.directory = directory_name(i, row.name);
      try {
        const RestorationRun run = fit(spec, task, plan.fit);
        ExperimentConfig resolved{run.spec, plan.task, plan.fit, plan.output_dir / row.directory};
        write_outputs(resolved.output_dir, resolved.resolved(), run);
        row.final_psnr = run.final_psnr;
        row.best_psnr = run.best_psnr;
        row.best_iteration = run.best_iteration;
        row.ssim = run.final_ssim;
        row.parameter_count = run.parameter_count;
        row.seconds = run.seconds;
        row.trace = run.trace;
      } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
      }
      std::lock_guard lock(log_mutex);
      log << row.name << ": " << row.status;
      if (row.final_psnr) log << " final psnr " << format_number(*row.final_psnr);
      log << "\n";
    }
  };

  const int n = std::min<int>(workers, static_cast<int>(plan.variants.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  fs::create_directories(plan.output_dir);
  write_text(plan.output_dir / "summary.csv", summary_csv(rows));
  write_text(plan.output_dir / "curves.csv", curves_csv(rows));
  return rows;
}

std::string summary_csv(const std::vector<AblationRow>& rows) {
  std::string out =
      "name,final_psnr,best_psnr,best_iteration,ssim,parameter_count,seconds,status\n";
  for (const auto& r : rows) {
    const bool ok = r.status == "ok";
    out += csv_field(r.name) + ",";
    out += optional_number(r.final_psnr) + ",";
    out += optional_number(r.best_psnr) + ",";
    out += (ok && r.best_psnr ? std::to_string(r.best_iteration) : std::string()) + ",";
    out += optional_number(r.ssim) + ",";
    out += (ok ? std::to_string(r.parameter_count) : std::string()) + ",";
    out += (ok ? format_number(r.seconds) : std::string()) + ",";
    out += csv_field(r.status) + "\n";
  }
  return out;
}

std::string curves_csv(const std::vector<AblationRow>& rows) {
  std::string out = "iteration";
  std::map<std::string, int> seen;
  std::set<int> iterations;
  for (const auto& r : rows) {
    const int k = seen[r.name]++;
    out += "," + csv_field(k == 0 ? r.name : r.name + "#" + std::to_string(k + 1));
    for (const auto& t : r.trace) iterations.insert(t.iteration);
  }
  out += "\n";
  for (int it : iterations) {
    out += std::to_string(it);
    for (const auto& r : rows) {
      out += ",";
      for (const auto& t : r.trace) {
        if (t.iteration != it) continue;
        out += format_number(t.psnr ? *t.psnr : t.loss);
        break;
      }
    }
    out += "\n";
  }
  return out;
}

int cmd_ablate(const fs::path& plan_path, const Overrides& overrides,
               std::optional<int> workers, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const AblationPlan plan = load_ablation(plan_path, overrides);
        const auto rows = run_ablation(plan, workers.value_or(default_workers()), out);
        const auto failed = std::count_if(rows.begin(), rows.end(),
                                          [](const AblationRow& r) { return r.status != "ok"; });
        out << rows.size() << " variants, " << failed << " failed -> "
            << (plan.output_dir / "summary.csv").string() << "\n";
        return kExitOk;
      },
      err);
}

int cmd_gradcheck(const GradcheckRequest& r, std::ostream& out, std::ostream& err,
                  const std::vector<GradcheckCase>& extra) {
  return guarded(
      [&] {
        if (r.size < 1 || r.size > 16) throw ConfigError("gradcheck size must be in 1..16");
        const MedSpec spec = r.spec_path ? med_spec_from_json(read_json(*r.spec_path))
                                         : default_gradcheck_spec();
        auto cases = op_cases(r.seed);
        for (auto& c : network_cases(spec, r.size)) cases.push_back(std::move(c));
        for (const auto& c : extra) cases.push_back(c);

        out << "network " << variant_name(spec) << " " << to_json(spec).dump() << " at "
            << r.size << "x" << r.size << ", step " << format_number(r.options.step)
            << ", tolerance " << format_number(r.options.tolerance) << "\n";
        out << std::left << std::setw(26) << "op" << std::setw(14) << "max_rel_err"
            << std::setw(9) << "entries" << std::setw(9) << "reduced" << std::setw(9)
            << "skipped" << "status\n";
        bool all = true;
        for (const auto& c : cases) {
          const GradcheckResult res = check_gradients(c, r.options);
          all = all && res.passed;
          out << std::left << std::setw(26) << res.name << std::setw(14)
              << format_number(res.max_rel_error) << std::setw(9) << res.entries
              << std::setw(9) << res.reduced << std::setw(9) << res.skipped
              << (res.passed ? "PASS" : "FAIL") << "\n";
        }
        out << (all ? "all ops pass" : "gradient check FAILED") << "\n";
        return all ? kExitOk : kExitGradcheck;
      },
      err);
}

}  // namespace med
