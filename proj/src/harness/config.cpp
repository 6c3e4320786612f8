#include "med/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "med/error.hpp"
#include "med/image_io.hpp"

namespace med {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_object(const json& j, const std::string& section) {
  if (!j.is_object()) throw ConfigError("'" + section + "' must be a JSON object");
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& section) {
  check_object(j, section);
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + section + "." + key + "'");
    }
  }
}

std::string where(const std::string& section, const std::string& key) {
  return "'" + section + "." + key + "'";
}

double get_number(const json& j, const std::string& key, const std::string& section) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where(section, key) + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(where(section, key) + " must be finite");
  return d;
}

int get_int(const json& j, const std::string& key, const std::string& section) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(where(section, key) + " must be an integer");
  return v.get<int>();
}

std::uint64_t get_u64(const json& j, const std::string& key, const std::string& section) {
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError(where(section, key) + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& key, const std::string& section) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError(where(section, key) + " must be a string");
  return v.get<std::string>();
}

fs::path get_path(const json& j, const std::string& key, const std::string& section,
                  const fs::path& base_dir, bool must_exist) {
  fs::path p = get_string(j, key, section);
  if (p.is_relative()) p = base_dir / p;
  p = p.lexically_normal();
  if (must_exist && !fs::exists(p)) {
    throw ConfigError(where(section, key) + ": file '" + p.string() + "' does not exist");
  }
  return p;
}

Degradation degradation_from_json(const json& j) {
  const std::string s = "task.degradation";
  check_keys(j, {"sigma", "drop_fraction", "rect", "seed"}, s);
  Degradation d;
  if (j.contains("sigma")) d.sigma = get_number(j, "sigma", s);
  if (j.contains("drop_fraction")) d.drop_fraction = get_number(j, "drop_fraction", s);
  if (j.contains("rect")) {
    const auto& r = j.at("rect");
    if (!r.is_array() || r.size() != 4) {
      throw ConfigError(where(s, "rect") + " must be [x, y, width, height]");
    }
    std::array<int, 4> rect{};
    for (int i = 0; i < 4; ++i) {
      if (!r[i].is_number_integer()) throw ConfigError(where(s, "rect") + " must hold integers");
      rect[i] = r[i].get<int>();
    }
    d.rect = rect;
  }
  if (j.contains("seed")) d.seed = get_u64(j, "seed", s);
  return d;
}

json degradation_to_json(const Degradation& d) {
  json j = json::object();
  if (d.sigma) j["sigma"] = *d.sigma;
  if (d.drop_fraction) j["drop_fraction"] = *d.drop_fraction;
  if (d.rect) j["rect"] = *d.rect;
  j["seed"] = d.seed;
  return j;
}

MedSpec network_from_json(const json& j) {
  check_object(j, "network");
  json copy = j;
  if (!copy.contains("input_channels")) copy["input_channels"] = 3;
  try {
    return med_spec_from_json(copy);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("network: ") + e.what());
  }
}

fs::path output_dir_from(const json& j, const fs::path& base_dir, const Overrides& o) {
  if (o.output_dir) return *o.output_dir;
  if (!j.contains("output_dir")) throw ConfigError("missing key 'output_dir'");
  return get_path(j, "output_dir", "config", base_dir, false);
}

}  // namespace

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

TaskDescriptor task_from_json(const json& j, const fs::path& base_dir) {
  const std::string s = "task";
  check_keys(j,
             {"kind", "image", "corrupted", "reference", "mask", "flash", "no_flash",
              "degradation", "scale", "lambda1", "lambda2", "lambda3"},
             s);
  if (!j.contains("kind")) throw ConfigError("missing key 'task.kind'");
  TaskDescriptor t;
  t.kind = parse_task_kind(get_string(j, "kind", s));
  for (const char* key : {"image", "corrupted", "reference", "mask", "flash", "no_flash"}) {
    if (!j.contains(key)) continue;
    const fs::path p = get_path(j, key, s, base_dir, true);
    if (std::string(key) == "image") t.image = p;
    if (std::string(key) == "corrupted") t.corrupted = p;
    if (std::string(key) == "reference") t.reference = p;
    if (std::string(key) == "mask") t.mask = p;
    if (std::string(key) == "flash") t.flash = p;
    if (std::string(key) == "no_flash") t.no_flash = p;
  }
  if (j.contains("degradation")) t.degradation = degradation_from_json(j.at("degradation"));
  if (j.contains("scale")) t.scale = get_int(j, "scale", s);
  for (int i = 0; i < 3; ++i) {
    const std::string key = "lambda" + std::to_string(i + 1);
    if (!j.contains(key)) continue;
    t.lambda[i] = get_number(j, key, s);
    if (t.lambda[i] < 0.0) throw ConfigError(where(s, key) + " must be >= 0");
  }

  // Source combinations per kind.
  const bool from_clean = t.image.has_value();
  const bool from_corrupted = t.corrupted.has_value();
  switch (t.kind) {
    case TaskKind::kDenoise:
      if (from_clean == from_corrupted) {
        throw ConfigError("denoise task needs exactly one of 'task.image' or 'task.corrupted'");
      }
      if (from_clean && (!t.degradation || !t.degradation->sigma)) {
        throw ConfigError("denoise task from a clean image needs 'task.degradation.sigma'");
      }
      break;
    case TaskKind::kSuperResolve:
      if (from_clean == from_corrupted) {
        throw ConfigError("sr task needs exactly one of 'task.image' or 'task.corrupted'");
      }
      if (t.scale != 2 && t.scale != 4) throw ConfigError("'task.scale' must be 2 or 4");
      break;
    case TaskKind::kInpaint:
      if (from_clean == from_corrupted) {
        throw ConfigError("inpaint task needs exactly one of 'task.image' or 'task.corrupted'");
      }
      if (from_corrupted && !t.mask) {
        throw ConfigError("inpaint task from a corrupted image needs 'task.mask'");
      }
      if (from_clean) {
        const int sources = (t.mask ? 1 : 0) +
                            (t.degradation && t.degradation->drop_fraction ? 1 : 0) +
                            (t.degradation && t.degradation->rect ? 1 : 0);
        if (sources != 1) {
          throw ConfigError(
              "inpaint task from a clean image needs exactly one of 'task.mask', "
              "'task.degradation.drop_fraction' or 'task.degradation.rect'");
        }
      }
      break;
    case TaskKind::kFlash:
      if (!t.flash || !t.no_flash || from_clean || from_corrupted) {
        throw ConfigError("flash task needs 'task.flash' and 'task.no_flash' only");
      }
      break;
  }
  return t;
}

json to_json(const TaskDescriptor& t) {
  json j = json::object();
  j["kind"] = std::string(to_string(t.kind));
  auto put = [&](const char* key, const std::optional<fs::path>& p) {
    if (p) j[key] = p->string();
  };
  put("image", t.image);
  put("corrupted", t.corrupted);
  put("reference", t.reference);
  put("mask", t.mask);
  put("flash", t.flash);
  put("no_flash", t.no_flash);
  if (t.degradation) j["degradation"] = degradation_to_json(*t.degradation);
  if (t.kind == TaskKind::kSuperResolve) j["scale"] = t.scale;
  j["lambda1"] = t.lambda[0];
  j["lambda2"] = t.lambda[1];
  j["lambda3"] = t.lambda[2];
  return j;
}

TaskSpec materialize(const TaskDescriptor& t) {
  TaskSpec spec;
  spec.kind = t.kind;
  spec.lambda = t.lambda;
  spec.scale = t.kind == TaskKind::kSuperResolve ? t.scale : 1;
  std::optional<ImageBuffer> clean;
  if (t.image) clean = read_png(*t.image);
  if (t.reference) spec.reference = read_png(*t.reference);
  else if (clean) spec.reference = clean;

  switch (t.kind) {
    case TaskKind::kDenoise:
      if (clean) {
        Rng rng(t.degradation->seed);
        spec.corrupted = degrade_noise(*clean, *t.degradation->sigma, rng);
      } else {
        spec.corrupted = read_png(*t.corrupted);
      }
      break;
    case TaskKind::kSuperResolve:
      spec.corrupted = clean ? degrade_downsample(*clean, t.scale) : read_png(*t.corrupted);
      break;
    case TaskKind::kInpaint:
      if (clean) {
        MaskedImage m;
        if (t.mask) {
          m = degrade_mask_region(*clean, read_mask(*t.mask));
        } else if (t.degradation->drop_fraction) {
          Rng rng(t.degradation->seed);
          m = degrade_mask_random(*clean, *t.degradation->drop_fraction, rng);
        } else {
          const auto& r = *t.degradation->rect;
          m = degrade_mask_region(
              *clean, rect_mask(clean->width(), clean->height(), r[0], r[1], r[2], r[3]));
        }
        spec.corrupted = std::move(m.image);
        spec.mask = std::move(m.mask);
      } else {
        spec.corrupted = read_png(*t.corrupted);
        spec.mask = read_mask(*t.mask);
      }
      break;
    case TaskKind::kFlash:
      spec.flash = read_png(*t.flash);
      spec.corrupted = read_png(*t.no_flash);
      break;
  }
  spec.validate();
  return spec;
}

FitConfig fit_from_json(const json& j, TaskKind kind) {
  const std::string s = "fit";
  check_keys(j,
             {"iterations", "learning_rate", "beta1", "beta2", "eps", "input_mode",
              "input_channels", "input_noise_std", "seed", "trace_every", "stop_mode"},
             s);
  FitConfig c = FitConfig::defaults(kind);
  if (j.contains("iterations")) c.iterations = get_int(j, "iterations", s);
  if (j.contains("learning_rate")) c.adam.learning_rate = get_number(j, "learning_rate", s);
  if (j.contains("beta1")) c.adam.beta1 = get_number(j, "beta1", s);
  if (j.contains("beta2")) c.adam.beta2 = get_number(j, "beta2", s);
  if (j.contains("eps")) c.adam.eps = get_number(j, "eps", s);
  if (j.contains("input_mode")) c.input_mode = parse_input_mode(get_string(j, "input_mode", s));
  if (j.contains("input_channels")) c.input_channels = get_int(j, "input_channels", s);
  if (j.contains("input_noise_std")) c.input_noise_std = get_number(j, "input_noise_std", s);
  if (j.contains("seed")) c.seed = get_u64(j, "seed", s);
  if (j.contains("trace_every")) c.trace_every = get_int(j, "trace_every", s);
  if (j.contains("stop_mode")) c.stop_mode = parse_stop_mode(get_string(j, "stop_mode", s));
  c.validate();
  return c;
}

json to_json(const FitConfig& c) {
  return json{
      {"iterations", c.iterations},
      {"learning_rate", c.adam.learning_rate},
      {"beta1", c.adam.beta1},
      {"beta2", c.adam.beta2},
      {"eps", c.adam.eps},
      {"input_mode", std::string(to_string(c.input_mode))},
      {"input_channels", c.input_channels},
      {"input_noise_std", c.input_noise_std},
      {"seed", c.seed},
      {"trace_every", c.trace_every},
      {"stop_mode", std::string(to_string(c.stop_mode))},
  };
}

json ExperimentConfig::resolved() const {
  return json{
      {"network", to_json(network)},
      {"task", to_json(task)},
      {"fit", to_json(fit)},
      {"output_dir", output_dir.string()},
  };
}

ExperimentConfig experiment_from_json(const json& j, const fs::path& base_dir,
                                      const Overrides& overrides) {
  check_keys(j, {"network", "task", "fit", "output_dir"}, "config");
  for (const char* key : {"network", "task"}) {
    if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  }
  ExperimentConfig c;
  c.network = network_from_json(j.at("network"));
  c.task = task_from_json(j.at("task"), base_dir);
  c.fit = fit_from_json(j.contains("fit") ? j.at("fit") : json::object(), c.task.kind);
  c.output_dir = output_dir_from(j, base_dir, overrides);
  if (overrides.seed) {
    c.network.seed = *overrides.seed;
    c.fit.seed = *overrides.seed;
  }
  return c;
}

ExperimentConfig load_experiment(const fs::path& path, const Overrides& overrides) {
  return experiment_from_json(read_json(path), fs::absolute(path).parent_path(), overrides);
}

namespace {

constexpr std::array<std::pair<AblationAxis, std::string_view>, 4> kAxes{{
    {AblationAxis::kDepth, "depth"},
    {AblationAxis::kSkip, "skip"},
    {AblationAxis::kCascade, "cascade"},
    {AblationAxis::kComposition, "composition"},
}};

}  // namespace

std::string_view to_string(AblationAxis axis) {
  for (const auto& [a, s] : kAxes) {
    if (a == axis) return s;
  }
  return "?";
}

AblationAxis parse_ablation_axis(std::string_view s) {
  for (const auto& [a, name] : kAxes) {
    if (name == s) return a;
  }
  throw ConfigError("unknown ablation axis '" + std::string(s) +
                    "' (expected depth|skip|cascade|composition)");
}

void AblationPlan::validate() const {
  if (variants.empty()) throw ConfigError("ablation plan has no variants");
  const MedSpec& first = variants.front();
  for (std::size_t i = 1; i < variants.size(); ++i) {
    const MedSpec& v = variants[i];
    auto fail = [&](const std::string& field) {
      throw ConfigError("variant " + std::to_string(i) + " (" + variant_name(v) +
                        ") differs from variant 0 in '" + field + "', which the " +
                        std::string(to_string(axis)) + " axis holds fixed");
    };
    if (v.base_channels() != first.base_channels()) fail("base_channels");
    if (v.input_channels != first.input_channels) fail("input_channels");
    if (v.seed != first.seed) fail("seed");
    switch (axis) {
      case AblationAxis::kSkip:
        if (v.generator != first.generator || v.enhancers != first.enhancers) fail("depths");
        if (v.cascade != first.cascade) fail("cascade");
        break;
      case AblationAxis::kCascade:
        if (v.generator != first.generator || v.enhancers != first.enhancers) fail("depths");
        if (v.skip != first.skip) fail("skip");
        break;
      case AblationAxis::kDepth:
        if (v.cascade != first.cascade) fail("cascade");
        break;
      case AblationAxis::kComposition:
        if (v.generator != first.generator) fail("generator_depth");
        if (v.cascade != first.cascade) fail("cascade");
        break;
    }
  }
}

AblationPlan ablation_from_json(const json& j, const fs::path& base_dir,
                                const Overrides& overrides) {
  check_keys(j, {"axis", "variants", "defaults", "task", "fit", "output_dir"}, "plan");
  for (const char* key : {"axis", "variants", "task"}) {
    if (!j.contains(key)) throw ConfigError(std::string("missing key 'plan.") + key + "'");
  }
  AblationPlan plan;
  plan.axis = parse_ablation_axis(get_string(j, "axis", "plan"));
  plan.task = task_from_json(j.at("task"), base_dir);
  plan.fit = fit_from_json(j.contains("fit") ? j.at("fit") : json::object(), plan.task.kind);
  plan.output_dir = output_dir_from(j, base_dir, overrides);

  int generator_depth = 5;
  int base_channels = 32;
  std::uint64_t seed = 0;
  if (j.contains("defaults")) {
    const auto& d = j.at("defaults");
    check_keys(d, {"generator_depth", "base_channels", "seed"}, "plan.defaults");
    if (d.contains("generator_depth")) generator_depth = get_int(d, "generator_depth", "plan.defaults");
    if (d.contains("base_channels")) base_channels = get_int(d, "base_channels", "plan.defaults");
    if (d.contains("seed")) seed = get_u64(d, "seed", "plan.defaults");
  }
  if (overrides.seed) {
    seed = *overrides.seed;
    plan.fit.seed = *overrides.seed;
  }

  const auto& variants = j.at("variants");
  if (!variants.is_array() || variants.empty()) {
    throw ConfigError("'plan.variants' must be a non-empty array");
  }
  for (const auto& v : variants) {
    MedSpec spec;
    if (v.is_string()) {
      spec = spec_from_name(v.get<std::string>(), generator_depth, base_channels, seed);
    } else {
      spec = network_from_json(v);
      if (overrides.seed) spec.seed = seed;
    }
    spec.validate();
    plan.variants.push_back(spec);
  }
  plan.validate();
  return plan;
}

AblationPlan load_ablation(const fs::path& path, const Overrides& overrides) {
  return ablation_from_json(read_json(path), fs::absolute(path).parent_path(), overrides);
}

}  // namespace med
