#include "med/med_spec.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "med/error.hpp"

namespace med {

namespace {

constexpr std::array<std::pair<SkipMode, std::string_view>, 5> kSkipNames{{
    {SkipMode::kNone, "none"},
    {SkipMode::kIntra, "intra"},
    {SkipMode::kFull, "full"},
    {SkipMode::kInterEncEnc, "inter_ee"},
    {SkipMode::kInterDecEnc, "inter_de"},
}};

// Classification grid: rows cascade / no cascade, columns no skip / intra / full.
struct ClassCell {
  SkipMode skip;
  bool cascade;
  std::string_view name;
};
constexpr std::array<ClassCell, 6> kClasses{{
    {SkipMode::kNone, false, "MED"},
    {SkipMode::kIntra, false, "MEDS"},
    {SkipMode::kFull, false, "MEDSF"},
    {SkipMode::kNone, true, "MEDC"},
    {SkipMode::kIntra, true, "MEDSC"},
    {SkipMode::kFull, true, "MEDSFC"},
}};

bool has_intra(SkipMode m) {
  return m == SkipMode::kIntra || m == SkipMode::kFull;
}
bool has_enc_enc(SkipMode m) {
  return m == SkipMode::kFull || m == SkipMode::kInterEncEnc;
}

}  // namespace

std::string_view to_string(SkipMode mode) {
  for (const auto& [m, s] : kSkipNames) {
    if (m == mode) return s;
  }
  return "?";
}

SkipMode parse_skip_mode(std::string_view s) {
  for (const auto& [m, name] : kSkipNames) {
    if (name == s) return m;
  }
  throw ConfigError("unknown skip mode '" + std::string(s) +
                    "' (expected none|intra|full|inter_ee|inter_de)");
}

void MedSpec::validate() const {
  if (generator.depth < 2) {
    throw ConfigError("generator_depth must be >= 2");
  }
  if (enhancers.size() > 2) {
    throw ConfigError("at most two enhancers are supported");
  }
  if (generator.base_channels < 1) {
    throw ConfigError("base_channels must be >= 1");
  }
  if (input_channels < 1) {
    throw ConfigError("input_channels must be >= 1");
  }
  for (const auto& e : enhancers) {
    if (e.depth < 2) throw ConfigError("enhancer depth must be >= 2");
    if (e.depth >= generator.depth) {
      throw ConfigError("enhancer depth " + std::to_string(e.depth) +
                        " must be less than generator depth " +
                        std::to_string(generator.depth));
    }
    if (e.base_channels != generator.base_channels) {
      throw ConfigError("all ed blocks must share base_channels");
    }
  }
  if (enhancers.empty()) {
    if (skip == SkipMode::kFull || skip == SkipMode::kInterEncEnc ||
        skip == SkipMode::kInterDecEnc) {
      throw ConfigError("skip mode '" + std::string(to_string(skip)) +
                        "' needs at least one enhancer");
    }
    if (cascade) throw ConfigError("cascade needs at least one enhancer");
  }
}

int MedSpec::required_divisor() const {
  int divisor = 1;
  for (int l = 0; l < levels(); ++l) {
    divisor = std::max(divisor, 1 << (l + depth(l)));
  }
  return divisor;
}

MedSpec MedSpec::standard(int generator_depth, int levels, SkipMode skip,
                          bool cascade, int base_channels, std::uint64_t seed) {
  MedSpec s;
  s.generator = {generator_depth, base_channels};
  for (int l = 1; l < levels; ++l) {
    s.enhancers.push_back({generator_depth - l, base_channels});
  }
  s.skip = skip;
  s.cascade = cascade;
  s.seed = seed;
  return s;
}

int stage_channels(int base_channels, int stage) {
  if (stage <= 1) return base_channels;
  const int shift = std::min(stage - 1, 2);
  return base_channels << shift;
}

int expected_skip_links(const MedSpec& spec) {
  int links = 0;
  if (has_intra(spec.skip)) {
    for (int l = 0; l < spec.levels(); ++l) links += spec.depth(l) - 1;
  }
  for (int l = 0; l + 1 < spec.levels(); ++l) {
    const int src = spec.depth(l);
    const int dst = spec.depth(l + 1);
    if (has_enc_enc(spec.skip)) links += std::min(dst, src - 1);
    if (spec.skip == SkipMode::kInterDecEnc) {
      links += std::max(0, std::min(dst, src - 2));
    }
  }
  return links;
}

int expected_concat_count(const MedSpec& spec) {
  const int cascades = spec.cascade ? spec.levels() - 1 : 0;
  return expected_skip_links(spec) + cascades;
}

std::string classify(SkipMode skip, bool cascade) {
  for (const auto& cell : kClasses) {
    if (cell.skip == skip && cell.cascade == cascade) {
      return std::string(cell.name);
    }
  }
  throw ConfigError("skip mode '" + std::string(to_string(skip)) +
                    "' has no classification name");
}

std::pair<SkipMode, bool> parse_classification(std::string_view name) {
  for (const auto& cell : kClasses) {
    if (cell.name == name) return {cell.skip, cell.cascade};
  }
  throw ConfigError("unknown network class '" + std::string(name) + "'");
}

int config_count(int generator_depth) {
  if (generator_depth < 2) {
    throw ConfigError("generator depth must be >= 2");
  }
  constexpr int kSkipBases = 1;
  constexpr int kSkipModes = 5;
  constexpr int kCascadeSettings = 2;
  return kSkipBases * kSkipModes * kCascadeSettings * (generator_depth - 1);
}

std::string variant_name(const MedSpec& spec) {
  if (spec.enhancers.empty()) {
    const std::string prefix = spec.skip == SkipMode::kNone ? "ED" : "EDS";
    return prefix + std::to_string(spec.generator.depth);
  }
  std::string name;
  if (spec.skip == SkipMode::kInterEncEnc || spec.skip == SkipMode::kInterDecEnc) {
    name = spec.skip == SkipMode::kInterEncEnc ? "MEDIEE" : "MEDIDE";
    if (spec.cascade) name += "C";
  } else {
    name = classify(spec.skip, spec.cascade);
  }
  if (spec.enhancers.size() == 1) name += "*";
  return name;
}

MedSpec spec_from_name(std::string_view name, int generator_depth,
                       int base_channels, std::uint64_t seed) {
  auto digits_after = [&](std::string_view prefix) -> int {
    const auto rest = name.substr(prefix.size());
    if (rest.empty() ||
        !std::all_of(rest.begin(), rest.end(),
                     [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) != 0; })) {
      throw ConfigError("malformed variant name '" + std::string(name) + "'");
    }
    return std::stoi(std::string(rest));
  };
  if (name.starts_with("EDS")) {
    return MedSpec::standard(digits_after("EDS"), 1, SkipMode::kIntra, false,
                             base_channels, seed);
  }
  if (name.starts_with("ED")) {
    return MedSpec::standard(digits_after("ED"), 1, SkipMode::kNone, false,
                             base_channels, seed);
  }
  std::string_view core = name;
  int levels = 3;
  if (core.ends_with("*")) {
    core.remove_suffix(1);
    levels = 2;
  }
  SkipMode skip;
  bool cascade = false;
  if (core.starts_with("MEDIEE") || core.starts_with("MEDIDE")) {
    skip = core.starts_with("MEDIEE") ? SkipMode::kInterEncEnc
                                      : SkipMode::kInterDecEnc;
    const auto tail = core.substr(6);
    if (tail == "C") {
      cascade = true;
    } else if (!tail.empty()) {
      throw ConfigError("malformed variant name '" + std::string(name) + "'");
    }
  } else {
    std::tie(skip, cascade) = parse_classification(core);
  }
  return MedSpec::standard(generator_depth, levels, skip, cascade,
                           base_channels, seed);
}

nlohmann::json to_json(const MedSpec& spec) {
  nlohmann::json enh = nlohmann::json::array();
  for (const auto& e : spec.enhancers) enh.push_back(e.depth);
  return nlohmann::json{
      {"generator_depth", spec.generator.depth},
      {"enhancer_depths", enh},
      {"skip", std::string(to_string(spec.skip))},
      {"cascade", spec.cascade},
      {"base_channels", spec.generator.base_channels},
      {"input_channels", spec.input_channels},
      {"seed", spec.seed},
  };
}

MedSpec med_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("network spec must be a JSON object");
  static const std::set<std::string> kKeys{
      "generator_depth", "enhancer_depths", "skip",          "cascade",
      "base_channels",   "seed",            "input_channels"};
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.contains(key)) {
      throw ConfigError("unknown network key '" + key + "'");
    }
  }
  auto require = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) {
      throw ConfigError(std::string("missing network key '") + key + "'");
    }
    return j.at(key);
  };
  auto as_int = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number_integer()) {
      throw ConfigError("network key '" + key + "' must be an integer");
    }
    return v.get<int>();
  };

  MedSpec s;
  const int base = as_int(require("base_channels"), "base_channels");
  s.generator = {as_int(require("generator_depth"), "generator_depth"), base};
  const auto& enh = require("enhancer_depths");
  if (!enh.is_array()) {
    throw ConfigError("network key 'enhancer_depths' must be an array");
  }
  for (const auto& d : enh) {
    s.enhancers.push_back({as_int(d, "enhancer_depths"), base});
  }
  const auto& skip = require("skip");
  if (!skip.is_string()) throw ConfigError("network key 'skip' must be a string");
  s.skip = parse_skip_mode(skip.get<std::string>());
  const auto& cascade = require("cascade");
  if (!cascade.is_boolean()) {
    throw ConfigError("network key 'cascade' must be a boolean");
  }
  s.cascade = cascade.get<bool>();
  const auto& seed = require("seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    throw ConfigError("network key 'seed' must be a non-negative integer");
  }
  s.seed = seed.get<std::uint64_t>();
  if (j.contains("input_channels")) {
    s.input_channels = as_int(j.at("input_channels"), "input_channels");
  }
  s.validate();
  return s;
}

}  // namespace med
