#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "med/graph.hpp"
#include "med/med_spec.hpp"
#include "med/rng.hpp"

namespace med {

/// Convolution slot; `weight`/`bias` index the network's parameter list once
/// allocated (-1 before).
struct ConvSlot {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  int stride = 1;
  int weight = -1;
  int bias = -1;
};

struct NormSlot {
  int channels = 0;
  int gamma = -1;
  int beta = -1;
};

/// conv -> batch norm -> leaky ReLU. Encoder stages use stride 2; decoder
/// stages upsample first and convolve with stride 1.
struct Stage {
  ConvSlot conv;
  NormSlot norm;
};

enum class LinkKind { kIntra, kInterEncEnc, kInterDecEnc };

/// Concatenation of an earlier activation into a later layer's input,
/// followed by a 1x1 projection back to the target's channel count.
///
/// Intra: source is encoder output `source_index` of the same level, merged
/// after the decoder stage whose output has the same resolution index.
/// Inter: source is the encoder output (or decoder output) with resolution
/// index `source_index` of level `target_level - 1`, merged after encoder
/// stage `target_index` of `target_level`.
///
/// Resolution index r means extent (level extent) / 2^r.
struct SkipLink {
  LinkKind kind = LinkKind::kIntra;
  int target_level = 0;
  int target_index = 0;
  int source_index = 0;
  ConvSlot merge;
};

struct Level {
  int depth = 0;
  int input_channels = 0;
  bool cascade_input = false;
  std::vector<Stage> encoder;  // encoder[i-1] produces resolution index i
  std::vector<Stage> decoder;  // decoder[j-1] consumes index j, produces j-1
  ConvSlot head;
};

/// Layer layout of a med network before parameters are allocated.
struct Topology {
  std::vector<Level> levels;
  std::vector<SkipLink> links;
  int base_channels = 0;
  SkipMode skip = SkipMode::kNone;
  bool cascade = false;
};

/// Plain composition of ed blocks without skips or cascade.
Topology layout_blocks(const MedSpec& spec);
/// Adds the skip links of `mode`. Inter-level modes need two or more levels.
void wire_skips(Topology& topo, SkipMode mode);
/// Widens every enhancer's input to accept the resized network input.
void wire_cascade(Topology& topo, int input_channels);

/// Output of one forward pass: heads[l] is level l's image at 1/2^l scale.
template <class T>
struct Heads {
  std::vector<ad::Var<T>> images;

  std::size_t size() const { return images.size(); }
  ad::Var<T> operator[](std::size_t i) const { return images.at(i); }
};

class MedNetwork {
 public:
  /// Validates `spec`, lays out and wires the topology, and draws parameters
  /// from `rng`: weights uniform in +-sqrt(6 / ((1 + 0.2^2) fan_in)), biases
  /// zero, norm gain 1 and shift 0.
  static MedNetwork build(const MedSpec& spec, Rng& rng);
  static MedNetwork build(const MedSpec& spec);

  const MedSpec& spec() const { return spec_; }
  const Topology& topology() const { return topology_; }

  std::vector<ad::Parameter<float>>& parameters() { return params_; }
  const std::vector<ad::Parameter<float>>& parameters() const { return params_; }
  /// Total number of scalar parameters.
  std::size_t parameter_count() const;
  void zero_grad();

  template <class U>
  std::vector<ad::Parameter<U>> parameters_as() const {
    std::vector<ad::Parameter<U>> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p.template cast<U>());
    return out;
  }

  /// Runs the network on `z` using `params` (same layout as parameters()).
  template <class T>
  Heads<T> forward(ad::Graph<T>& graph, std::vector<ad::Parameter<T>>& params,
                   ad::Var<T> z) const;
  Heads<float> forward(ad::Graph<float>& graph, ad::Var<float> z) {
    return forward(graph, params_, z);
  }

  /// Reconstructs the spec from the built topology.
  MedSpec introspect() const;

  static constexpr double kLeakySlope = 0.2;
  static constexpr double kNormEps = 1e-5;
  static constexpr int kOutputChannels = 3;

 private:
  MedSpec spec_;
  Topology topology_;
  std::vector<ad::Parameter<float>> params_;
};

}  // namespace med
