#include "med/med_network.hpp"

#include <cmath>

#include "med/error.hpp"
#include "med/ops.hpp"

namespace med {

namespace {

using ad::BasicTensor;
using ad::Parameter;
using ad::Shape;
using ad::Var;

class ParamAllocator {
 public:
  ParamAllocator(std::vector<Parameter<float>>& params, Rng& rng)
      : params_(params), rng_(rng) {}

  void conv(ConvSlot& slot, const std::string& name) {
    const int fan_in = slot.in_channels * slot.kernel * slot.kernel;
    const double bound =
        std::sqrt(6.0 / ((1.0 + MedNetwork::kLeakySlope * MedNetwork::kLeakySlope) *
                         fan_in));
    ad::Tensor w(Shape{slot.out_channels, slot.in_channels, slot.kernel, slot.kernel});
    for (auto& v : w.data()) v = static_cast<float>(rng_.uniform(-bound, bound));
    slot.weight = add(name + ".w", std::move(w));
    slot.bias = add(name + ".b", ad::Tensor(Shape{1, slot.out_channels, 1, 1}));
  }

  void norm(NormSlot& slot, const std::string& name) {
    slot.gamma = add(name + ".gamma", ad::Tensor(Shape{1, slot.channels, 1, 1}, 1.0f));
    slot.beta = add(name + ".beta", ad::Tensor(Shape{1, slot.channels, 1, 1}));
  }

 private:
  int add(std::string name, ad::Tensor value) {
    params_.emplace_back(std::move(name), std::move(value));
    return static_cast<int>(params_.size() - 1);
  }

  std::vector<Parameter<float>>& params_;
  Rng& rng_;
};

template <class T>
Var<T> apply_conv(ad::Graph<T>& g, std::vector<Parameter<T>>& params,
                  const ConvSlot& slot, Var<T> x) {
  return ad::conv2d(x, g.parameter(params[slot.weight]),
                    g.parameter(params[slot.bias]), slot.stride);
}

template <class T>
Var<T> apply_stage(ad::Graph<T>& g, std::vector<Parameter<T>>& params,
                   const Stage& stage, Var<T> x) {
  Var<T> h = apply_conv(g, params, stage.conv, x);
  h = ad::batch_norm(h, g.parameter(params[stage.norm.gamma]),
                     g.parameter(params[stage.norm.beta]), MedNetwork::kNormEps);
  return ad::leaky_relu(h, MedNetwork::kLeakySlope);
}

std::string link_label(const SkipLink& link) {
  switch (link.kind) {
    case LinkKind::kIntra:
      return "skip:intra:L" + std::to_string(link.target_level) + ":r" +
             std::to_string(link.target_index);
    case LinkKind::kInterEncEnc:
      return "skip:inter_ee:L" + std::to_string(link.target_level) + ":r" +
             std::to_string(link.target_index);
    case LinkKind::kInterDecEnc:
      return "skip:inter_de:L" + std::to_string(link.target_level) + ":r" +
             std::to_string(link.target_index);
  }
  return "skip";
}

}  // namespace

MedNetwork MedNetwork::build(const MedSpec& spec, Rng& rng) {
  MedNetwork net;
  net.spec_ = spec;
  net.topology_ = layout_blocks(spec);
  wire_skips(net.topology_, spec.skip);
  if (spec.cascade) wire_cascade(net.topology_, spec.input_channels);

  ParamAllocator alloc(net.params_, rng);
  for (std::size_t l = 0; l < net.topology_.levels.size(); ++l) {
    Level& level = net.topology_.levels[l];
    const std::string prefix = "L" + std::to_string(l);
    for (std::size_t i = 0; i < level.encoder.size(); ++i) {
      const std::string name = prefix + ".enc" + std::to_string(i + 1);
      alloc.conv(level.encoder[i].conv, name + ".conv");
      alloc.norm(level.encoder[i].norm, name + ".bn");
    }
    for (std::size_t j = 0; j < level.decoder.size(); ++j) {
      const std::string name = prefix + ".dec" + std::to_string(j + 1);
      alloc.conv(level.decoder[j].conv, name + ".conv");
      alloc.norm(level.decoder[j].norm, name + ".bn");
    }
    alloc.conv(level.head, prefix + ".head");
  }
  for (auto& link : net.topology_.links) {
    alloc.conv(link.merge, link_label(link) + ".merge");
  }
  return net;
}

MedNetwork MedNetwork::build(const MedSpec& spec) {
  Rng rng(spec.seed);
  return build(spec, rng);
}

std::size_t MedNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

void MedNetwork::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template <class T>
Heads<T> MedNetwork::forward(ad::Graph<T>& graph,
                             std::vector<Parameter<T>>& params,
                             Var<T> z) const {
  if (params.size() != params_.size()) {
    throw ShapeError("forward: parameter list does not match the network");
  }
  const Shape zs = z.shape();
  const Level& first = topology_.levels.front();
  if (zs.c != first.input_channels || zs.n != 1) {
    throw ShapeError("forward: input " + zs.str() + " does not have " +
                     std::to_string(first.input_channels) + " channels");
  }
  const int divisor = spec_.required_divisor();
  if (zs.h % divisor != 0 || zs.w % divisor != 0) {
    throw ShapeError("forward: input extents " + std::to_string(zs.h) + "x" +
                     std::to_string(zs.w) + " must be multiples of " +
                     std::to_string(divisor));
  }

  Heads<T> heads;
  std::vector<Var<T>> prev_enc;
  std::vector<Var<T>> prev_dec;
  for (std::size_t l = 0; l < topology_.levels.size(); ++l) {
    const Level& level = topology_.levels[l];
    Var<T> h = z;
    if (l > 0) {
      h = ad::downsample_area(heads.images.back(), 2);
      if (level.cascade_input) {
        Var<T> resized = ad::downsample_area(z, 1 << l);
        h = ad::concat_channels(h, resized, "cascade:L" + std::to_string(l));
      }
    }

    std::vector<Var<T>> enc(level.depth + 1);
    std::vector<Var<T>> dec(level.depth);
    enc[0] = h;
    for (int i = 1; i <= level.depth; ++i) {
      h = apply_stage(graph, params, level.encoder[i - 1], h);
      for (const auto& link : topology_.links) {
        if (link.kind == LinkKind::kIntra ||
            link.target_level != static_cast<int>(l) || link.target_index != i) {
          continue;
        }
        Var<T> src = link.kind == LinkKind::kInterEncEnc
                         ? prev_enc.at(link.source_index)
                         : prev_dec.at(link.source_index);
        h = apply_conv(graph, params, link.merge,
                       ad::concat_channels(h, src, link_label(link)));
      }
      enc[i] = h;
    }
    for (int j = level.depth; j >= 1; --j) {
      h = apply_stage(graph, params, level.decoder[j - 1],
                      ad::upsample_bilinear(h, 2));
      const int r = j - 1;
      dec[r] = h;
      for (const auto& link : topology_.links) {
        if (link.kind != LinkKind::kIntra ||
            link.target_level != static_cast<int>(l) || link.target_index != r) {
          continue;
        }
        h = apply_conv(graph, params, link.merge,
                       ad::concat_channels(h, enc[link.source_index], link_label(link)));
      }
    }
    heads.images.push_back(ad::sigmoid(apply_conv(graph, params, level.head, h)));
    prev_enc = std::move(enc);
    prev_dec = std::move(dec);
  }
  return heads;
}

MedSpec MedNetwork::introspect() const {
  MedSpec s;
  const auto& levels = topology_.levels;
  const int base = levels.front().encoder.front().conv.out_channels;
  s.generator = {levels.front().depth, base};
  for (std::size_t l = 1; l < levels.size(); ++l) {
    s.enhancers.push_back({levels[l].depth, levels[l].encoder.front().conv.out_channels});
  }
  s.input_channels = levels.front().encoder.front().conv.in_channels;
  bool intra = false, enc_enc = false, dec_enc = false;
  for (const auto& link : topology_.links) {
    intra = intra || link.kind == LinkKind::kIntra;
    enc_enc = enc_enc || link.kind == LinkKind::kInterEncEnc;
    dec_enc = dec_enc || link.kind == LinkKind::kInterDecEnc;
  }
  if (intra && enc_enc) {
    s.skip = SkipMode::kFull;
  } else if (intra) {
    s.skip = SkipMode::kIntra;
  } else if (enc_enc) {
    s.skip = SkipMode::kInterEncEnc;
  } else if (dec_enc) {
    s.skip = SkipMode::kInterDecEnc;
  } else {
    s.skip = SkipMode::kNone;
  }
  s.cascade = levels.size() > 1 && levels[1].cascade_input;
  // The seed is not recoverable from structure; it is carried verbatim.
  s.seed = spec_.seed;
  return s;
}

template Heads<float> MedNetwork::forward(ad::Graph<float>&,
                                          std::vector<Parameter<float>>&,
                                          Var<float>) const;
template Heads<double> MedNetwork::forward(ad::Graph<double>&,
                                           std::vector<Parameter<double>>&,
                                           Var<double>) const;

}  // namespace med
