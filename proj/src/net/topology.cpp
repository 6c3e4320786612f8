#include "med/error.hpp"
#include "med/med_network.hpp"

namespace med {

namespace {

ConvSlot conv_slot(int in, int out, int kernel, int stride) {
  ConvSlot c;
  c.in_channels = in;
  c.out_channels = out;
  c.kernel = kernel;
  c.stride = stride;
  return c;
}

// Channels of the activation at resolution index r inside a level. Index 0
// is the decoder's last stage, which keeps the outermost width.
int width_at(int base, int r) { return stage_channels(base, r < 1 ? 1 : r); }

}  // namespace

Topology layout_blocks(const MedSpec& spec) {
  spec.validate();
  Topology topo;
  topo.base_channels = spec.base_channels();
  for (int l = 0; l < spec.levels(); ++l) {
    Level level;
    level.depth = spec.depth(l);
    level.input_channels =
        l == 0 ? spec.input_channels : MedNetwork::kOutputChannels;
    const int base = topo.base_channels;
    for (int i = 1; i <= level.depth; ++i) {
      const int in = i == 1 ? level.input_channels : width_at(base, i - 1);
      const int out = width_at(base, i);
      level.encoder.push_back({conv_slot(in, out, 3, 2), NormSlot{out}});
    }
    for (int j = 1; j <= level.depth; ++j) {
      const int in = width_at(base, j);
      const int out = width_at(base, j - 1);
      level.decoder.push_back({conv_slot(in, out, 3, 1), NormSlot{out}});
    }
    level.head = conv_slot(width_at(base, 0), MedNetwork::kOutputChannels, 3, 1);
    topo.levels.push_back(std::move(level));
  }
  return topo;
}

void wire_skips(Topology& topo, SkipMode mode) {
  const bool inter = mode == SkipMode::kFull ||
                     mode == SkipMode::kInterEncEnc ||
                     mode == SkipMode::kInterDecEnc;
  if (inter && topo.levels.size() < 2) {
    throw ConfigError("skip mode '" + std::string(to_string(mode)) +
                      "' needs at least one enhancer");
  }
  topo.skip = mode;
  const int base = topo.base_channels;

  if (mode == SkipMode::kIntra || mode == SkipMode::kFull) {
    for (std::size_t l = 0; l < topo.levels.size(); ++l) {
      const int depth = topo.levels[l].depth;
      // The innermost stage feeds the decoder directly and gets no link.
      for (int r = 1; r <= depth - 1; ++r) {
        SkipLink link;
        link.kind = LinkKind::kIntra;
        link.target_level = static_cast<int>(l);
        link.target_index = r;
        link.source_index = r;
        const int c = width_at(base, r);
        link.merge = conv_slot(2 * c, c, 1, 1);
        topo.links.push_back(link);
      }
    }
  }

  const bool enc_enc =
      mode == SkipMode::kFull || mode == SkipMode::kInterEncEnc;
  const bool dec_enc = mode == SkipMode::kInterDecEnc;
  if (!enc_enc && !dec_enc) return;
  for (std::size_t l = 1; l < topo.levels.size(); ++l) {
    const int src_depth = topo.levels[l - 1].depth;
    const int dst_depth = topo.levels[l].depth;
    for (int i = 1; i <= dst_depth; ++i) {
      // Level l runs at half the extent of level l-1, so its index i matches
      // the previous level's index i + 1.
      const int src = i + 1;
      const int max_src = enc_enc ? src_depth : src_depth - 1;
      if (src > max_src) continue;  // no activation at that extent
      SkipLink link;
      link.kind = enc_enc ? LinkKind::kInterEncEnc : LinkKind::kInterDecEnc;
      link.target_level = static_cast<int>(l);
      link.target_index = i;
      link.source_index = src;
      const int c = width_at(base, i);
      link.merge = conv_slot(c + width_at(base, src), c, 1, 1);
      topo.links.push_back(link);
    }
  }
}

void wire_cascade(Topology& topo, int input_channels) {
  if (topo.levels.size() < 2) {
    throw ConfigError("cascade needs at least one enhancer");
  }
  topo.cascade = true;
  for (std::size_t l = 1; l < topo.levels.size(); ++l) {
    Level& level = topo.levels[l];
    level.cascade_input = true;
    level.input_channels += input_channels;
    level.encoder.front().conv.in_channels += input_channels;
  }
}

}  // namespace med
