#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "wildfusion/core/error.hpp"

namespace wf {

/// Network shape. Defaults are the desk-scale profile; the gradient-check
/// tests shrink everything.
struct ModelConfig {
  int fourier_m = 64;
  double fourier_sigma = 2.0;
  bool fourier_include_input = true;

  int tnet_hidden = 32;
  int pn_h1 = 64;      // per-point width at the feature-transform stage
  int pn_h2 = 128;
  int pn_feat = 512;   // global cloud feature

  int audio_c1 = 16, audio_c2 = 32, audio_c3 = 64;
  int audio_feat = 128;
  int n_mels = 128;
  int n_audio_frames = 13;

  int trunk_width = 256;
  int head_hidden = 64;
  int trav_hidden = 64;

  int n_classes = 8;      // semantic logits cover classes plus NULL
  int n_color_bins = 16;
  double s_max = 3.0;
  double dropout = 0.1;

  int query_dim() const {
    return (fourier_include_input ? 3 : 0) + 2 * fourier_m;
  }
  int trunk_in() const { return query_dim() + pn_feat + audio_feat; }
  int trav_in() const { return pn_feat + audio_feat; }
  int semantic_logits() const { return n_classes + 1; }

  void check() const {
    if (fourier_m < 0 || trunk_width <= 0 || pn_feat <= 0 || audio_feat <= 0 ||
        head_hidden <= 0 || n_classes <= 0 || n_color_bins <= 0 ||
        s_max <= 0.0 || dropout < 0.0 || dropout >= 1.0)
      throw ConfigError("invalid model configuration");
    if (query_dim() < 1)
      throw ConfigError("query encoding is empty");
    if (n_mels < 8 || n_audio_frames < 4)
      throw ConfigError("audio grid too small for three stride-2 convs");
  }
};

struct TrainConfig {
  std::array<double, 6> lambda = {1.0, 0.01, 0.5, 1.0, 0.5, 1.0};
  double alpha = 0.5;           // confidence weight where gt == 1
  double beta = 2.0;            // confidence weight elsewhere
  double huber_delta = 0.1;
  double learning_rate = 1e-3;
  int batch_queries = 1024;
  int epochs = 100;
  std::uint64_t seed = 0;
  std::array<bool, 6> head_enable = {true, true, true, true, true, true};
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int val_queries_per_frame = 2048;

  void check() const {
    for (double l : lambda)
      if (l < 0.0) throw ConfigError("loss weights must be nonnegative");
    if (batch_queries <= 0) throw ConfigError("batch_queries must be positive");
    if (epochs <= 0) throw ConfigError("epochs must be positive");
    if (learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
  }
};

/// Loss term indices within TrainConfig::lambda and term_enable.
enum LossTerm : int {
  kLossSdf = 0,
  kLossEikonal = 1,
  kLossConfidence = 2,
  kLossSemantics = 3,
  kLossColor = 4,
  kLossTraversability = 5,
};

/// Unweighted per-term values plus the λ-weighted total.
struct LossBreakdown {
  double total = 0.0;
  double sdf = 0.0;
  double eikonal = 0.0;
  double confidence = 0.0;
  double semantics = 0.0;
  double color = 0.0;
  double traversability = 0.0;

  double term(int i) const {
    switch (i) {
      case kLossSdf: return sdf;
      case kLossEikonal: return eikonal;
      case kLossConfidence: return confidence;
      case kLossSemantics: return semantics;
      case kLossColor: return color;
      case kLossTraversability: return traversability;
    }
    throw InputError("loss term index out of range");
  }
};

}  // namespace wf
