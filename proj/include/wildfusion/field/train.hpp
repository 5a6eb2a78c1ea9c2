#pragma once

#include <functional>
#include <vector>

#include "wildfusion/field/frame_data.hpp"
#include "wildfusion/field/params.hpp"

namespace wf {

struct TrainLogEntry {
  int epoch = 0;               // 1-based
  LossBreakdown train_mean;    // averaged over the epoch's steps
  double val_total = 0.0;
};

struct TrainResult {
  ModelParams params;          // best-validation snapshot
  std::vector<TrainLogEntry> log;
  int best_epoch = 0;
  double best_val = 0.0;
};

/// Deterministic single-threaded training. One epoch visits every training
/// frame once in shuffled order; each step draws `batch_queries` samples from
/// that frame. Validation runs after every epoch on a fixed subsample; the
/// returned parameters are the best-validation snapshot. When `val_frames` is
/// empty the epoch's mean training loss stands in as the selection criterion.
TrainResult train_field(
    const std::vector<FrameData>& train_frames,
    const std::vector<FrameData>& val_frames, const ModelConfig& mc,
    const TrainConfig& tc,
    const std::function<void(const TrainLogEntry&)>& on_epoch = nullptr);

}  // namespace wf
