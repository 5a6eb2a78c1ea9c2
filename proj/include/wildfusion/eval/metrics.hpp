#pragma once

#include <optional>
#include <vector>

#include "wildfusion/core/types.hpp"
#include "wildfusion/field/evaluator.hpp"
#include "wildfusion/label/surface_index.hpp"

namespace wf {

struct ColorMetrics {
  double mse = 0.0;
  double mae = 0.0;
  double psnr = 0.0;  // +inf when mse == 0
};

struct GeometryMetrics {
  double hausdorff = 0.0;
  double chamfer = 0.0;
};

struct SemanticMetrics {
  double accuracy = 0.0;
  double precision = 0.0;  // macro over classes present in gt
  double recall = 0.0;
  double f1 = 0.0;
  double iou = 0.0;  // mean per-class IoU over classes present in gt
};

struct EvalReport {
  std::optional<ColorMetrics> color;
  std::optional<GeometryMetrics> geometry;
  std::optional<SemanticMetrics> semantic;
  std::optional<double> ece;
  int n_samples_used = 0;
};

/// Indices i with predicted sdf ≤ 0 and predicted semantics not NULL.
std::vector<int> filter_valid(const std::vector<FieldPrediction>& predictions,
                              int null_id);

/// Errors on normalized LAB bin centers, averaged over channels and samples.
/// PSNR = 10·log10(1/MSE) with a signal peak of 1.
std::optional<ColorMetrics> color_metrics(
    const std::vector<std::array<int, 3>>& pred,
    const std::vector<std::array<int, 3>>& gt, int n_bins);

/// Symmetric Hausdorff (max of directed maxima) and Chamfer (half the sum of
/// directed mean nearest distances) between two point sets, in meters.
std::optional<GeometryMetrics> geometry_metrics(const std::vector<Vec3>& a,
                                                const std::vector<Vec3>& b);

/// Micro accuracy; macro precision/recall/F1 and mean IoU over the class ids
/// that appear in gt. A class with an empty denominator contributes 0.
std::optional<SemanticMetrics> classification_metrics(
    const std::vector<int>& pred, const std::vector<int>& gt);

/// Expected calibration error of a continuous confidence: bin by predicted
/// value into n_bins equal-width bins over [0,1], then Σ (n_b/N)·|mean
/// predicted − mean ground truth| per bin.
std::optional<double> ece(const std::vector<double>& pred,
                          const std::vector<double>& gt, int n_bins);

struct EvalConfig {
  int max_points_per_frame = 30000;
  int ece_bins = 10;
  std::uint64_t seed = 0;
  bool oracle = false;  // score the labels against themselves
};

/// Runs the model over one labeled frame, filters to confident-interior
/// predictions, and scores every head. Geometry compares the kept query
/// positions against the frame's surface and interior label positions.
EvalReport evaluate_frame(const ModelParams& params, const FrameData& frame,
                          const EvalConfig& config);

/// Pools the per-frame reports of a split. Color/semantic/ece aggregate as
/// n-weighted means; geometry averages over frames that produced it.
EvalReport aggregate_reports(const std::vector<EvalReport>& reports);

EvalReport evaluate_frames(const ModelParams& params,
                           const std::vector<FrameData>& frames,
                           const EvalConfig& config);

}  // namespace wf
