#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "wildfusion/core/types.hpp"
#include "wildfusion/label/surface_index.hpp"

namespace wf {

/// Reference statistics of a stable-stance recording plus the rescaling
/// bounds that map raw instability measures into [0,1].
struct TraversabilityCalibration {
  Eigen::Vector4d ideal_force_distribution =
      Eigen::Vector4d::Constant(0.25);
  double accel_variance_floor = 1e-4;
  double accel_variance_ceiling = 1.6e-2;
  double deviation_ceiling = 0.5;

  void check() const;
};

/// Builds a calibration from a recording on stable ground: the floor is the
/// recording's own accel variance, the ceiling a fixed multiple of it.
TraversabilityCalibration calibrate(const ImuSeries& imu,
                                    const TactileSeries& tactile);

/// Gravity-relative accel variance: center per axis, scale by the magnitude
/// of the mean acceleration, then average the per-axis variances.
double accel_variance(const ImuSeries& imu);

/// Time-mean L1 distance between per-step force fractions and the ideal
/// distribution.
double tactile_deviation(const TactileSeries& tactile,
                         const Eigen::Vector4d& ideal);

/// 1 − v̂·d̂ with both factors rescaled into [0,1] by the calibration.
/// High means traversable.
double traversability_score(const ImuSeries& imu, const TactileSeries& tactile,
                            const TraversabilityCalibration& calibration);

/// Confidence of a sample at |sdf| = depth inside a surface.
inline double confidence_from_depth(double depth, double decay_k) {
  return std::exp(-decay_k * depth);
}

struct RaySample {
  Vec3 position = Vec3::Zero();
  SampleKind kind = SampleKind::surface;
};

/// Uniform free samples strictly between origin and hit (t = j/(n_free+1)),
/// negative samples on a uniform grid (0, max_neg_depth] past the hit, and
/// the hit itself.
std::vector<RaySample> sample_ray(const Vec3& origin, const Vec3& hit,
                                  int n_free, int n_neg,
                                  double max_neg_depth);

struct LabelConfig {
  int n_free = 4;
  int n_neg = 2;
  double max_neg_depth = 0.5;
  double decay_k = 5.0;
  TraversabilityCalibration calibration;
};

/// SDF = signed distance to the index's point set; confidence 1 for free
/// and surface samples, exponential decay for negatives. Free samples get
/// NULL color/semantics; others inherit the nearest surface point's.
std::vector<QuerySample> assign_sdf_confidence(
    const std::vector<RaySample>& samples, const SurfaceIndex& index,
    const SemanticTable& table, double decay_k);

struct LabeledFrame {
  int frame_id = 0;
  std::vector<QuerySample> samples;
  double traversability = 1.0;
};

LabeledFrame label_frame(const Frame& frame, const LabelConfig& config,
                         const SemanticTable& table);

}  // namespace wf
