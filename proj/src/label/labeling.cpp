#include "wildfusion/label/labeling.hpp"

#include <algorithm>

#include "wildfusion/core/color.hpp"
#include "wildfusion/core/error.hpp"

namespace wf {

void TraversabilityCalibration::check() const {
  if ((ideal_force_distribution.array() < 0.0).any())
    throw ConfigError("ideal force fractions must be nonnegative");
  if (std::abs(ideal_force_distribution.sum() - 1.0) > 1e-9)
    throw ConfigError("ideal force fractions must sum to 1");
  if (!(accel_variance_floor < accel_variance_ceiling))
    throw ConfigError("accel variance floor must lie below the ceiling");
  if (deviation_ceiling <= 0.0)
    throw ConfigError("deviation ceiling must be positive");
}

double accel_variance(const ImuSeries& imu) {
  if (imu.rows() == 0) throw InputError("empty imu series");
  const Eigen::RowVector3d mu = imu.accel.colwise().mean();
  const double scale = std::max(mu.norm(), 1e-9);
  const Eigen::Matrix<double, Eigen::Dynamic, 3> dev =
      (imu.accel.rowwise() - mu) / scale;
  return dev.array().square().colwise().mean().mean();
}

double tactile_deviation(const TactileSeries& tactile,
                         const Eigen::Vector4d& ideal) {
  if (tactile.rows() == 0) throw InputError("empty tactile series");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < tactile.rows(); ++i) {
    const Eigen::Vector4d f = tactile.force.row(i).transpose();
    const double total = f.sum();
    if (total <= 0.0)
      throw InputError("all-zero tactile forces: no ground contact");
    acc += ((f / total) - ideal).cwiseAbs().sum();
  }
  return acc / static_cast<double>(tactile.rows());
}

double traversability_score(const ImuSeries& imu, const TactileSeries& tactile,
                            const TraversabilityCalibration& calibration) {
  calibration.check();
  const double v = accel_variance(imu);
  const double v_hat =
      std::clamp((v - calibration.accel_variance_floor) /
                     (calibration.accel_variance_ceiling -
                      calibration.accel_variance_floor),
                 0.0, 1.0);
  const double d =
      tactile_deviation(tactile, calibration.ideal_force_distribution);
  const double d_hat = std::clamp(d / calibration.deviation_ceiling, 0.0, 1.0);
  return 1.0 - v_hat * d_hat;
}

TraversabilityCalibration calibrate(const ImuSeries& imu,
                                    const TactileSeries& tactile) {
  TraversabilityCalibration cal;
  cal.accel_variance_floor = accel_variance(imu);
  // The ceiling marks "fully unstable"; a fixed multiple of the stable
  // baseline keeps the two tied to the same sensor scale.
  cal.accel_variance_ceiling = 160.0 * std::max(cal.accel_variance_floor, 1e-8);

  Eigen::Vector4d mean_frac = Eigen::Vector4d::Zero();
  for (Eigen::Index i = 0; i < tactile.rows(); ++i) {
    const Eigen::Vector4d f = tactile.force.row(i).transpose();
    const double total = f.sum();
    if (total <= 0.0)
      throw InputError("all-zero tactile forces in calibration recording");
    mean_frac += f / total;
  }
  mean_frac /= static_cast<double>(tactile.rows());
  cal.ideal_force_distribution = mean_frac / mean_frac.sum();
  cal.deviation_ceiling = 0.5;
  cal.check();
  return cal;
}

std::vector<RaySample> sample_ray(const Vec3& origin, const Vec3& hit,
                                  int n_free, int n_neg,
                                  double max_neg_depth) {
  if (n_free < 0 || n_neg < 0)
    throw InputError("sample counts must be nonnegative");
  const Vec3 delta = hit - origin;
  const double len = delta.norm();
  if (len <= 0.0) throw InputError("degenerate ray: origin equals hit");
  const Vec3 dir = delta / len;

  std::vector<RaySample> out;
  out.reserve(static_cast<std::size_t>(n_free + n_neg + 1));
  for (int j = 1; j <= n_free; ++j) {
    const double t = static_cast<double>(j) / (n_free + 1);
    out.push_back({origin + t * delta, SampleKind::free});
  }
  out.push_back({hit, SampleKind::surface});
  for (int j = 1; j <= n_neg; ++j) {
    const double depth = max_neg_depth * j / n_neg;
    out.push_back({hit + depth * dir, SampleKind::negative});
  }
  return out;
}

std::vector<QuerySample> assign_sdf_confidence(
    const std::vector<RaySample>& samples, const SurfaceIndex& index,
    const SemanticTable& table, double decay_k) {
  std::vector<QuerySample> out;
  out.reserve(samples.size());
  for (const RaySample& rs : samples) {
    const SurfaceIndex::Result nn = index.nearest(rs.position);
    const SurfacePoint& np = index.point(nn.index);

    QuerySample q;
    q.position = rs.position;
    q.kind = rs.kind;
    switch (rs.kind) {
      case SampleKind::free:
        q.sdf = nn.distance;
        q.confidence = 1.0;
        q.color_bins.reset();
        q.semantic_id = table.null_id();
        break;
      case SampleKind::surface:
        q.sdf = 0.0;
        q.confidence = 1.0;
        q.color_bins = color_bins(normalize_lab(np.color_lab));
        q.semantic_id = np.semantic_id;
        break;
      case SampleKind::negative:
        q.sdf = -nn.distance;
        q.confidence = confidence_from_depth(nn.distance, decay_k);
        q.color_bins = color_bins(normalize_lab(np.color_lab));
        q.semantic_id = np.semantic_id;
        break;
    }
    out.push_back(q);
  }
  return out;
}

LabeledFrame label_frame(const Frame& frame, const LabelConfig& config,
                         const SemanticTable& table) {
  const SurfaceIndex index(frame.cloud);

  LabeledFrame lf;
  lf.frame_id = frame.id;
  lf.samples.reserve(frame.cloud.points.size() *
                     static_cast<std::size_t>(config.n_free + config.n_neg +
                                              1));
  for (const SurfacePoint& pt : frame.cloud.points) {
    const auto rays =
        sample_ray(frame.cloud.sensor_origin, pt.position, config.n_free,
                   config.n_neg, config.max_neg_depth);
    auto labeled =
        assign_sdf_confidence(rays, index, table, config.decay_k);
    lf.samples.insert(lf.samples.end(), labeled.begin(), labeled.end());
  }
  lf.traversability =
      traversability_score(frame.imu, frame.tactile, config.calibration);
  return lf;
}

}  // namespace wf
