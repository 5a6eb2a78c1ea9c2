#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wildfusion/core/error.hpp"

namespace wf {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

/// One semantic class: a name, a hand-assigned traversability in [0,1] and a
/// representative LAB color used when synthesizing observations.
struct SemanticClass {
  std::string name;
  double base_traversability = 1.0;
  Vec3 base_color_lab = Vec3::Zero();
};

/// Dense class table. Real classes occupy ids 0..size()-1; the reserved NULL
/// id equals size() so it can participate in classifier outputs as an
/// explicit class.
class SemanticTable {
 public:
  explicit SemanticTable(std::vector<SemanticClass> classes)
      : classes_(std::move(classes)) {
    for (const auto& c : classes_) {
      if (c.base_traversability < 0.0 || c.base_traversability > 1.0)
        throw InputError("semantic class '" + c.name +
                         "': base traversability outside [0,1]");
    }
  }

  int size() const { return static_cast<int>(classes_.size()); }
  int null_id() const { return size(); }

  const SemanticClass& at(int id) const {
    if (id < 0 || id >= size())
      throw InputError("semantic id " + std::to_string(id) + " out of range");
    return classes_[static_cast<std::size_t>(id)];
  }

  bool is_null(int id) const { return id == null_id(); }
  bool valid_or_null(int id) const { return id >= 0 && id <= size(); }

  /// The table used by the synthetic scenes: six terrain classes in fixed
  /// roughness order plus two obstacle classes.
  static SemanticTable default_table();

 private:
  std::vector<SemanticClass> classes_;
};

/// Terrain classes, ordered by increasing mechanical roughness.
enum class TerrainClass : int {
  concrete = 0,
  grass = 1,
  gravel = 2,
  leaves = 3,
  vegetation = 4,
  mud = 5,
};
constexpr int kTerrainClassCount = 6;

/// Non-terrain semantic ids in the default table.
constexpr int kSemanticTrunk = 6;
constexpr int kSemanticRock = 7;

struct SurfacePoint {
  Vec3 position = Vec3::Zero();
  Vec3 color_lab = Vec3::Zero();
  int semantic_id = 0;
};

struct PointCloud {
  std::vector<SurfacePoint> points;
  Vec3 sensor_origin = Vec3::Zero();
};

struct Pose {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
};

/// Time-stamped 3-axis accelerometer series (m/s^2).
struct ImuSeries {
  Eigen::VectorXd t;
  Eigen::Matrix<double, Eigen::Dynamic, 3> accel;
  Eigen::Index rows() const { return accel.rows(); }
};

/// Time-stamped per-foot contact forces (N), one column per leg.
struct TactileSeries {
  Eigen::VectorXd t;
  Eigen::Matrix<double, Eigen::Dynamic, 4> force;
  Eigen::Index rows() const { return force.rows(); }
};

constexpr int kNumLegs = 4;

/// One fused sensor frame: everything collected over one accumulation window.
/// Audio legs are ordered front-left, front-right, rear-left, rear-right.
struct Frame {
  int id = 0;
  PointCloud cloud;
  std::array<Eigen::VectorXf, kNumLegs> audio;
  double audio_sample_rate = 16384.0;
  ImuSeries imu;
  TactileSeries tactile;
  Pose robot_pose;
  double accumulation_window = 2.0;
};

enum class SampleKind : std::uint8_t { surface = 0, free = 1, negative = 2 };

/// A labeled training sample. semantic_id uses the table's reserved NULL id
/// for free-space samples; color_bins is empty for them.
struct QuerySample {
  Vec3 position = Vec3::Zero();
  double sdf = 0.0;
  double confidence = 1.0;
  std::optional<std::array<int, 3>> color_bins;
  int semantic_id = 0;
  SampleKind kind = SampleKind::surface;
};

/// The network's five-head output at one query point.
struct FieldPrediction {
  double sdf = 0.0;
  double confidence = 0.0;
  std::array<Eigen::VectorXd, 3> color_logits;
  Eigen::VectorXd semantic_logits;
  double traversability = 0.0;

  int semantic_argmax() const {
    Eigen::Index i = 0;
    semantic_logits.maxCoeff(&i);
    return static_cast<int>(i);
  }
  int color_argmax(int channel) const {
    Eigen::Index i = 0;
    color_logits[static_cast<std::size_t>(channel)].maxCoeff(&i);
    return static_cast<int>(i);
  }
};

}  // namespace wf
