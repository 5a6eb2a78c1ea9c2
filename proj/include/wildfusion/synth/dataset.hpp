#pragma once

#include <cstdint>
#include <vector>

#include "wildfusion/core/types.hpp"
#include "wildfusion/synth/scene.hpp"
#include "wildfusion/synth/sensors.hpp"

namespace wf {

struct DatasetConfig {
  LidarPattern lidar{.n_rays = 2048, .range_noise_sigma = 0.01};
  double accumulation_window = 2.0;
  double gait_rate_hz = 2.0;
  double sensor_height = 0.5;
  double train_fraction = 0.835;
  double val_fraction = 0.09;
};

struct Dataset {
  std::vector<Frame> frames;
  std::vector<int> train_ids;
  std::vector<int> val_ids;
  std::vector<int> test_ids;
  std::uint64_t seed = 0;
};

/// Poses along a circular sweep of the scene interior, spaced by the robot
/// speed times the accumulation window (0.4 m/s · 2 s), sensor above ground.
std::vector<Pose> make_trajectory(const Scene& scene, int n_poses,
                                  std::uint64_t seed,
                                  double sensor_height = 0.5);

/// One Frame per pose: lidar cloud, per-leg audio conditioned on the terrain
/// under each foot, IMU and tactile series, robot pose. Split sizes are
/// floor(train·n) / floor(val·n) / remainder, contiguous in trajectory
/// order.
Dataset make_dataset(const Scene& scene, const std::vector<Pose>& trajectory,
                     const DatasetConfig& config, const SemanticTable& table);

/// Index triple (train, val, test) for n frames under the given fractions.
void split_counts(int n, double train_fraction, double val_fraction,
                  int& n_train, int& n_val, int& n_test);

}  // namespace wf
