#pragma once

#include "wildfusion/core/rng.hpp"
#include "wildfusion/core/types.hpp"
#include "wildfusion/synth/scene.hpp"

namespace wf {

constexpr double kAudioSampleRate = 16384.0;
constexpr double kImuSampleRate = 200.0;
constexpr double kTactileSampleRate = 100.0;

/// Scan pattern. The rosette mode sweeps azimuth and elevation with
/// incommensurate rates so consecutive scans never repeat a direction;
/// uniform mode draws directions independently.
struct LidarPattern {
  int n_rays = 2048;
  bool rosette = true;
  double elevation_min = -1.2;
  double elevation_max = 0.25;
  double range_noise_sigma = 0.0;
  double max_range = 30.0;
};

/// Casts every ray of the pattern from the pose by sphere tracing the scene
/// SDF (128 steps, 1e-4 m tolerance, bisection after a sign change). Misses
/// are omitted. Noise displaces hits along the ray.
PointCloud simulate_lidar(const Scene& scene, const Pose& pose,
                          const LidarPattern& pattern,
                          const SemanticTable& table, Rng& rng);

/// Sphere-traced range along one ray; negative when nothing is hit within
/// max_range.
double trace_ray(const Scene& scene, const Vec3& origin, const Vec3& dir,
                 double max_range);

/// Footstep resonances plus band-filtered noise, both centered on a
/// class-specific frequency. 16,384 Hz mono.
Eigen::VectorXf synth_audio(TerrainClass terrain, double duration_s,
                            double gait_rate_hz, std::uint64_t seed);

/// Gravity plus roughness-scaled noise at 200 Hz.
ImuSeries synth_imu(TerrainClass terrain, double duration_s,
                    std::uint64_t seed);

/// Per-leg contact forces at 100 Hz: an even split of the robot weight,
/// perturbed by roughness and shifted by slope.
TactileSeries synth_tactile(TerrainClass terrain, double slope,
                            double duration_s, std::uint64_t seed);

/// Roughness/slope-parametrized core of synth_tactile; roughness 0 and
/// slope 0 reproduce the calibration distribution exactly.
TactileSeries synth_tactile_raw(double roughness, double slope,
                                double duration_s, std::uint64_t seed);

/// Mechanical roughness of a terrain class, in the fixed class order
/// concrete < grass < gravel < leaves < vegetation < mud.
double terrain_roughness(TerrainClass terrain);

}  // namespace wf
