#include "wildfusion/synth/dataset.hpp"

#include <cmath>
#include <numbers>

#include "wildfusion/core/error.hpp"

namespace wf {
namespace {

constexpr double kRobotSpeed = 0.4;

// Leg mount offsets in the body frame (x forward, y left), in fixed order
// front-left, front-right, rear-left, rear-right.
constexpr double kLegOffsets[4][2] = {
    {0.25, 0.15}, {0.25, -0.15}, {-0.25, 0.15}, {-0.25, -0.15}};

}  // namespace

std::vector<Pose> make_trajectory(const Scene& scene, int n_poses,
                                  std::uint64_t seed, double sensor_height) {
  if (n_poses <= 0) throw InputError("trajectory needs at least one pose");
  Rng rng(Rng::derive(seed, 0x7ea1));

  const double radius = scene.half_extent * rng.uniform(0.45, 0.62);
  const Vec2 center(rng.uniform(-0.15, 0.15) * scene.half_extent,
                    rng.uniform(-0.15, 0.15) * scene.half_extent);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double step = kRobotSpeed * 2.0 / radius;

  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(n_poses));
  for (int i = 0; i < n_poses; ++i) {
    const double a = phase + step * i;
    Pose p;
    p.position.x() = center.x() + radius * std::cos(a);
    p.position.y() = center.y() + radius * std::sin(a);
    p.position.z() =
        scene.height(p.position.x(), p.position.y()) + sensor_height;
    p.yaw = a + std::numbers::pi / 2.0;
    // Lift the sensor clear of any primitive it landed inside.
    for (int k = 0; k < 30 && scene_sdf(scene, p.position) < 0.2; ++k)
      p.position.z() += 0.1;
    poses.push_back(p);
  }
  return poses;
}

void split_counts(int n, double train_fraction, double val_fraction,
                  int& n_train, int& n_val, int& n_test) {
  n_train = static_cast<int>(std::floor(train_fraction * n));
  n_val = static_cast<int>(std::floor(val_fraction * n));
  n_test = n - n_train - n_val;
  if (n_test < 0) throw ConfigError("split fractions exceed 1");
}

Dataset make_dataset(const Scene& scene, const std::vector<Pose>& trajectory,
                     const DatasetConfig& config, const SemanticTable& table) {
  if (trajectory.empty()) throw InputError("empty trajectory");

  Dataset ds;
  ds.seed = scene.seed;
  ds.frames.reserve(trajectory.size());

  for (int id = 0; id < static_cast<int>(trajectory.size()); ++id) {
    const Pose& pose = trajectory[static_cast<std::size_t>(id)];
    const std::uint64_t frame_seed =
        Rng::derive(scene.seed, 0xf0000 + static_cast<std::uint64_t>(id));
    Rng rng(frame_seed);

    Frame f;
    f.id = id;
    f.robot_pose = pose;
    f.accumulation_window = config.accumulation_window;
    f.audio_sample_rate = kAudioSampleRate;
    f.cloud = simulate_lidar(scene, pose, config.lidar, table, rng);

    const double cy = std::cos(pose.yaw), sy = std::sin(pose.yaw);
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const double lx = kLegOffsets[leg][0], ly = kLegOffsets[leg][1];
      const double wx = pose.position.x() + cy * lx - sy * ly;
      const double wy = pose.position.y() + sy * lx + cy * ly;
      f.audio[static_cast<std::size_t>(leg)] = synth_audio(
          scene.terrain_at(wx, wy), config.accumulation_window,
          config.gait_rate_hz,
          Rng::derive(frame_seed, 0x10 + static_cast<std::uint64_t>(leg)));
    }

    const TerrainClass under =
        scene.terrain_at(pose.position.x(), pose.position.y());
    f.imu = synth_imu(under, config.accumulation_window,
                      Rng::derive(frame_seed, 0x20));
    const Vec2 grad =
        scene.ground.gradient(pose.position.x(), pose.position.y());
    const double slope = grad.x() * cy + grad.y() * sy;
    f.tactile = synth_tactile(under, slope, config.accumulation_window,
                              Rng::derive(frame_seed, 0x21));
    ds.frames.push_back(std::move(f));
  }

  int n_train = 0, n_val = 0, n_test = 0;
  split_counts(static_cast<int>(ds.frames.size()), config.train_fraction,
               config.val_fraction, n_train, n_val, n_test);
  for (int i = 0; i < n_train; ++i) ds.train_ids.push_back(i);
  for (int i = 0; i < n_val; ++i) ds.val_ids.push_back(n_train + i);
  for (int i = 0; i < n_test; ++i) ds.test_ids.push_back(n_train + n_val + i);
  return ds;
}

}  // namespace wf
