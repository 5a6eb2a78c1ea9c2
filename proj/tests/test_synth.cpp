#include <cmath>

#include "doctest.h"
#include "wildfusion/audio/mel.hpp"
#include "wildfusion/core/error.hpp"
#include "wildfusion/core/validate.hpp"
#include "wildfusion/synth/dataset.hpp"
#include "wildfusion/synth/scene.hpp"
#include "wildfusion/synth/sensors.hpp"

using namespace wf;

namespace {

const SemanticTable& table() {
  static const SemanticTable t = SemanticTable::default_table();
  return t;
}

Scene flat_scene() {
  Scene s;
  s.half_extent = 10.0;
  s.terrain_sites.push_back({{0, 0}, TerrainClass::concrete});
  return s;
}

// Energy centroid of a log-mel matrix, in band index units.
double mel_centroid(const Eigen::MatrixXd& log_mel) {
  const Eigen::VectorXd p = log_mel.array().exp().rowwise().mean();
  double num = 0.0;
  for (int m = 0; m < p.size(); ++m) num += m * p[m];
  return num / p.sum();
}

}  // namespace

TEST_CASE("primitive signed distances are exact") {
  Primitive sphere{ShapeKind::sphere, Vec3(0, 0, 0), Vec3(1, 0, 0), 0, {}};
  CHECK(sphere.sdf(Vec3(0, 0, 0)) == doctest::Approx(-1.0));
  CHECK(sphere.sdf(Vec3(2, 0, 0)) == doctest::Approx(1.0));
  CHECK(sphere.sdf(Vec3(0, 3, 4)) == doctest::Approx(4.0));

  Primitive box{ShapeKind::box, Vec3(0, 0, 0), Vec3(1, 2, 3), 0, {}};
  CHECK(box.sdf(Vec3(0, 0, 0)) == doctest::Approx(-1.0));
  CHECK(box.sdf(Vec3(2, 0, 0)) == doctest::Approx(1.0));
  CHECK(box.sdf(Vec3(0, 0, 4)) == doctest::Approx(1.0));
  CHECK(box.sdf(Vec3(2, 3, 4)) == doctest::Approx(std::sqrt(3.0)));

  Primitive cyl{ShapeKind::cylinder, Vec3(0, 0, 0), Vec3(1, 2, 0), 0, {}};
  CHECK(cyl.sdf(Vec3(3, 0, 0)) == doctest::Approx(2.0));
  CHECK(cyl.sdf(Vec3(0, 0, 3)) == doctest::Approx(1.0));
  CHECK(cyl.sdf(Vec3(2, 0, 3)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(cyl.sdf(Vec3(0, 0, 0)) == doctest::Approx(-1.0));
}

TEST_CASE("scene_sdf is the min over ground and primitives") {
  Scene s = flat_scene();
  Primitive sphere{ShapeKind::sphere, Vec3(0, 0, 3), Vec3(1, 0, 0), 0, {}};
  s.primitives.push_back(sphere);

  CHECK(scene_sdf(s, Vec3(0, 0, 0.5)) == doctest::Approx(0.5));
  CHECK(scene_sdf(s, Vec3(0, 0, 1.5)) == doctest::Approx(0.5));
  CHECK(scene_sdf(s, Vec3(0, 0, 2.5)) == doctest::Approx(-0.5));
  CHECK(scene_sdf(s, Vec3(0, 0, 3.0)) == doctest::Approx(-1.0));
  CHECK(nearest_component(s, Vec3(0, 0, 2.9)) == 0);
  CHECK(nearest_component(s, Vec3(0, 0, 0.1)) == -1);
}

TEST_CASE("heightfield gradient matches finite differences and stays bounded") {
  const Scene s = generate_scene(3, SceneConfig{}, table());
  CHECK(s.ground.max_gradient() <= 0.3 + 1e-12);

  const double eps = 1e-6;
  for (double x : {-4.0, 0.3, 5.1}) {
    for (double y : {-2.2, 1.7}) {
      const Vec2 g = s.ground.gradient(x, y);
      const double gx =
          (s.height(x + eps, y) - s.height(x - eps, y)) / (2 * eps);
      const double gy =
          (s.height(x, y + eps) - s.height(x, y - eps)) / (2 * eps);
      CHECK(g.x() == doctest::Approx(gx).epsilon(1e-5));
      CHECK(g.y() == doctest::Approx(gy).epsilon(1e-5));
      CHECK(g.norm() <= 0.3 + 1e-9);
    }
  }
}

TEST_CASE("generate_scene is deterministic and honors counts") {
  const SceneConfig cfg;
  const Scene a = generate_scene(7, cfg, table());
  const Scene b = generate_scene(7, cfg, table());
  REQUIRE(a.primitives.size() == b.primitives.size());
  for (std::size_t i = 0; i < a.primitives.size(); ++i) {
    CHECK(a.primitives[i].center == b.primitives[i].center);
    CHECK(a.primitives[i].dims == b.primitives[i].dims);
  }
  REQUIRE(a.ground.waves.size() == b.ground.waves.size());
  for (std::size_t i = 0; i < a.ground.waves.size(); ++i)
    CHECK(a.ground.waves[i].phase == b.ground.waves[i].phase);
  REQUIRE(a.terrain_sites.size() == b.terrain_sites.size());
  for (std::size_t i = 0; i < a.terrain_sites.size(); ++i)
    CHECK(a.terrain_sites[i].position == b.terrain_sites[i].position);

  SceneConfig empty = cfg;
  empty.n_spheres = empty.n_cylinders = empty.n_boxes = 0;
  CHECK(generate_scene(7, empty, table()).primitives.empty());

  SceneConfig cyl = cfg;
  cyl.n_spheres = cyl.n_boxes = 0;
  cyl.n_cylinders = 10;
  const Scene c = generate_scene(7, cyl, table());
  REQUIRE(c.primitives.size() == 10);
  for (const auto& prim : c.primitives)
    CHECK(prim.kind == ShapeKind::cylinder);

  SceneConfig bad = cfg;
  bad.half_extent = 0.0;
  CHECK_THROWS_AS(generate_scene(7, bad, table()), ConfigError);
}

TEST_CASE("single ray straight down lands on the ground") {
  const Scene s = flat_scene();
  LidarPattern p;
  p.n_rays = 1;
  p.rosette = true;
  p.elevation_min = -std::numbers::pi / 2.0;
  p.range_noise_sigma = 0.0;
  Rng rng(1);
  const PointCloud cloud =
      simulate_lidar(s, Pose{Vec3(0, 0, 2), 0.0}, p, table(), rng);
  REQUIRE(cloud.points.size() == 1);
  CHECK(cloud.points[0].position.head<2>().norm() < 1e-9);
  CHECK(std::abs(cloud.points[0].position.z()) <= 1e-4);
  CHECK(cloud.points[0].semantic_id == int(TerrainClass::concrete));
}

TEST_CASE("sky rays return nothing") {
  const Scene s = flat_scene();
  LidarPattern p;
  p.n_rays = 32;
  p.elevation_min = 0.3;
  p.elevation_max = 1.2;
  Rng rng(1);
  CHECK(simulate_lidar(s, Pose{Vec3(0, 0, 2), 0.0}, p, table(), rng)
            .points.empty());
}

TEST_CASE("lidar points sit on the scene surface within the noise bound") {
  const Scene s = generate_scene(11, SceneConfig{}, table());
  const Pose pose{Vec3(0, 0, s.height(0, 0) + 0.5), 0.0};
  Rng rng(2);

  LidarPattern clean;
  clean.n_rays = 4000;
  clean.range_noise_sigma = 0.0;
  const PointCloud exact = simulate_lidar(s, pose, clean, table(), rng);
  CHECK(exact.points.size() > 1000);
  for (const auto& pt : exact.points)
    CHECK(std::abs(scene_sdf(s, pt.position)) <= 1e-3);

  LidarPattern noisy = clean;
  noisy.n_rays = 15000;
  noisy.range_noise_sigma = 0.01;
  const PointCloud cloud = simulate_lidar(s, pose, noisy, table(), rng);
  CHECK(cloud.points.size() <= 15000);
  for (const auto& pt : cloud.points)
    CHECK(std::abs(scene_sdf(s, pt.position)) <= 3 * 0.01 + 1e-3);
}

TEST_CASE("audio basics") {
  const auto a = synth_audio(TerrainClass::gravel, 0.5, 2.0, 5);
  CHECK(a.size() == 8192);
  const auto b = synth_audio(TerrainClass::gravel, 0.5, 2.0, 5);
  CHECK(a == b);
  CHECK(a.cwiseAbs().maxCoeff() <= 1.0f);

  const MelConfig cfg;
  const double grass =
      mel_centroid(mel_spectrogram(synth_audio(TerrainClass::grass, 0.5, 2.0, 5), cfg));
  const double gravel =
      mel_centroid(mel_spectrogram(synth_audio(TerrainClass::gravel, 0.5, 2.0, 5), cfg));
  CHECK(gravel - grass > 5.0);
}

TEST_CASE("terrain classes are separable in mel space across seeds") {
  const MelConfig cfg;
  const int n_seeds = 20;
  std::array<std::vector<Eigen::MatrixXd>, kTerrainClassCount> mels;
  std::array<Eigen::MatrixXd, kTerrainClassCount> means;

  for (int c = 0; c < kTerrainClassCount; ++c) {
    Eigen::MatrixXd acc;
    for (int s = 0; s < n_seeds; ++s) {
      Eigen::MatrixXd m = mel_spectrogram(
          synth_audio(static_cast<TerrainClass>(c), 0.5, 2.0,
                      static_cast<std::uint64_t>(100 + s)),
          cfg);
      if (acc.size() == 0)
        acc = m;
      else
        acc += m;
      mels[size_t(c)].push_back(std::move(m));
    }
    means[size_t(c)] = acc / n_seeds;
  }

  std::array<double, kTerrainClassCount> within{};
  for (int c = 0; c < kTerrainClassCount; ++c) {
    double var = 0.0;
    for (const auto& m : mels[size_t(c)])
      var += (m - means[size_t(c)]).squaredNorm();
    within[size_t(c)] = std::sqrt(var / n_seeds);
  }

  for (int a = 0; a < kTerrainClassCount; ++a)
    for (int b = a + 1; b < kTerrainClassCount; ++b) {
      const double between = (means[size_t(a)] - means[size_t(b)]).norm();
      const double spread = std::max(within[size_t(a)], within[size_t(b)]);
      INFO("classes ", a, " vs ", b, ": between=", between,
           " within=", spread);
      CHECK(between > 10.0 * spread);
    }
}

TEST_CASE("imu noise scales with roughness") {
  const auto concrete = synth_imu(TerrainClass::concrete, 2.0, 9);
  const auto gravel = synth_imu(TerrainClass::gravel, 2.0, 9);
  auto mean_var = [](const ImuSeries& s) {
    const Eigen::RowVector3d mu = s.accel.colwise().mean();
    return (s.accel.rowwise() - mu).squaredNorm() / double(s.rows());
  };
  CHECK(mean_var(concrete) < mean_var(gravel));
  CHECK(concrete.accel.col(2).mean() == doctest::Approx(9.81).epsilon(0.02));
}

TEST_CASE("tactile calibration distribution is exact at zero roughness") {
  const auto t = synth_tactile_raw(0.0, 0.0, 1.0, 4);
  REQUIRE(t.rows() == 100);
  CHECK((t.force.array() - 60.0).abs().maxCoeff() < 1e-12);

  // slope shifts load to the rear legs
  const auto up = synth_tactile_raw(0.0, 0.3, 1.0, 4);
  CHECK(up.force(0, 2) > up.force(0, 0));
  CHECK(up.force.row(0).sum() == doctest::Approx(240.0));

  // roughness perturbs the split
  const auto rough = synth_tactile(TerrainClass::mud, 0.0, 1.0, 4);
  CHECK((rough.force.array() - 60.0).abs().maxCoeff() > 1.0);
}

TEST_CASE("make_dataset shapes, splits, validity, determinism") {
  const Scene scene = generate_scene(21, SceneConfig{}, table());
  const auto traj = make_trajectory(scene, 100, 21);
  REQUIRE(traj.size() == 100);

  DatasetConfig cfg;
  cfg.lidar.n_rays = 256;
  const Dataset ds = make_dataset(scene, traj, cfg, table());
  REQUIRE(ds.frames.size() == 100);
  CHECK(ds.train_ids.size() == 83);
  CHECK(ds.val_ids.size() == 9);
  CHECK(ds.test_ids.size() == 8);

  for (const auto& f : ds.frames) CHECK(validate_frame(f).empty());

  const Dataset ds2 = make_dataset(scene, traj, cfg, table());
  for (std::size_t i = 0; i < ds.frames.size(); ++i) {
    const Frame& a = ds.frames[i];
    const Frame& b = ds2.frames[i];
    REQUIRE(a.cloud.points.size() == b.cloud.points.size());
    for (std::size_t k = 0; k < a.cloud.points.size(); ++k)
      CHECK(a.cloud.points[k].position == b.cloud.points[k].position);
    for (int leg = 0; leg < 4; ++leg)
      CHECK(a.audio[size_t(leg)] == b.audio[size_t(leg)]);
    CHECK(a.imu.accel == b.imu.accel);
    CHECK(a.tactile.force == b.tactile.force);
  }

  CHECK_THROWS_AS(make_dataset(scene, {}, cfg, table()), InputError);

  int tr, va, te;
  split_counts(100, 0.835, 0.09, tr, va, te);
  CHECK(tr == 83);
  CHECK(va == 9);
  CHECK(te == 8);
  split_counts(551, 0.835, 0.09, tr, va, te);
  CHECK(tr == 460);
  CHECK(va == 49);
  CHECK(te == 42);
}
