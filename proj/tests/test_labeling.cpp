#include <cmath>

#include "doctest.h"
#include "wildfusion/core/error.hpp"
#include "wildfusion/core/rng.hpp"
#include "wildfusion/core/validate.hpp"
#include "wildfusion/label/labeling.hpp"
#include "wildfusion/label/surface_index.hpp"
#include "wildfusion/synth/dataset.hpp"
#include "wildfusion/synth/scene.hpp"
#include "wildfusion/synth/sensors.hpp"

using namespace wf;

namespace {

const SemanticTable& table() {
  static const SemanticTable t = SemanticTable::default_table();
  return t;
}

PointCloud random_cloud(int n, Rng& rng) {
  PointCloud c;
  for (int i = 0; i < n; ++i)
    c.points.push_back({Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5),
                             rng.uniform(-5, 5)),
                        Vec3(50, 0, 0), 0});
  return c;
}

int brute_force_nearest(const PointCloud& c, const Vec3& q) {
  int best = 0;
  double bd = (c.points[0].position - q).norm();
  for (int i = 1; i < int(c.points.size()); ++i) {
    const double d = (c.points[size_t(i)].position - q).norm();
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

TraversabilityCalibration synth_calibration() {
  return calibrate(synth_imu(TerrainClass::concrete, 4.0, 1000),
                   synth_tactile(TerrainClass::concrete, 0.0, 4.0, 1000));
}

}  // namespace

TEST_CASE("surface index nearest matches hand geometry") {
  PointCloud c;
  c.points.push_back({Vec3(0, 0, 0), {}, 0});
  c.points.push_back({Vec3(1, 0, 0), {}, 0});
  c.points.push_back({Vec3(0, 2, 0), {}, 0});
  const SurfaceIndex idx(c);
  const auto r = idx.nearest(Vec3(0.9, 0, 0));
  CHECK(r.distance == doctest::Approx(0.1));
  CHECK(idx.point(r.index).position == Vec3(1, 0, 0));
}

TEST_CASE("surface index equals brute force on random instances") {
  Rng rng(99);
  const PointCloud c = random_cloud(1000, rng);
  const SurfaceIndex idx(c, 30);
  for (int k = 0; k < 100; ++k) {
    const Vec3 q(rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(-6, 6));
    const int want = brute_force_nearest(c, q);
    const auto got = idx.nearest(q);
    CHECK(got.distance ==
          doctest::Approx((c.points[size_t(want)].position - q).norm()));
  }
}

TEST_CASE("single-point index answers every query with that point") {
  PointCloud c;
  c.points.push_back({Vec3(1, 1, 1), {}, 0});
  const SurfaceIndex idx(c);
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const Vec3 q(rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(-9, 9));
    const auto r = idx.nearest(q);
    CHECK(r.index == 0);
    CHECK(r.distance == doctest::Approx((q - Vec3(1, 1, 1)).norm()));
  }

  CHECK_THROWS_AS(SurfaceIndex(PointCloud{}), InputError);
}

TEST_CASE("sample_ray spacing conventions") {
  const auto s = sample_ray(Vec3(0, 0, 0), Vec3(0, 0, -10), 4, 2, 0.2);
  REQUIRE(s.size() == 7);
  CHECK(s[0].position.z() == doctest::Approx(-2.0));
  CHECK(s[1].position.z() == doctest::Approx(-4.0));
  CHECK(s[2].position.z() == doctest::Approx(-6.0));
  CHECK(s[3].position.z() == doctest::Approx(-8.0));
  CHECK(s[0].kind == SampleKind::free);
  CHECK(s[4].kind == SampleKind::surface);
  CHECK(s[4].position.z() == doctest::Approx(-10.0));
  CHECK(s[5].position.z() == doctest::Approx(-10.1));
  CHECK(s[6].position.z() == doctest::Approx(-10.2));
  CHECK(s[5].kind == SampleKind::negative);

  const auto only_surface = sample_ray(Vec3(0, 0, 0), Vec3(1, 0, 0), 0, 0, 0.5);
  REQUIRE(only_surface.size() == 1);
  CHECK(only_surface[0].kind == SampleKind::surface);

  CHECK_THROWS_AS(sample_ray(Vec3(1, 2, 3), Vec3(1, 2, 3), 4, 2, 0.5),
                  InputError);
}

TEST_CASE("sdf and confidence assignment") {
  PointCloud c;
  c.points.push_back({Vec3(0, 0, 0), Vec3(50, 10, -10), 2});
  const SurfaceIndex idx(c);

  std::vector<RaySample> rays = {
      {Vec3(0, 0, 0.5), SampleKind::free},
      {Vec3(0, 0, 0), SampleKind::surface},
      {Vec3(0, 0, -0.2), SampleKind::negative},
  };
  const auto q = assign_sdf_confidence(rays, idx, table(), 5.0);
  REQUIRE(q.size() == 3);

  CHECK(q[0].sdf == doctest::Approx(0.5));
  CHECK(q[0].confidence == 1.0);
  CHECK(!q[0].color_bins.has_value());
  CHECK(q[0].semantic_id == table().null_id());

  CHECK(q[1].sdf == 0.0);
  CHECK(q[1].confidence == 1.0);
  CHECK(q[1].semantic_id == 2);
  CHECK(q[1].color_bins.has_value());

  CHECK(q[2].sdf == doctest::Approx(-0.2));
  CHECK(q[2].confidence == doctest::Approx(std::exp(-1.0)));
  CHECK(q[2].semantic_id == 2);

  CHECK(confidence_from_depth(0.0, 5.0) == 1.0);
  CHECK(confidence_from_depth(0.1, 5.0) > confidence_from_depth(0.2, 5.0));
}

TEST_CASE("traversability score endpoints") {
  TraversabilityCalibration cal;

  ImuSeries still;
  still.t = Eigen::VectorXd::LinSpaced(50, 0, 0.49);
  still.accel.setZero(50, 3);
  still.accel.col(2).setConstant(9.81);
  TactileSeries ideal;
  ideal.t = still.t;
  ideal.force.setConstant(50, 4, 60.0);
  CHECK(traversability_score(still, ideal, cal) == doctest::Approx(1.0));

  ImuSeries wild = still;
  Rng rng(6);
  for (int i = 0; i < 50; ++i)
    for (int a = 0; a < 3; ++a) wild.accel(i, a) += rng.normal(0.0, 8.0);
  TactileSeries lopsided = ideal;
  lopsided.force.setZero();
  lopsided.force.col(0).setConstant(240.0);
  CHECK(traversability_score(wild, lopsided, cal) == doctest::Approx(0.0));

  TactileSeries zero = ideal;
  zero.force.setZero();
  CHECK_THROWS_AS(traversability_score(still, zero, cal), InputError);

  TraversabilityCalibration bad = cal;
  bad.accel_variance_ceiling = bad.accel_variance_floor;
  CHECK_THROWS_AS(traversability_score(still, ideal, bad), ConfigError);
}

TEST_CASE("rough terrain scores below smooth terrain") {
  const auto cal = synth_calibration();
  auto score = [&](TerrainClass tc) {
    return traversability_score(synth_imu(tc, 2.0, 77),
                                synth_tactile(tc, 0.0, 2.0, 77), cal);
  };
  const double mud = score(TerrainClass::mud);
  const double concrete = score(TerrainClass::concrete);
  CHECK(mud < concrete);
  CHECK(concrete > 0.9);
  CHECK(mud < 0.3);
}

TEST_CASE("score never rises as accel noise grows") {
  const auto cal = synth_calibration();
  const TactileSeries tact = synth_tactile(TerrainClass::gravel, 0.0, 2.0, 8);
  ImuSeries base = synth_imu(TerrainClass::gravel, 2.0, 8);
  const Eigen::RowVector3d mu = base.accel.colwise().mean();

  double prev = 2.0;
  for (double scale : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    ImuSeries scaled = base;
    scaled.accel = ((base.accel.rowwise() - mu) * scale).rowwise() + mu;
    const double s = traversability_score(scaled, tact, cal);
    CHECK(s <= prev + 1e-12);
    prev = s;
  }
}

TEST_CASE("label_frame sample counts and invariants") {
  const Scene scene = generate_scene(31, SceneConfig{}, table());
  const auto traj = make_trajectory(scene, 1, 31);
  DatasetConfig dcfg;
  dcfg.lidar.n_rays = 120;
  dcfg.lidar.range_noise_sigma = 0.0;
  const Dataset ds = make_dataset(scene, traj, dcfg, table());
  REQUIRE(ds.frames.size() == 1);
  const Frame& frame = ds.frames[0];

  LabelConfig cfg;
  cfg.n_free = 3;
  cfg.n_neg = 1;
  cfg.calibration = synth_calibration();
  const LabeledFrame lf = label_frame(frame, cfg, table());
  CHECK(lf.samples.size() == frame.cloud.points.size() * 5);

  for (const auto& s : lf.samples) CHECK(validate_sample(s, table()).empty());
  for (const auto& s : lf.samples)
    if (s.kind == SampleKind::free) CHECK(s.confidence == 1.0);
  CHECK(lf.traversability >= 0.0);
  CHECK(lf.traversability <= 1.0);
}

namespace {

Frame lidar_only_frame(const Scene& s, const Pose& pose,
                       const LidarPattern& pat) {
  Rng rng(4);
  Frame frame;
  frame.id = 0;
  frame.robot_pose = pose;
  frame.cloud = simulate_lidar(s, pose, pat, table(), rng);
  frame.imu = synth_imu(TerrainClass::grass, 2.0, 2);
  frame.tactile = synth_tactile(TerrainClass::grass, 0.0, 2.0, 2);
  for (auto& a : frame.audio) a = Eigen::VectorXf::Zero(8192);
  return frame;
}

}  // namespace

TEST_CASE("sample signs agree with the oracle where solids are thick") {
  // Ground only (a half-space, infinitely deep) and rays steeper than any
  // slope, so a ray that has entered the ground can never come back out.
  Scene s = generate_scene(13, SceneConfig{.n_spheres = 0, .n_cylinders = 0,
                                           .n_boxes = 0},
                           table());
  LidarPattern pat;
  pat.n_rays = 6000;
  pat.range_noise_sigma = 0.0;
  pat.elevation_min = -1.35;
  pat.elevation_max = -0.35;
  const Frame frame =
      lidar_only_frame(s, {Vec3(0.0, 0.0, s.height(0, 0) + 1.5), 0.0}, pat);
  REQUIRE(frame.cloud.points.size() > 3000);

  LabelConfig cfg;
  cfg.calibration = synth_calibration();
  const LabeledFrame lf = label_frame(frame, cfg, table());

  for (const auto& q : lf.samples) {
    const double oracle = scene_sdf(s, q.position);
    if (q.kind == SampleKind::free) CHECK(oracle > -1e-3);
    if (q.kind == SampleKind::negative) CHECK(oracle < 1e-3);
  }
}

TEST_CASE("free-sample sdf tracks the analytic oracle") {
  Scene s;
  s.half_extent = 8.0;
  s.terrain_sites.push_back({{0, 0}, TerrainClass::grass});
  s.primitives.push_back(
      {ShapeKind::sphere, Vec3(2.0, 0.0, 1.2), Vec3(1.5, 0, 0),
       kSemanticRock, table().at(kSemanticRock).base_color_lab});

  LidarPattern pat;
  pat.n_rays = 6000;
  pat.range_noise_sigma = 0.0;
  pat.elevation_min = -1.35;
  pat.elevation_max = 0.1;
  const Frame frame = lidar_only_frame(s, {Vec3(-2.0, 0.0, 1.5), 0.0}, pat);
  REQUIRE(frame.cloud.points.size() > 3000);

  LabelConfig cfg;
  cfg.calibration = synth_calibration();
  const LabeledFrame lf = label_frame(frame, cfg, table());

  double abs_err = 0.0;
  int n_free = 0;
  for (const auto& q : lf.samples) {
    if (q.kind != SampleKind::free) continue;
    const double oracle = scene_sdf(s, q.position);
    CHECK(oracle > -1e-3);
    abs_err += std::abs(q.sdf - oracle);
    ++n_free;
  }
  REQUIRE(n_free > 0);
  CHECK(abs_err / n_free < 0.02);
}
