#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "wildfusion/core/error.hpp"
#include "wildfusion/io/config.hpp"
#include "wildfusion/io/export.hpp"
#include "wildfusion/io/frame_io.hpp"
#include "wildfusion/io/manifest.hpp"
#include "wildfusion/label/labeling.hpp"
#include "wildfusion/synth/dataset.hpp"

using namespace wf;
namespace fs = std::filesystem;

namespace {

const SemanticTable& table() {
  static const SemanticTable t = SemanticTable::default_table();
  return t;
}

fs::path tmp_dir() {
  const fs::path dir = fs::temp_directory_path() / "wf_io_test";
  fs::create_directories(dir);
  return dir;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in),
          std::istreambuf_iterator<char>()};
}

Frame sample_frame() {
  const Scene scene = generate_scene(17, SceneConfig{}, table());
  const auto traj = make_trajectory(scene, 1, 17);
  DatasetConfig cfg;
  cfg.lidar.n_rays = 64;
  return make_dataset(scene, traj, cfg, table()).frames[0];
}

}  // namespace

TEST_CASE("frame files round trip bitwise") {
  const fs::path a = tmp_dir() / "a.wfrm";
  const fs::path b = tmp_dir() / "b.wfrm";
  write_frame(a.string(), sample_frame());
  const Frame f = read_frame(a.string());
  write_frame(b.string(), f);
  CHECK(read_all(a) == read_all(b));

  const Frame g = read_frame(b.string());
  CHECK(g.id == f.id);
  REQUIRE(g.cloud.points.size() == f.cloud.points.size());
  for (std::size_t i = 0; i < f.cloud.points.size(); ++i) {
    CHECK(g.cloud.points[i].position == f.cloud.points[i].position);
    CHECK(g.cloud.points[i].semantic_id == f.cloud.points[i].semantic_id);
  }
  for (int leg = 0; leg < 4; ++leg)
    CHECK(g.audio[size_t(leg)] == f.audio[size_t(leg)]);
  CHECK(g.imu.accel == f.imu.accel);
  CHECK(g.tactile.force == f.tactile.force);
}

TEST_CASE("frame reader rejects corrupt files") {
  const fs::path p = tmp_dir() / "bad.wfrm";
  write_frame(p.string(), sample_frame());

  const std::string good = read_all(p);
  {
    std::ofstream out(p, std::ios::binary);
    out.write(good.data(), static_cast<std::streamsize>(good.size() / 2));
  }
  CHECK_THROWS_WITH_AS(read_frame(p.string()),
                       doctest::Contains("truncated at byte offset"),
                       FormatError);

  {
    std::string bad = good;
    bad[0] = 'X';
    std::ofstream out(p, std::ios::binary);
    out.write(bad.data(), static_cast<std::streamsize>(bad.size()));
  }
  CHECK_THROWS_WITH_AS(read_frame(p.string()), doctest::Contains("WFRM"),
                       FormatError);
}

TEST_CASE("label files round trip and validate") {
  LabeledFrame lf;
  lf.frame_id = 3;
  lf.traversability = 0.625;

  QuerySample free;
  free.kind = SampleKind::free;
  free.position = Vec3(1, 2, 3);
  free.sdf = 0.5;
  free.confidence = 1.0;
  free.semantic_id = table().null_id();
  QuerySample neg;
  neg.kind = SampleKind::negative;
  neg.position = Vec3(0.5, 0.25, -1);
  neg.sdf = -0.125;
  neg.confidence = 0.53125;
  neg.color_bins = {{3, 8, 11}};
  neg.semantic_id = 4;
  QuerySample surf;
  surf.kind = SampleKind::surface;
  surf.position = Vec3(0, 0, 0);
  surf.sdf = 0.0;
  surf.confidence = 1.0;
  surf.color_bins = {{0, 15, 7}};
  surf.semantic_id = 0;
  lf.samples = {free, neg, surf};

  const fs::path a = tmp_dir() / "a.wflb";
  const fs::path b = tmp_dir() / "b.wflb";
  write_labels(a.string(), lf, table());
  const LabeledFrame rt = read_labels(a.string(), table());
  write_labels(b.string(), rt, table());
  CHECK(read_all(a) == read_all(b));

  REQUIRE(rt.samples.size() == 3);
  CHECK(rt.traversability == doctest::Approx(0.625));
  CHECK(!rt.samples[0].color_bins.has_value());
  CHECK(rt.samples[0].semantic_id == table().null_id());
  CHECK(rt.samples[1].color_bins == std::array<int, 3>{{3, 8, 11}});
  CHECK(rt.samples[1].sdf == doctest::Approx(-0.125));

  // an empty list is a valid file
  LabeledFrame empty;
  write_labels(a.string(), empty, table());
  CHECK(read_labels(a.string(), table()).samples.empty());

  // free sample with non-NULL semantics must be rejected on read
  LabeledFrame corrupt = lf;
  corrupt.samples[0].semantic_id = 2;
  write_labels(a.string(), corrupt, table());
  CHECK_THROWS_WITH_AS(read_labels(a.string(), table()),
                       doctest::Contains("sample 0"), FormatError);
}

TEST_CASE("manifest round trip and split checks") {
  DatasetManifest m;
  m.scene_seed = 77;
  m.config_digest = "deadbeefdeadbeef";
  m.frame_count = 10;
  m.train_ids = {0, 1, 2, 3, 4, 5};
  m.val_ids = {6};
  m.test_seen_ids = {7, 8};
  m.test_unseen_ids = {9};

  const fs::path p = tmp_dir() / "manifest.json";
  write_manifest(p.string(), m);
  const DatasetManifest r = read_manifest(p.string());
  CHECK(r.scene_seed == 77);
  CHECK(r.train_ids == m.train_ids);
  CHECK(r.test_unseen_ids == m.test_unseen_ids);

  DatasetManifest overlap = m;
  overlap.val_ids = {5};
  CHECK_THROWS_AS(write_manifest(p.string(), overlap), FormatError);

  DatasetManifest gap = m;
  gap.test_unseen_ids.clear();
  CHECK_THROWS_AS(write_manifest(p.string(), gap), FormatError);

  CHECK(config_digest("a = 1\n") != config_digest("a = 2\n"));
  CHECK(frame_file_name(7) == "frame_000007.wfrm");
}

TEST_CASE("config parsing, overrides, unknown keys") {
  ConfigMap empty = ConfigMap::parse_text("");
  CHECK(empty.get_double("train.lambda2", 0.01) == 0.01);
  empty.check_consumed();

  ConfigMap cfg = ConfigMap::parse_text(
      "# comment\n"
      "train.lambda2 = 0.5\n"
      "scene.seed = 42   # trailing comment\n"
      "nav.use_product = true\n");
  CHECK(cfg.get_double("train.lambda2", 0.01) == 0.5);
  CHECK(cfg.get_u64("scene.seed", 0) == 42);
  CHECK(cfg.get_bool("nav.use_product", false) == true);
  cfg.check_consumed();
  CHECK(cfg.resolved().find("train.lambda2 = 0.5") != std::string::npos);

  ConfigMap unknown = ConfigMap::parse_text("train.lambda9 = 1\n");
  CHECK(unknown.get_double("train.lambda2", 0.01) == 0.01);
  CHECK_THROWS_WITH_AS(unknown.check_consumed(),
                       doctest::Contains("train.lambda9"), ConfigError);

  CHECK_THROWS_WITH_AS(ConfigMap::parse_text("novalue\n", "x.cfg"),
                       doctest::Contains("x.cfg:1"), ConfigError);
  CHECK_THROWS_AS(ConfigMap::parse_text("a = 1\na = 2\n"), ConfigError);

  ConfigMap badnum = ConfigMap::parse_text("train.lr = fast\n");
  CHECK_THROWS_WITH_AS(badnum.get_double("train.lr", 1e-3),
                       doctest::Contains("train.lr"), ConfigError);
}

TEST_CASE("pgm, ply, csv writers produce well-formed files") {
  const fs::path dir = tmp_dir();

  Eigen::MatrixXd img(2, 3);
  img << 0.0, 0.5, 1.0, 1.0, 0.25, -1.0;
  write_pgm((dir / "img.pgm").string(), img, 0.0, 1.0);
  const std::string pgm = read_all(dir / "img.pgm");
  CHECK(pgm.substr(0, 3) == "P5\n");
  CHECK(pgm.find("3 2\n255\n") != std::string::npos);
  CHECK(static_cast<unsigned char>(pgm[pgm.size() - 6]) == 0);
  CHECK(static_cast<unsigned char>(pgm[pgm.size() - 4]) == 255);
  CHECK(static_cast<unsigned char>(pgm[pgm.size() - 1]) == 0);  // clamped

  write_ply((dir / "pts.ply").string(),
            {{Vec3(1, 2, 3), {255, 0, 0}}, {Vec3(-1, 0, 1), {0, 255, 0}}});
  const std::string ply = read_all(dir / "pts.ply");
  CHECK(ply.find("element vertex 2") != std::string::npos);
  CHECK(ply.find("1 2 3 255 0 0") != std::string::npos);

  write_csv((dir / "log.csv").string(), {"step", "loss"},
            {{0, 1.5}, {1, 1.25}});
  const std::string csv = read_all(dir / "log.csv");
  CHECK(csv.find("step,loss\n0,1.5\n1,1.25\n") != std::string::npos);
  CHECK_THROWS_AS(
      write_csv((dir / "bad.csv").string(), {"a"}, {{1.0, 2.0}}),
      InputError);
}
