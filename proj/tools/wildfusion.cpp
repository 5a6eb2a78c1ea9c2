#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wildfusion/core/color.hpp"
#include "wildfusion/core/rng.hpp"
#include "wildfusion/eval/metrics.hpp"
#include "wildfusion/field/evaluator.hpp"
#include "wildfusion/field/train.hpp"
#include "wildfusion/io/config.hpp"
#include "wildfusion/io/export.hpp"
#include "wildfusion/io/frame_io.hpp"
#include "wildfusion/io/manifest.hpp"
#include "wildfusion/label/labeling.hpp"
#include "wildfusion/nav/costmap.hpp"
#include "wildfusion/nav/planner.hpp"
#include "wildfusion/synth/dataset.hpp"
#include "wildfusion/synth/scene.hpp"

namespace fs = std::filesystem;
using namespace wf;

namespace {

constexpr const char* kManifestName = "manifest.json";

// one config file may drive the whole pipeline; each stage owns these
// sections and ignores the rest
const std::vector<std::string> kAllSections = {
    "synth.", "scene.", "label.", "model.",
    "train.", "eval.",  "plan.",  "export."};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

void echo_config(const fs::path& dir, ConfigMap& cm,
                 const std::vector<std::string>& active) {
  cm.check_consumed(active, kAllSections);
  write_text(dir / "resolved_config.txt", cm.resolved());
}

ConfigMap load_config(const std::string& path) {
  if (path.empty()) return ConfigMap();
  return ConfigMap::parse_file(path);
}

DatasetManifest read_dataset_manifest(const fs::path& dir) {
  return read_manifest((dir / kManifestName).string());
}

// ---------------------------------------------------------------- synth ---

int run_synth(const std::string& config_path, const std::string& out_dir) {
  ConfigMap cm = load_config(config_path);
  const std::uint64_t seed = cm.get_u64("synth.seed", 0);
  const int n_poses = cm.get_int("synth.n_poses", 12);
  const int n_test_seen = cm.get_int("synth.n_test_seen", 2);
  const int n_test_unseen = cm.get_int("synth.n_test_unseen", 2);
  const std::uint64_t unseen_seed = cm.get_u64("synth.unseen_seed", seed + 1000);
  const bool corridor = cm.get_bool("synth.corridor", false);

  DatasetConfig dc;
  dc.lidar.n_rays = cm.get_int("synth.n_rays", dc.lidar.n_rays);
  dc.lidar.range_noise_sigma =
      cm.get_double("synth.range_noise_sigma", dc.lidar.range_noise_sigma);
  dc.sensor_height = cm.get_double("synth.sensor_height", dc.sensor_height);
  dc.accumulation_window =
      cm.get_double("synth.accumulation_window", dc.accumulation_window);

  SceneConfig sc;
  sc.half_extent = cm.get_double("scene.half_extent", sc.half_extent);
  sc.n_spheres = cm.get_int("scene.n_spheres", sc.n_spheres);
  sc.n_cylinders = cm.get_int("scene.n_cylinders", sc.n_cylinders);
  sc.n_boxes = cm.get_int("scene.n_boxes", sc.n_boxes);
  sc.n_terrain_sites = cm.get_int("scene.n_terrain_sites", sc.n_terrain_sites);

  const SemanticTable table = SemanticTable::default_table();
  const Scene scene = corridor ? vegetation_corridor_scene(table)
                               : generate_scene(seed, sc, table);

  const auto traj = make_trajectory(scene, n_poses, seed, dc.sensor_height);
  Dataset core = make_dataset(scene, traj, dc, table);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  DatasetManifest manifest;
  manifest.scene_seed = scene.seed;
  manifest.audio_sample_rate = core.frames.front().audio_sample_rate;
  manifest.accumulation_window = dc.accumulation_window;
  manifest.scene_half_extent = scene.half_extent;
  manifest.train_ids = core.train_ids;
  manifest.val_ids = core.val_ids;
  // the core split's own held-out poses are same-scene viewpoints
  manifest.test_seen_ids = core.test_ids;

  int next_id = int(core.frames.size());
  std::vector<Frame> extra;

  // seen-viewpoint test: training poses nudged in place and re-rendered
  Rng jitter(Rng::derive(seed, 77));
  std::vector<Pose> seen_poses;
  for (int i = 0; i < n_test_seen && i < int(core.train_ids.size()); ++i) {
    Pose p = traj[std::size_t(core.train_ids[std::size_t(i)])];
    p.position.x() += jitter.uniform(-0.3, 0.3);
    p.position.y() += jitter.uniform(-0.3, 0.3);
    p.yaw += jitter.uniform(-0.2, 0.2);
    seen_poses.push_back(p);
  }
  if (!seen_poses.empty()) {
    Dataset seen = make_dataset(scene, seen_poses, dc, table);
    for (Frame& f : seen.frames) {
      f.id = next_id++;
      manifest.test_seen_ids.push_back(f.id);
      extra.push_back(std::move(f));
    }
  }

  // unseen-scene test: a fresh procedural scene
  if (n_test_unseen > 0) {
    const Scene fresh = generate_scene(unseen_seed, sc, table);
    const auto fresh_traj =
        make_trajectory(fresh, n_test_unseen, unseen_seed, dc.sensor_height);
    Dataset unseen = make_dataset(fresh, fresh_traj, dc, table);
    for (Frame& f : unseen.frames) {
      f.id = next_id++;
      manifest.test_unseen_ids.push_back(f.id);
      extra.push_back(std::move(f));
    }
  }

  for (const Frame& f : core.frames)
    write_frame((dir / frame_file_name(f.id)).string(), f);
  for (const Frame& f : extra)
    write_frame((dir / frame_file_name(f.id)).string(), f);

  manifest.frame_count = next_id;
  cm.check_consumed({"synth.", "scene."}, kAllSections);
  manifest.config_digest = config_digest(cm.resolved());
  manifest.check();
  write_manifest((dir / kManifestName).string(), manifest);
  echo_config(dir, cm, {"synth.", "scene."});
  std::fprintf(stderr, "synth: %d frames (%zu train, %zu val, %zu seen, %zu unseen)\n",
               manifest.frame_count, manifest.train_ids.size(),
               manifest.val_ids.size(), manifest.test_seen_ids.size(),
               manifest.test_unseen_ids.size());
  return 0;
}

// ---------------------------------------------------------------- label ---

int run_label(const std::string& config_path, const std::string& data_dir,
              std::string out_dir) {
  if (out_dir.empty()) out_dir = data_dir;
  ConfigMap cm = load_config(config_path);
  LabelConfig lc;
  lc.n_free = cm.get_int("label.n_free", lc.n_free);
  lc.n_neg = cm.get_int("label.n_neg", lc.n_neg);
  lc.max_neg_depth = cm.get_double("label.max_neg_depth", lc.max_neg_depth);
  lc.decay_k = cm.get_double("label.decay_k", lc.decay_k);

  const SemanticTable table = SemanticTable::default_table();
  const DatasetManifest manifest = read_dataset_manifest(data_dir);
  fs::create_directories(out_dir);

  std::vector<std::vector<double>> trav_rows;
  for (int id = 0; id < manifest.frame_count; ++id) {
    const Frame frame =
        read_frame((fs::path(data_dir) / frame_file_name(id)).string());
    const LabeledFrame labels = label_frame(frame, lc, table);
    write_labels((fs::path(out_dir) / label_file_name(id)).string(), labels,
                 table);
    trav_rows.push_back({double(id), labels.traversability});
  }
  write_csv((fs::path(out_dir) / "traversability.csv").string(),
            {"frame_id", "score"}, trav_rows);
  echo_config(out_dir, cm, {"label."});
  std::fprintf(stderr, "label: %d frames\n", manifest.frame_count);
  return 0;
}

// ---------------------------------------------------------------- train ---

ModelConfig model_config_from(ConfigMap& cm, int n_classes) {
  ModelConfig mc;
  mc.fourier_m = cm.get_int("model.fourier_m", mc.fourier_m);
  mc.fourier_sigma = cm.get_double("model.fourier_sigma", mc.fourier_sigma);
  mc.tnet_hidden = cm.get_int("model.tnet_hidden", mc.tnet_hidden);
  mc.pn_h1 = cm.get_int("model.pn_h1", mc.pn_h1);
  mc.pn_h2 = cm.get_int("model.pn_h2", mc.pn_h2);
  mc.pn_feat = cm.get_int("model.pn_feat", mc.pn_feat);
  mc.audio_c1 = cm.get_int("model.audio_c1", mc.audio_c1);
  mc.audio_c2 = cm.get_int("model.audio_c2", mc.audio_c2);
  mc.audio_c3 = cm.get_int("model.audio_c3", mc.audio_c3);
  mc.audio_feat = cm.get_int("model.audio_feat", mc.audio_feat);
  mc.n_mels = cm.get_int("model.n_mels", mc.n_mels);
  mc.n_audio_frames = cm.get_int("model.n_audio_frames", mc.n_audio_frames);
  mc.trunk_width = cm.get_int("model.trunk_width", mc.trunk_width);
  mc.head_hidden = cm.get_int("model.head_hidden", mc.head_hidden);
  mc.trav_hidden = cm.get_int("model.trav_hidden", mc.trav_hidden);
  mc.s_max = cm.get_double("model.s_max", mc.s_max);
  mc.dropout = cm.get_double("model.dropout", mc.dropout);
  mc.n_classes = n_classes;
  mc.check();
  return mc;
}

TrainConfig train_config_from(ConfigMap& cm) {
  TrainConfig tc;
  for (int i = 0; i < 6; ++i)
    tc.lambda[std::size_t(i)] =
        cm.get_double("train.lambda" + std::to_string(i + 1),
                      tc.lambda[std::size_t(i)]);
  tc.alpha = cm.get_double("train.alpha", tc.alpha);
  tc.beta = cm.get_double("train.beta", tc.beta);
  tc.huber_delta = cm.get_double("train.huber_delta", tc.huber_delta);
  tc.learning_rate = cm.get_double("train.learning_rate", tc.learning_rate);
  tc.batch_queries = cm.get_int("train.batch_queries", tc.batch_queries);
  tc.epochs = cm.get_int("train.epochs", tc.epochs);
  tc.seed = cm.get_u64("train.seed", tc.seed);
  tc.val_queries_per_frame =
      cm.get_int("train.val_queries_per_frame", tc.val_queries_per_frame);
  const char* head_names[6] = {"sdf",       "eikonal", "confidence",
                               "semantics", "color",   "traversability"};
  for (int i = 0; i < 6; ++i)
    tc.head_enable[std::size_t(i)] =
        cm.get_bool(std::string("train.enable_") + head_names[std::size_t(i)],
                    tc.head_enable[std::size_t(i)]);
  tc.check();
  return tc;
}

std::vector<FrameData> load_split(const fs::path& data_dir,
                                  const std::vector<int>& ids,
                                  const SemanticTable& table,
                                  const ModelConfig& mc) {
  std::vector<FrameData> out;
  out.reserve(ids.size());
  for (int id : ids) {
    const Frame frame = read_frame((data_dir / frame_file_name(id)).string());
    const LabeledFrame labels =
        read_labels((data_dir / label_file_name(id)).string(), table);
    out.push_back(prepare_frame(frame, labels, mc));
  }
  return out;
}

int run_train(const std::string& config_path, const std::string& data_dir,
              const std::string& out_dir) {
  ConfigMap cm = load_config(config_path);
  const SemanticTable table = SemanticTable::default_table();
  const DatasetManifest manifest = read_dataset_manifest(data_dir);
  const ModelConfig mc = model_config_from(cm, table.size());
  const TrainConfig tc = train_config_from(cm);

  const auto train_frames = load_split(data_dir, manifest.train_ids, table, mc);
  const auto val_frames = load_split(data_dir, manifest.val_ids, table, mc);

  const int report_every = std::max(1, tc.epochs / 10);
  TrainResult result = train_field(
      train_frames, val_frames, mc, tc, [&](const TrainLogEntry& e) {
        if (e.epoch % report_every == 0 || e.epoch == tc.epochs)
          std::fprintf(stderr, "epoch %d/%d train %.5f val %.5f\n", e.epoch,
                       tc.epochs, e.train_mean.total, e.val_total);
      });

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_checkpoint((dir / "checkpoint.wfld").string(), result.params);

  std::vector<std::vector<double>> rows;
  for (const TrainLogEntry& e : result.log)
    rows.push_back({double(e.epoch), e.train_mean.sdf, e.train_mean.eikonal,
                    e.train_mean.confidence, e.train_mean.semantics,
                    e.train_mean.color, e.train_mean.traversability,
                    e.train_mean.total, e.val_total});
  write_csv((dir / "loss_log.csv").string(),
            {"step", "sdf", "eikonal", "confidence", "semantics", "color",
             "traversability", "total", "val_total"},
            rows);
  echo_config(dir, cm, {"model.", "train."});
  std::fprintf(stderr, "train: best epoch %d val %.5f -> %s\n",
               result.best_epoch, result.best_val,
               (dir / "checkpoint.wfld").c_str());
  return 0;
}

// ----------------------------------------------------------------- eval ---

double opt_or_nan(const std::optional<double>& v) {
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

std::string render_report(const EvalReport& r) {
  std::string s;
  char buf[128];
  auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.9g\n", key, v);
    s += buf;
  };
  line("n_samples_used", double(r.n_samples_used));
  if (r.color) {
    line("color.mse", r.color->mse);
    line("color.mae", r.color->mae);
    line("color.psnr", r.color->psnr);
  } else {
    s += "color = absent\n";
  }
  if (r.geometry) {
    line("geometry.hausdorff", r.geometry->hausdorff);
    line("geometry.chamfer", r.geometry->chamfer);
  } else {
    s += "geometry = absent\n";
  }
  if (r.semantic) {
    line("semantic.accuracy", r.semantic->accuracy);
    line("semantic.precision", r.semantic->precision);
    line("semantic.recall", r.semantic->recall);
    line("semantic.f1", r.semantic->f1);
    line("semantic.iou", r.semantic->iou);
  } else {
    s += "semantic = absent\n";
  }
  if (r.ece)
    line("confidence.ece", *r.ece);
  else
    s += "confidence = absent\n";
  return s;
}

int run_eval(const std::string& config_path, const std::string& data_dir,
             const std::string& checkpoint, const std::string& out_dir,
             bool oracle) {
  ConfigMap cm = load_config(config_path);
  EvalConfig ec;
  ec.max_points_per_frame = cm.get_int("eval.max_points", ec.max_points_per_frame);
  ec.ece_bins = cm.get_int("eval.ece_bins", ec.ece_bins);
  ec.seed = cm.get_u64("eval.seed", ec.seed);
  ec.oracle = oracle;

  const SemanticTable table = SemanticTable::default_table();
  const DatasetManifest manifest = read_dataset_manifest(data_dir);
  const ModelParams params = read_checkpoint(checkpoint);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  std::vector<std::vector<double>> rows;
  const struct {
    const char* name;
    const std::vector<int>* ids;
    double split_code;
  } splits[] = {{"seen", &manifest.test_seen_ids, 0.0},
                {"unseen", &manifest.test_unseen_ids, 1.0}};

  for (const auto& split : splits) {
    if (split.ids->empty()) continue;
    std::vector<EvalReport> reports;
    for (int id : *split.ids) {
      const auto frames = load_split(data_dir, {id}, table, params.config);
      const EvalReport r = evaluate_frame(params, frames.front(), ec);
      reports.push_back(r);
      rows.push_back({split.split_code, double(id), double(r.n_samples_used),
                      opt_or_nan(r.color ? std::optional<double>(r.color->mse)
                                         : std::nullopt),
                      opt_or_nan(r.color ? std::optional<double>(r.color->mae)
                                         : std::nullopt),
                      opt_or_nan(r.color ? std::optional<double>(r.color->psnr)
                                         : std::nullopt),
                      opt_or_nan(r.geometry
                                     ? std::optional<double>(r.geometry->hausdorff)
                                     : std::nullopt),
                      opt_or_nan(r.geometry
                                     ? std::optional<double>(r.geometry->chamfer)
                                     : std::nullopt),
                      opt_or_nan(r.semantic
                                     ? std::optional<double>(r.semantic->accuracy)
                                     : std::nullopt),
                      opt_or_nan(r.semantic
                                     ? std::optional<double>(r.semantic->precision)
                                     : std::nullopt),
                      opt_or_nan(r.semantic
                                     ? std::optional<double>(r.semantic->recall)
                                     : std::nullopt),
                      opt_or_nan(r.semantic
                                     ? std::optional<double>(r.semantic->f1)
                                     : std::nullopt),
                      opt_or_nan(r.semantic
                                     ? std::optional<double>(r.semantic->iou)
                                     : std::nullopt),
                      opt_or_nan(r.ece)});
    }
    const EvalReport agg = aggregate_reports(reports);
    const std::string text = render_report(agg);
    write_text(dir / (std::string("eval_") + split.name + ".txt"), text);
    std::printf("[%s]\n%s", split.name, text.c_str());
  }

  write_csv((dir / "eval_frames.csv").string(),
            {"split", "frame_id", "n_samples", "color_mse", "color_mae",
             "color_psnr", "hausdorff", "chamfer", "accuracy", "precision",
             "recall", "f1", "iou", "ece"},
            rows);
  echo_config(dir, cm, {"eval."});
  return 0;
}

// ----------------------------------------------------------------- plan ---

struct SweepResult {
  MapSpec spec;
  Eigen::MatrixXi semantic;
  Eigen::MatrixXd elevation;
  FieldGridResult field;
  double t_model = 0.0;
  GridCell robot{0, 0};
};

SweepResult sweep_frame(const ModelParams& params, const Frame& frame,
                        double half_extent, double cell, double z_min,
                        double z_max) {
  const LabeledFrame no_labels;
  const FrameData fd = prepare_frame(frame, no_labels, params.config);
  const FrameEncoding enc = encode_frame(params, fd);

  SweepResult out;
  out.spec.origin = Vec3(-half_extent, -half_extent, 0.0);
  out.spec.cell_size = cell;
  out.spec.width = int(std::lround(2.0 * half_extent / cell));
  out.spec.height = out.spec.width;
  out.spec.check();

  GridSpec g3;
  g3.cell = cell;
  g3.min = Vec3(out.spec.origin.x() + cell / 2,
                out.spec.origin.y() + cell / 2, z_min);
  g3.nx = out.spec.width;
  g3.ny = out.spec.height;
  g3.nz = std::max(2, int(std::lround((z_max - z_min) / cell)) + 1);
  out.field = query_grid(params, enc, g3);
  out.t_model = enc.traversability;

  project_field_to_grids(out.field, out.spec, params.config.n_classes,
                         out.semantic, out.elevation);

  const Vec3 rp = frame.robot_pose.position;
  out.robot.x = int(std::floor((rp.x() - out.spec.origin.x()) / cell));
  out.robot.y = int(std::floor((rp.y() - out.spec.origin.y()) / cell));
  if (!out.spec.contains(out.robot.x, out.robot.y))
    throw InputError("robot pose falls outside the planning map");
  return out;
}

GridCell parse_cell(const std::string& text, const MapSpec& spec,
                    const char* what) {
  double x = 0, y = 0;
  if (std::sscanf(text.c_str(), "%lf,%lf", &x, &y) != 2)
    throw InputError(std::string(what) + " must be 'x,y' in meters");
  GridCell c{int(std::floor((x - spec.origin.x()) / spec.cell_size)),
             int(std::floor((y - spec.origin.y()) / spec.cell_size))};
  if (!spec.contains(c.x, c.y))
    throw InputError(std::string(what) + " lies outside the planning map");
  return c;
}

int run_plan(const std::string& config_path, const std::string& data_dir,
             const std::string& checkpoint, int frame_id,
             const std::string& start_text, const std::string& goal_text,
             const std::string& map_kind, const std::string& out_dir) {
  ConfigMap cm = load_config(config_path);
  const DatasetManifest manifest = read_dataset_manifest(data_dir);
  const double half =
      cm.get_double("plan.half_extent", manifest.scene_half_extent);
  const double cell = cm.get_double("plan.cell", 0.1);
  const double z_min = cm.get_double("plan.z_min", -0.3);
  const double z_max = cm.get_double("plan.z_max", 1.2);
  NavConfig nc;
  nc.k = cm.get_double("plan.k", nc.k);
  nc.tau = cm.get_double("plan.tau", nc.tau);
  nc.k_e = cm.get_double("plan.k_e", nc.k_e);
  nc.s0 = cm.get_double("plan.s0", nc.s0);
  nc.h_max = cm.get_double("plan.h_max", nc.h_max);
  nc.variance_m2 = cm.get_double("plan.variance", nc.variance_m2);
  nc.literal_product = cm.get_bool("plan.literal_product", nc.literal_product);
  nc.check();

  const ModelParams params = read_checkpoint(checkpoint);
  const Frame frame = read_frame(
      (fs::path(data_dir) / frame_file_name(frame_id)).string());
  const SemanticTable table = SemanticTable::default_table();

  const SweepResult sweep =
      sweep_frame(params, frame, half, cell, z_min, z_max);

  const Costmap full =
      full_costmap(sweep.semantic, table, sweep.spec, sweep.robot.x,
                   sweep.robot.y, sweep.t_model, nc);
  const Costmap sem_only = semantic_costmap(sweep.semantic, table, sweep.spec, nc);
  const Costmap elev_only = elevation_costmap(sweep.elevation, sweep.spec, nc);

  const Costmap* chosen = &full;
  if (map_kind == "semantic") chosen = &sem_only;
  else if (map_kind == "elevation") chosen = &elev_only;
  else if (map_kind != "full") throw InputError("unknown map kind " + map_kind);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const double hi = 1.0 + std::max(nc.k, nc.k_e);
  write_pgm((dir / "costmap_full.pgm").string(), full.cost, 1.0, hi);
  write_pgm((dir / "costmap_semantic.pgm").string(), sem_only.cost, 1.0, hi);
  write_pgm((dir / "costmap_elevation.pgm").string(), elev_only.cost, 1.0, hi);

  const GridCell start = parse_cell(start_text, sweep.spec, "start");
  const GridCell goal = parse_cell(goal_text, sweep.spec, "goal");
  std::optional<Path> path;
  std::string failure;
  try {
    path = a_star(*chosen, start, goal);
  } catch (const InputError& e) {
    failure = e.what();  // endpoint blocked on this particular map
  }

  std::string summary;
  summary += "map = " + map_kind + "\n";
  summary += "robot_cell = " + std::to_string(sweep.robot.x) + "," +
             std::to_string(sweep.robot.y) + "\n";
  summary += "t_model = " + std::to_string(sweep.t_model) + "\n";
  if (path) {
    summary += "found = 1\n";
    summary += "total_cost = " + std::to_string(path->total_cost) + "\n";
    summary += "n_cells = " + std::to_string(path->cells.size()) + "\n";

    std::vector<std::vector<double>> rows;
    double acc = 0.0;
    for (std::size_t i = 0; i < path->cells.size(); ++i) {
      if (i > 0) {
        const GridCell a = path->cells[i - 1], b = path->cells[i];
        const double len =
            (a.x != b.x && a.y != b.y) ? std::sqrt(2.0) : 1.0;
        acc += len * 0.5 *
               (chosen->cost(a.y, a.x) + chosen->cost(b.y, b.x));
      }
      rows.push_back(
          {double(path->cells[i].y), double(path->cells[i].x), acc});
    }
    write_csv((dir / "path.csv").string(), {"row", "col", "accumulated_cost"},
              rows);
  } else {
    summary += "found = 0\n";
    if (!failure.empty()) summary += "reason = " + failure + "\n";
  }
  write_text(dir / "plan.txt", summary);
  std::printf("%s", summary.c_str());
  echo_config(dir, cm, {"plan."});
  return 0;
}

// --------------------------------------------------------------- export ---

int run_export(const std::string& config_path, const std::string& data_dir,
               const std::string& checkpoint, int frame_id,
               const std::string& out_dir) {
  ConfigMap cm = load_config(config_path);
  const DatasetManifest manifest = read_dataset_manifest(data_dir);
  const double half =
      cm.get_double("export.half_extent", manifest.scene_half_extent);
  const double cell = cm.get_double("export.cell", 0.1);
  const double z_min = cm.get_double("export.z_min", -0.3);
  const double z_max = cm.get_double("export.z_max", 1.2);
  const double slice_z = cm.get_double("export.slice_z", 0.3);
  const double band = cm.get_double("export.surface_band", cell);

  const ModelParams params = read_checkpoint(checkpoint);
  const Frame frame = read_frame(
      (fs::path(data_dir) / frame_file_name(frame_id)).string());
  const SemanticTable table = SemanticTable::default_table();

  const SweepResult sweep =
      sweep_frame(params, frame, half, cell, z_min, z_max);
  const GridSpec& g3 = sweep.field.spec;

  std::vector<PlyPoint> cloud;
  for (int iz = 0; iz < g3.nz; ++iz)
    for (int iy = 0; iy < g3.ny; ++iy)
      for (int ix = 0; ix < g3.nx; ++ix) {
        const FieldPrediction& p = sweep.field.at(ix, iy, iz);
        if (std::abs(p.sdf) > band) continue;
        PlyPoint pt;
        pt.position = g3.point(ix, iy, iz);
        const Vec3 lab = denormalize_lab(
            Vec3(color_bin_center(p.color_argmax(0)),
                 color_bin_center(p.color_argmax(1)),
                 color_bin_center(p.color_argmax(2))));
        pt.rgb = lab_to_rgb(lab);
        cloud.push_back(pt);
      }

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_ply((dir / "field.ply").string(), cloud);

  int slice = int(std::lround((slice_z - g3.min.z()) / g3.cell));
  slice = std::clamp(slice, 0, g3.nz - 1);
  Eigen::MatrixXd sdf_img(g3.ny, g3.nx), conf_img(g3.ny, g3.nx);
  for (int iy = 0; iy < g3.ny; ++iy)
    for (int ix = 0; ix < g3.nx; ++ix) {
      const FieldPrediction& p = sweep.field.at(ix, iy, slice);
      sdf_img(iy, ix) = p.sdf;
      conf_img(iy, ix) = p.confidence;
    }
  write_pgm((dir / "sdf_slice.pgm").string(), sdf_img, -params.config.s_max,
            params.config.s_max);
  write_pgm((dir / "confidence_slice.pgm").string(), conf_img, 0.0, 1.0);

  NavConfig nc;
  const Eigen::MatrixXd weight = gaussian_weight(
      sweep.spec, sweep.robot.x, sweep.robot.y, nc.variance_m2);
  const Eigen::MatrixXd trav = pixel_traversability(
      semantic_mask(sweep.semantic, table), weight, sweep.t_model);
  write_pgm((dir / "traversability.pgm").string(), trav, 0.0, 1.0);

  echo_config(dir, cm, {"export."});
  std::fprintf(stderr, "export: %zu surface points, slice z index %d\n",
               cloud.size(), slice);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WildFusion synthetic multimodal mapping pipeline"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_dir, checkpoint;
  std::string start_text, goal_text, map_kind = "full";
  int frame_id = 0;
  bool oracle = false;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--config", config_path, "key=value config file");
  synth->add_option("--out", out_dir, "output dataset directory")->required();

  auto* label = app.add_subcommand("label", "Derive training labels");
  label->add_option("--config", config_path, "key=value config file");
  label->add_option("--data", data_dir, "dataset directory")->required();
  label->add_option("--out", out_dir, "label output directory (default: data)");

  auto* train = app.add_subcommand("train", "Fit the implicit field");
  train->add_option("--config", config_path, "key=value config file");
  train->add_option("--data", data_dir, "labeled dataset directory")->required();
  train->add_option("--out", out_dir, "run output directory")->required();

  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on the test splits");
  eval_cmd->add_option("--config", config_path, "key=value config file");
  eval_cmd->add_option("--data", data_dir, "labeled dataset directory")->required();
  eval_cmd->add_option("--checkpoint", checkpoint, "trained model file")->required();
  eval_cmd->add_option("--out", out_dir, "report output directory")->required();
  eval_cmd->add_flag("--oracle", oracle, "score the labels against themselves");

  auto* plan = app.add_subcommand("plan", "Build costmaps and run the planner");
  plan->add_option("--config", config_path, "key=value config file");
  plan->add_option("--data", data_dir, "dataset directory")->required();
  plan->add_option("--checkpoint", checkpoint, "trained model file")->required();
  plan->add_option("--frame", frame_id, "frame id to plan from")->required();
  plan->add_option("--start", start_text, "start 'x,y' in meters")->required();
  plan->add_option("--goal", goal_text, "goal 'x,y' in meters")->required();
  plan->add_option("--map", map_kind, "full | semantic | elevation");
  plan->add_option("--out", out_dir, "plan output directory")->required();

  auto* export_cmd = app.add_subcommand("export", "Export field grids as PLY/PGM");
  export_cmd->add_option("--config", config_path, "key=value config file");
  export_cmd->add_option("--data", data_dir, "dataset directory")->required();
  export_cmd->add_option("--checkpoint", checkpoint, "trained model file")->required();
  export_cmd->add_option("--frame", frame_id, "frame id to export")->required();
  export_cmd->add_option("--out", out_dir, "export output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (synth->parsed()) return run_synth(config_path, out_dir);
    if (label->parsed()) return run_label(config_path, data_dir, out_dir);
    if (train->parsed()) return run_train(config_path, data_dir, out_dir);
    if (eval_cmd->parsed())
      return run_eval(config_path, data_dir, checkpoint, out_dir, oracle);
    if (plan->parsed())
      return run_plan(config_path, data_dir, checkpoint, frame_id, start_text,
                      goal_text, map_kind, out_dir);
    if (export_cmd->parsed())
      return run_export(config_path, data_dir, checkpoint, frame_id, out_dir);
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
