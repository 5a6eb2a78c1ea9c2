#include "wildfusion/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "wildfusion/core/rng.hpp"

namespace wf {

std::vector<int> filter_valid(const std::vector<FieldPrediction>& predictions,
                              int null_id) {
  std::vector<int> kept;
  for (int i = 0; i < int(predictions.size()); ++i) {
    const FieldPrediction& p = predictions[std::size_t(i)];
    if (p.sdf <= 0.0 && p.semantic_argmax() != null_id) kept.push_back(i);
  }
  return kept;
}

std::optional<ColorMetrics> color_metrics(
    const std::vector<std::array<int, 3>>& pred,
    const std::vector<std::array<int, 3>>& gt, int n_bins) {
  if (pred.size() != gt.size())
    throw InputError("color metric lists differ in length");
  if (pred.empty() || n_bins < 1) return std::nullopt;

  auto center = [n_bins](int b) { return (b + 0.5) / n_bins; };
  double se = 0.0, ae = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    for (int ch = 0; ch < 3; ++ch) {
      const double d = center(pred[i][std::size_t(ch)]) -
                       center(gt[i][std::size_t(ch)]);
      se += d * d;
      ae += std::abs(d);
    }
  const double n = double(pred.size()) * 3.0;
  ColorMetrics m;
  m.mse = se / n;
  m.mae = ae / n;
  m.psnr = m.mse > 0.0 ? 10.0 * std::log10(1.0 / m.mse)
                       : std::numeric_limits<double>::infinity();
  return m;
}

namespace {

PointCloud as_cloud(const std::vector<Vec3>& pts) {
  PointCloud c;
  c.points.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) c.points[i].position = pts[i];
  return c;
}

// max and mean of nearest-neighbor distances from each point of `from` into
// `index`
void directed_distances(const std::vector<Vec3>& from,
                        const SurfaceIndex& index, double& max_d,
                        double& mean_d) {
  max_d = 0.0;
  double acc = 0.0;
  for (const Vec3& p : from) {
    const double d = index.nearest(p).distance;
    max_d = std::max(max_d, d);
    acc += d;
  }
  mean_d = acc / double(from.size());
}

}  // namespace

std::optional<GeometryMetrics> geometry_metrics(const std::vector<Vec3>& a,
                                                const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) return std::nullopt;
  const SurfaceIndex ia(as_cloud(a));
  const SurfaceIndex ib(as_cloud(b));
  double max_ab, mean_ab, max_ba, mean_ba;
  directed_distances(a, ib, max_ab, mean_ab);
  directed_distances(b, ia, max_ba, mean_ba);
  GeometryMetrics m;
  m.hausdorff = std::max(max_ab, max_ba);
  m.chamfer = 0.5 * (mean_ab + mean_ba);
  return m;
}

std::optional<SemanticMetrics> classification_metrics(
    const std::vector<int>& pred, const std::vector<int>& gt) {
  if (pred.size() != gt.size())
    throw InputError("classification lists differ in length");
  if (gt.empty()) return std::nullopt;

  struct Counts {
    double tp = 0, fp = 0, fn = 0;
  };
  std::map<int, Counts> by_class;
  int correct = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (pred[i] == gt[i]) {
      ++correct;
      by_class[gt[i]].tp += 1;
    } else {
      by_class[gt[i]].fn += 1;
      by_class[pred[i]].fp += 1;
    }
  }

  auto safe = [](double num, double den) { return den > 0 ? num / den : 0.0; };
  SemanticMetrics m;
  m.accuracy = double(correct) / double(gt.size());
  int n_present = 0;
  for (const auto& [cls, c] : by_class) {
    if (c.tp + c.fn == 0) continue;  // class never appears in gt
    ++n_present;
    const double p = safe(c.tp, c.tp + c.fp);
    const double r = safe(c.tp, c.tp + c.fn);
    m.precision += p;
    m.recall += r;
    m.f1 += safe(2 * p * r, p + r);
    m.iou += safe(c.tp, c.tp + c.fp + c.fn);
  }
  m.precision /= n_present;
  m.recall /= n_present;
  m.f1 /= n_present;
  m.iou /= n_present;
  return m;
}

std::optional<double> ece(const std::vector<double>& pred,
                          const std::vector<double>& gt, int n_bins) {
  if (pred.size() != gt.size())
    throw InputError("calibration lists differ in length");
  if (pred.empty() || n_bins < 1) return std::nullopt;

  std::vector<double> sum_p(std::size_t(n_bins), 0.0);
  std::vector<double> sum_g(std::size_t(n_bins), 0.0);
  std::vector<int> count(std::size_t(n_bins), 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    int b = int(pred[i] * n_bins);
    b = std::clamp(b, 0, n_bins - 1);
    sum_p[std::size_t(b)] += pred[i];
    sum_g[std::size_t(b)] += gt[i];
    ++count[std::size_t(b)];
  }
  double e = 0.0;
  for (int b = 0; b < n_bins; ++b) {
    const auto sb = std::size_t(b);
    if (count[sb] == 0) continue;
    const double w = double(count[sb]) / double(pred.size());
    e += w * std::abs(sum_p[sb] / count[sb] - sum_g[sb] / count[sb]);
  }
  return e;
}

namespace {

// Prediction that reproduces the label exactly: one-hot logits, gt scalars.
FieldPrediction oracle_prediction(const QuerySample& s, int n_classes,
                                  int n_bins) {
  FieldPrediction p;
  p.sdf = s.sdf;
  p.confidence = s.confidence;
  p.semantic_logits = Eigen::VectorXd::Zero(n_classes + 1);
  p.semantic_logits[s.semantic_id] = 1.0;
  for (int ch = 0; ch < 3; ++ch) {
    p.color_logits[std::size_t(ch)] = Eigen::VectorXd::Zero(n_bins);
    if (s.color_bins)
      p.color_logits[std::size_t(ch)][(*s.color_bins)[std::size_t(ch)]] = 1.0;
  }
  p.traversability = 1.0;
  return p;
}

}  // namespace

EvalReport evaluate_frame(const ModelParams& params, const FrameData& frame,
                          const EvalConfig& config) {
  const ModelConfig& mc = params.config;
  const int null_id = mc.n_classes;

  // fixed-size evaluation pool, subsampled without replacement
  std::vector<int> pool(frame.samples.size());
  std::iota(pool.begin(), pool.end(), 0);
  if (int(pool.size()) > config.max_points_per_frame) {
    Rng rng(Rng::derive(config.seed, std::uint64_t(frame.frame_id) + 1));
    for (int i = 0; i < config.max_points_per_frame; ++i) {
      const int j = i + rng.uniform_int(int(pool.size()) - i);
      std::swap(pool[std::size_t(i)], pool[std::size_t(j)]);
    }
    pool.resize(std::size_t(config.max_points_per_frame));
  }

  std::vector<FieldPrediction> preds;
  if (config.oracle) {
    preds.reserve(pool.size());
    for (int i : pool)
      preds.push_back(oracle_prediction(frame.samples[std::size_t(i)],
                                        mc.n_classes, mc.n_color_bins));
  } else {
    Eigen::Matrix3Xd queries(3, Eigen::Index(pool.size()));
    for (Eigen::Index j = 0; j < queries.cols(); ++j)
      queries.col(j) = frame.samples[std::size_t(pool[std::size_t(j)])].position;
    const FrameEncoding enc = encode_frame(params, frame);
    preds = predict_points(params, enc, queries);
  }

  const std::vector<int> kept = filter_valid(preds, null_id);

  EvalReport report;
  report.n_samples_used = int(kept.size());
  if (kept.empty()) return report;

  std::vector<std::array<int, 3>> col_pred, col_gt;
  std::vector<int> sem_pred, sem_gt;
  std::vector<double> conf_pred, conf_gt;
  std::vector<Vec3> kept_pos;
  for (int k : kept) {
    const QuerySample& s = frame.samples[std::size_t(pool[std::size_t(k)])];
    const FieldPrediction& p = preds[std::size_t(k)];
    sem_pred.push_back(p.semantic_argmax());
    sem_gt.push_back(s.semantic_id);
    conf_pred.push_back(p.confidence);
    conf_gt.push_back(s.confidence);
    kept_pos.push_back(s.position);
    if (s.color_bins) {
      col_pred.push_back({p.color_argmax(0), p.color_argmax(1),
                          p.color_argmax(2)});
      col_gt.push_back(*s.color_bins);
    }
  }

  std::vector<Vec3> gt_interior;
  for (const QuerySample& s : frame.samples)
    if (s.kind != SampleKind::free) gt_interior.push_back(s.position);

  report.color = color_metrics(col_pred, col_gt, mc.n_color_bins);
  report.geometry = geometry_metrics(kept_pos, gt_interior);
  report.semantic = classification_metrics(sem_pred, sem_gt);
  report.ece = ece(conf_pred, conf_gt, config.ece_bins);
  return report;
}

EvalReport aggregate_reports(const std::vector<EvalReport>& reports) {
  EvalReport out;
  double n_col = 0, n_sem = 0, n_ece = 0, n_geo = 0;
  ColorMetrics col{};
  SemanticMetrics sem{};
  GeometryMetrics geo{};
  double e = 0.0;
  for (const EvalReport& r : reports) {
    const double w = r.n_samples_used;
    out.n_samples_used += r.n_samples_used;
    if (r.color) {
      col.mse += w * r.color->mse;
      col.mae += w * r.color->mae;
      n_col += w;
    }
    if (r.semantic) {
      sem.accuracy += w * r.semantic->accuracy;
      sem.precision += w * r.semantic->precision;
      sem.recall += w * r.semantic->recall;
      sem.f1 += w * r.semantic->f1;
      sem.iou += w * r.semantic->iou;
      n_sem += w;
    }
    if (r.ece) {
      e += w * *r.ece;
      n_ece += w;
    }
    if (r.geometry) {
      geo.hausdorff += r.geometry->hausdorff;
      geo.chamfer += r.geometry->chamfer;
      n_geo += 1;
    }
  }
  if (n_col > 0) {
    col.mse /= n_col;
    col.mae /= n_col;
    col.psnr = col.mse > 0.0 ? 10.0 * std::log10(1.0 / col.mse)
                             : std::numeric_limits<double>::infinity();
    out.color = col;
  }
  if (n_sem > 0) {
    sem.accuracy /= n_sem;
    sem.precision /= n_sem;
    sem.recall /= n_sem;
    sem.f1 /= n_sem;
    sem.iou /= n_sem;
    out.semantic = sem;
  }
  if (n_ece > 0) out.ece = e / n_ece;
  if (n_geo > 0) {
    geo.hausdorff /= n_geo;
    geo.chamfer /= n_geo;
    out.geometry = geo;
  }
  return out;
}

EvalReport evaluate_frames(const ModelParams& params,
                           const std::vector<FrameData>& frames,
                           const EvalConfig& config) {
  std::vector<EvalReport> reports;
  reports.reserve(frames.size());
  for (const FrameData& f : frames)
    reports.push_back(evaluate_frame(params, f, config));
  return aggregate_reports(reports);
}

}  // namespace wf
