#include "wildfusion/field/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wildfusion/field/loss.hpp"

namespace wf {

namespace {

Batch<float> make_batch(const FrameData& fd, const ModelConfig& mc,
                        const std::vector<int>& idx) {
  Batch<float> b;
  const Eigen::Index Q = Eigen::Index(idx.size());
  b.queries.resize(3, Q);
  b.sdf_gt.resize(Q);
  b.conf_gt.resize(Q);
  b.sem_gt.resize(idx.size());
  b.color_gt.resize(idx.size());
  const float s_max = float(mc.s_max);
  for (Eigen::Index j = 0; j < Q; ++j) {
    const QuerySample& s = fd.samples[std::size_t(idx[std::size_t(j)])];
    b.queries.col(j) = s.position.cast<float>();
    b.sdf_gt[j] = std::clamp(float(s.sdf), -s_max, s_max);
    b.conf_gt[j] = float(s.confidence);
    b.sem_gt[std::size_t(j)] = s.semantic_id;
    b.color_gt[std::size_t(j)] =
        s.color_bins ? *s.color_bins : std::array<int, 3>{-1, -1, -1};
  }
  b.trav_gt = fd.traversability;
  return b;
}

std::vector<int> val_indices(std::size_t n, int budget) {
  // Fixed stride subsample; deterministic and spread across the ray order.
  std::vector<int> idx;
  const std::size_t stride =
      std::max<std::size_t>(1, n / std::size_t(std::max(budget, 1)));
  for (std::size_t i = 0; i < n && int(idx.size()) < budget; i += stride)
    idx.push_back(int(i));
  return idx;
}

void accumulate(LossBreakdown& sum, const LossBreakdown& x) {
  sum.total += x.total;
  sum.sdf += x.sdf;
  sum.eikonal += x.eikonal;
  sum.confidence += x.confidence;
  sum.semantics += x.semantics;
  sum.color += x.color;
  sum.traversability += x.traversability;
}

void scale(LossBreakdown& sum, double k) {
  sum.total *= k;
  sum.sdf *= k;
  sum.eikonal *= k;
  sum.confidence *= k;
  sum.semantics *= k;
  sum.color *= k;
  sum.traversability *= k;
}

}  // namespace

TrainResult train_field(const std::vector<FrameData>& train_frames,
                        const std::vector<FrameData>& val_frames,
                        const ModelConfig& mc, const TrainConfig& tc,
                        const std::function<void(const TrainLogEntry&)>& on_epoch) {
  mc.check();
  tc.check();
  if (train_frames.empty()) throw InputError("empty training split");
  for (const auto& f : train_frames)
    if (f.samples.empty())
      throw InputError("training frame " + std::to_string(f.frame_id) +
                       " has no labeled samples");

  ModelParams params = init_params(mc, tc.seed);
  const ParamLayout layout(mc);
  const Eigen::MatrixXf& B = params.fourier_b;

  Rng batch_rng(Rng::derive(tc.seed, 4));
  Rng shuffle_rng(Rng::derive(tc.seed, 5));
  Rng dropout_rng(Rng::derive(tc.seed, 3));

  Eigen::VectorXf m = Eigen::VectorXf::Zero(layout.total());
  Eigen::VectorXf v = Eigen::VectorXf::Zero(layout.total());
  Eigen::VectorXf grad(layout.total());
  const float b1 = float(tc.adam_beta1), b2 = float(tc.adam_beta2);
  const float eps = float(tc.adam_epsilon), lr = float(tc.learning_rate);

  TrainResult result;
  result.best_val = std::numeric_limits<double>::infinity();
  Eigen::VectorXf best_theta = params.theta;

  std::vector<int> order(train_frames.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);

  long t = 0;
  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = std::size_t(shuffle_rng.uniform_int(int(i)));
      std::swap(order[i - 1], order[j]);
    }

    LossBreakdown epoch_sum;
    for (int fi : order) {
      const FrameData& fd = train_frames[std::size_t(fi)];
      std::vector<int> idx(std::size_t(tc.batch_queries));
      for (auto& k : idx)
        k = batch_rng.uniform_int(int(fd.samples.size()));
      const Batch<float> batch = make_batch(fd, mc, idx);
      const LossBreakdown lb =
          field_step<float>(mc, tc, layout, params.theta, B, fd.cloud_in,
                            fd.audio_in, batch, &dropout_rng, &grad);
      if (!std::isfinite(lb.total))
        throw NumericError("training diverged: non-finite loss at epoch " +
                           std::to_string(epoch) + ", frame " +
                           std::to_string(fd.frame_id));
      accumulate(epoch_sum, lb);

      ++t;
      m = b1 * m + (1.0f - b1) * grad;
      v = (b2 * v.array() + (1.0f - b2) * grad.array().square()).matrix();
      const float c1 = 1.0f / (1.0f - std::pow(b1, float(t)));
      const float c2 = 1.0f / (1.0f - std::pow(b2, float(t)));
      params.theta.array() -=
          lr * (c1 * m.array()) / ((c2 * v.array()).sqrt() + eps);
    }
    scale(epoch_sum, 1.0 / double(order.size()));

    double val_total = epoch_sum.total;
    if (!val_frames.empty()) {
      double acc = 0.0;
      for (const auto& fd : val_frames) {
        const Batch<float> batch = make_batch(
            fd, mc, val_indices(fd.samples.size(), tc.val_queries_per_frame));
        const LossBreakdown lb =
            field_step<float>(mc, tc, layout, params.theta, B, fd.cloud_in,
                              fd.audio_in, batch, nullptr, nullptr);
        acc += lb.total;
      }
      val_total = acc / double(val_frames.size());
    }
    if (!std::isfinite(val_total))
      throw NumericError("training diverged: non-finite validation loss at "
                         "epoch " + std::to_string(epoch));

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.train_mean = epoch_sum;
    entry.val_total = val_total;
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);

    if (val_total < result.best_val) {
      result.best_val = val_total;
      result.best_epoch = epoch;
      best_theta = params.theta;
    }
  }

  params.theta = best_theta;
  result.params = std::move(params);
  return result;
}

}  // namespace wf
