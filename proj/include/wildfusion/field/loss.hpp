#pragma once

#include <optional>

#include "wildfusion/field/network.hpp"

namespace wf {

/// One training batch: queries from a single frame plus that frame's inputs.
template <typename S>
struct Batch {
  MatX<S> queries;                           // [3 x Q]
  VecX<S> sdf_gt;                            // clamped to +-s_max by the caller
  VecX<S> conf_gt;
  std::vector<int> sem_gt;                   // NULL class = n_classes
  std::vector<std::array<int, 3>> color_gt;  // channel bins; {-1,-1,-1} = none
  S trav_gt = S(0);

  Eigen::Index size() const { return queries.cols(); }
};

template <typename S>
S huber(S r, S delta) {
  const S a = std::abs(r);
  return a <= delta ? S(0.5) * r * r : delta * (a - S(0.5) * delta);
}

template <typename S>
S huber_grad(S r, S delta) {
  return std::abs(r) <= delta ? r : (r > S(0) ? delta : -delta);
}

/// Column-wise softmax cross-entropy; returns per-column loss and writes
/// softmax probabilities over `logits` in place when `probs` is non-null.
template <typename S>
VecX<S> softmax_cross_entropy(const MatX<S>& logits,
                              const std::vector<int>& targets,
                              MatX<S>* probs) {
  const Eigen::Index Q = logits.cols();
  VecX<S> out(Q);
  if (probs) probs->resize(logits.rows(), Q);
  for (Eigen::Index j = 0; j < Q; ++j) {
    const S mx = logits.col(j).maxCoeff();
    VecX<S> e = (logits.col(j).array() - mx).exp();
    const S z = e.sum();
    out[j] = std::log(z) - (logits(targets[std::size_t(j)], j) - mx);
    if (probs) probs->col(j) = e / z;
  }
  return out;
}

/// Loss (and optionally the full parameter gradient) for one batch.
/// `grad_out`, when non-null, is resized to the layout and accumulated from
/// zero. `dropout_rng` non-null enables dropout on the color/semantic heads.
template <typename S>
LossBreakdown field_step(const ModelConfig& cfg, const TrainConfig& tc,
                         const ParamLayout& layout, const VecX<S>& theta,
                         const MatX<S>& fourier_b, const MatX<S>& cloud_in,
                         const MatX<S>& audio_in, const Batch<S>& batch,
                         Rng* dropout_rng, VecX<S>* grad_out) {
  if (batch.size() < 1) throw InputError("empty training batch");
  const Eigen::Index Q = batch.size();
  CNet<S> net(layout, theta.data());

  CloudCache<S> cc;
  AudioCache<S> ac;
  QueryCache<S> qc;
  TravCache<S> tv;
  encode_cloud(cfg, net, cloud_in, cc);
  encode_audio(cfg, net, audio_in, ac);
  forward_queries(cfg, net, fourier_b, batch.queries, cc.cf, ac.af, qc,
                  dropout_rng);
  forward_trav(cfg, net, cc.cf, ac.af, tv);

  LossBreakdown lb;
  HeadSeeds<S> seeds;
  const bool want_grad = grad_out != nullptr;
  const auto& en = tc.head_enable;
  const auto lam = tc.lambda;

  // SDF: Huber on the bounded head output.
  if (en[kLossSdf]) {
    const S delta = S(tc.huber_delta);
    S acc = S(0);
    if (want_grad) seeds.dsdf = MatX<S>::Zero(1, Q);
    for (Eigen::Index j = 0; j < Q; ++j) {
      const S r = qc.sdf(0, j) - batch.sdf_gt[j];
      acc += huber(r, delta);
      if (want_grad)
        seeds.dsdf(0, j) = S(lam[kLossSdf]) * huber_grad(r, delta) / S(Q);
    }
    lb.sdf = double(acc) / double(Q);
  }

  // Confidence: alpha where gt is exactly 1, beta elsewhere.
  if (en[kLossConfidence]) {
    S acc = S(0);
    if (want_grad) seeds.dconf = MatX<S>::Zero(1, Q);
    for (Eigen::Index j = 0; j < Q; ++j) {
      const S w = batch.conf_gt[j] == S(1) ? S(tc.alpha) : S(tc.beta);
      const S d = qc.conf(0, j) - batch.conf_gt[j];
      acc += w * d * d;
      if (want_grad)
        seeds.dconf(0, j) = S(lam[kLossConfidence]) * S(2) * w * d / S(Q);
    }
    lb.confidence = double(acc) / double(Q);
  }

  // Semantics: cross-entropy over classes plus NULL, every sample.
  if (en[kLossSemantics]) {
    MatX<S> probs;
    VecX<S> ce = softmax_cross_entropy(qc.sem_logits, batch.sem_gt,
                                       want_grad ? &probs : nullptr);
    lb.semantics = double(ce.sum()) / double(Q);
    if (want_grad) {
      seeds.dsem = probs;
      for (Eigen::Index j = 0; j < Q; ++j)
        seeds.dsem(batch.sem_gt[std::size_t(j)], j) -= S(1);
      seeds.dsem *= S(lam[kLossSemantics]) / S(Q);
    }
  }

  // Color: per-channel cross-entropy on samples that carry color.
  if (en[kLossColor]) {
    std::vector<Eigen::Index> valid;
    for (Eigen::Index j = 0; j < Q; ++j)
      if (batch.color_gt[std::size_t(j)][0] >= 0) valid.push_back(j);
    if (!valid.empty()) {
      const S invn = S(1) / S(valid.size());
      S acc = S(0);
      for (int ch = 0; ch < 3; ++ch) {
        if (want_grad)
          seeds.dcol[ch] = MatX<S>::Zero(cfg.n_color_bins, Q);
        for (Eigen::Index j : valid) {
          const int target = batch.color_gt[std::size_t(j)][std::size_t(ch)];
          const auto col = qc.col_logits[ch].col(j);
          const S mx = col.maxCoeff();
          VecX<S> e = (col.array() - mx).exp();
          const S z = e.sum();
          acc += std::log(z) - (col[target] - mx);
          if (want_grad) {
            seeds.dcol[ch].col(j) = e / z;
            seeds.dcol[ch](target, j) -= S(1);
            seeds.dcol[ch].col(j) *= S(lam[kLossColor]) * invn;
          }
        }
      }
      lb.color = double(acc) / double(valid.size());
    }
  }

  // Traversability: one squared error per frame.
  S dtrav = S(0);
  if (en[kLossTraversability]) {
    const S d = tv.out - batch.trav_gt;
    lb.traversability = double(d) * double(d);
    if (want_grad) dtrav = S(lam[kLossTraversability]) * S(2) * d;
  }

  // Eikonal: (|grad_q sdf| - 1)^2 averaged over the batch.
  MatX<S> V;
  RowX<S> dphi;
  if (en[kLossEikonal]) {
    MatX<S> g3 = sdf_query_gradient(cfg, net, fourier_b, qc);
    V = MatX<S>::Zero(3, Q);
    if (want_grad) dphi = RowX<S>::Constant(Q, S(lam[kLossEikonal]) / S(Q));
    S acc = S(0);
    for (Eigen::Index j = 0; j < Q; ++j) {
      const S n = g3.col(j).norm();
      const S d = n - S(1);
      acc += d * d;
      if (n > S(1e-12)) V.col(j) = (S(2) * d / n) * g3.col(j);
    }
    lb.eikonal = double(acc) / double(Q);
  }

  lb.total = lam[kLossSdf] * lb.sdf + lam[kLossEikonal] * lb.eikonal +
             lam[kLossConfidence] * lb.confidence +
             lam[kLossSemantics] * lb.semantics + lam[kLossColor] * lb.color +
             lam[kLossTraversability] * lb.traversability;

  if (want_grad) {
    grad_out->setZero(layout.total());
    Net<S> g(layout, grad_out->data());
    VecX<S> dcf = VecX<S>::Zero(cfg.pn_feat);
    VecX<S> daf = VecX<S>::Zero(cfg.audio_feat);
    backward_queries(cfg, net, qc, seeds, g, dcf, daf);
    if (en[kLossEikonal]) eikonal_backward(cfg, net, fourier_b, qc, V, dphi, g, dcf, daf);
    if (en[kLossTraversability]) backward_trav(cfg, net, tv, dtrav, g, dcf, daf);
    encode_cloud_backward(cfg, net, cc, dcf, g);
    encode_audio_backward(cfg, net, ac, daf, g);
  }
  return lb;
}

}  // namespace wf
