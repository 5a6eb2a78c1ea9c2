#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <type_traits>
#include <vector>

#include "wildfusion/core/rng.hpp"
#include "wildfusion/field/config.hpp"
#include "wildfusion/field/params.hpp"

// Hand-written forward and reverse passes for the whole network, templated on
// the scalar so the gradient tests can run in f64 while training runs in f32.
// Gradients are exact; the Eikonal term differentiates through the query
// gradient itself (reverse over a forward tangent sweep), so every activation
// on that path must be twice differentiable. That is why the trunk and the
// sdf/confidence/traversability heads use tanh while only the color/semantic
// heads and the encoders use rectifiers.

namespace wf {

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using RowX = Eigen::Matrix<S, 1, Eigen::Dynamic>;

/// Named views into the flat parameter (or gradient) vector.
template <typename S, bool Const>
struct NetT {
  using MT = std::conditional_t<Const, const MatX<S>, MatX<S>>;
  using VT = std::conditional_t<Const, const VecX<S>, VecX<S>>;
  using MMap = Eigen::Map<MT>;
  using VMap = Eigen::Map<VT>;
  using Ptr = std::conditional_t<Const, const S*, S*>;

  MMap tin_w1; VMap tin_b1; MMap tin_w2; VMap tin_b2;
  MMap mlp1_w; VMap mlp1_b;
  MMap tft_w1; VMap tft_b1; MMap tft_w2; VMap tft_b2;
  MMap mlp2_w; VMap mlp2_b; MMap mlp3_w; VMap mlp3_b; MMap res_w;
  MMap au1_w; VMap au1_b; MMap au2_w; VMap au2_b; MMap au3_w; VMap au3_b;
  MMap afc_w; VMap afc_b;
  MMap tr1_w; VMap tr1_b; MMap tr2_w; VMap tr2_b;
  MMap sdf_w1; VMap sdf_b1; MMap sdf_w2; MMap sdf_skip; VMap sdf_b2;
  MMap conf_w1; VMap conf_b1; MMap conf_w2; MMap conf_skip; VMap conf_b2;
  std::array<MMap, 3> col_w1; std::array<VMap, 3> col_b1;
  std::array<MMap, 3> col_w2; std::array<VMap, 3> col_b2;
  MMap sem_w1; VMap sem_b1; MMap sem_w2; VMap sem_b2;
  MMap trav_w1; VMap trav_b1; MMap trav_w2; VMap trav_b2;

  NetT(const ParamLayout& L, Ptr base)
      : tin_w1(m(L, base, "cloud.tnet_in.w1")),
        tin_b1(v(L, base, "cloud.tnet_in.b1")),
        tin_w2(m(L, base, "cloud.tnet_in.w2")),
        tin_b2(v(L, base, "cloud.tnet_in.b2")),
        mlp1_w(m(L, base, "cloud.mlp1.w")),
        mlp1_b(v(L, base, "cloud.mlp1.b")),
        tft_w1(m(L, base, "cloud.tnet_feat.w1")),
        tft_b1(v(L, base, "cloud.tnet_feat.b1")),
        tft_w2(m(L, base, "cloud.tnet_feat.w2")),
        tft_b2(v(L, base, "cloud.tnet_feat.b2")),
        mlp2_w(m(L, base, "cloud.mlp2.w")),
        mlp2_b(v(L, base, "cloud.mlp2.b")),
        mlp3_w(m(L, base, "cloud.mlp3.w")),
        mlp3_b(v(L, base, "cloud.mlp3.b")),
        res_w(m(L, base, "cloud.res.w")),
        au1_w(m(L, base, "audio.conv1.w")),
        au1_b(v(L, base, "audio.conv1.b")),
        au2_w(m(L, base, "audio.conv2.w")),
        au2_b(v(L, base, "audio.conv2.b")),
        au3_w(m(L, base, "audio.conv3.w")),
        au3_b(v(L, base, "audio.conv3.b")),
        afc_w(m(L, base, "audio.fc.w")),
        afc_b(v(L, base, "audio.fc.b")),
        tr1_w(m(L, base, "trunk.l1.w")),
        tr1_b(v(L, base, "trunk.l1.b")),
        tr2_w(m(L, base, "trunk.l2.w")),
        tr2_b(v(L, base, "trunk.l2.b")),
        sdf_w1(m(L, base, "head.sdf.w1")),
        sdf_b1(v(L, base, "head.sdf.b1")),
        sdf_w2(m(L, base, "head.sdf.w2")),
        sdf_skip(m(L, base, "head.sdf.skip")),
        sdf_b2(v(L, base, "head.sdf.b2")),
        conf_w1(m(L, base, "head.conf.w1")),
        conf_b1(v(L, base, "head.conf.b1")),
        conf_w2(m(L, base, "head.conf.w2")),
        conf_skip(m(L, base, "head.conf.skip")),
        conf_b2(v(L, base, "head.conf.b2")),
        col_w1{{m(L, base, "head.color0.w1"), m(L, base, "head.color1.w1"),
                m(L, base, "head.color2.w1")}},
        col_b1{{v(L, base, "head.color0.b1"), v(L, base, "head.color1.b1"),
                v(L, base, "head.color2.b1")}},
        col_w2{{m(L, base, "head.color0.w2"), m(L, base, "head.color1.w2"),
                m(L, base, "head.color2.w2")}},
        col_b2{{v(L, base, "head.color0.b2"), v(L, base, "head.color1.b2"),
                v(L, base, "head.color2.b2")}},
        sem_w1(m(L, base, "head.sem.w1")),
        sem_b1(v(L, base, "head.sem.b1")),
        sem_w2(m(L, base, "head.sem.w2")),
        sem_b2(v(L, base, "head.sem.b2")),
        trav_w1(m(L, base, "head.trav.w1")),
        trav_b1(v(L, base, "head.trav.b1")),
        trav_w2(m(L, base, "head.trav.w2")),
        trav_b2(v(L, base, "head.trav.b2")) {}

 private:
  static MMap m(const ParamLayout& L, Ptr base, const char* name) {
    const TensorSpec& s = L.at(name);
    return MMap(base + s.offset, s.rows, s.cols);
  }
  static VMap v(const ParamLayout& L, Ptr base, const char* name) {
    const TensorSpec& s = L.at(name);
    return VMap(base + s.offset, s.rows);
  }
};

template <typename S>
using Net = NetT<S, false>;
template <typename S>
using CNet = NetT<S, true>;

// ---------------------------------------------------------------------------
// Small shared pieces

template <typename S>
MatX<S> relu(const MatX<S>& x) {
  return x.cwiseMax(S(0));
}

template <typename S>
MatX<S> relu_mask(const MatX<S>& pre) {
  return (pre.array() > S(0)).template cast<S>().matrix();
}

template <typename S>
void rowwise_max(const MatX<S>& x, VecX<S>& pool, std::vector<int>& arg) {
  pool.resize(x.rows());
  arg.resize(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Eigen::Index j = 0;
    pool[r] = x.row(r).maxCoeff(&j);
    arg[static_cast<std::size_t>(r)] = static_cast<int>(j);
  }
}

inline int conv_out(int n) { return (n - 1) / 2 + 1; }

/// 3x3 kernel, stride 2, zero padding 1. Feature maps are stored [C x H*W]
/// with spatial index s = y*W + x.
template <typename S>
MatX<S> im2col_3x3s2(const MatX<S>& in, int H, int W) {
  const int C = static_cast<int>(in.rows());
  const int Ho = conv_out(H), Wo = conv_out(W);
  MatX<S> out = MatX<S>::Zero(C * 9, Ho * Wo);
  for (int yo = 0; yo < Ho; ++yo)
    for (int xo = 0; xo < Wo; ++xo) {
      const int s = yo * Wo + xo;
      for (int ky = 0; ky < 3; ++ky) {
        const int yi = 2 * yo + ky - 1;
        if (yi < 0 || yi >= H) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int xi = 2 * xo + kx - 1;
          if (xi < 0 || xi >= W) continue;
          for (int c = 0; c < C; ++c)
            out(c * 9 + ky * 3 + kx, s) = in(c, yi * W + xi);
        }
      }
    }
  return out;
}

template <typename S>
MatX<S> col2im_3x3s2(const MatX<S>& dcol, int C, int H, int W) {
  const int Ho = conv_out(H), Wo = conv_out(W);
  MatX<S> din = MatX<S>::Zero(C, H * W);
  for (int yo = 0; yo < Ho; ++yo)
    for (int xo = 0; xo < Wo; ++xo) {
      const int s = yo * Wo + xo;
      for (int ky = 0; ky < 3; ++ky) {
        const int yi = 2 * yo + ky - 1;
        if (yi < 0 || yi >= H) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int xi = 2 * xo + kx - 1;
          if (xi < 0 || xi >= W) continue;
          for (int c = 0; c < C; ++c)
            din(c, yi * W + xi) += dcol(c * 9 + ky * 3 + kx, s);
        }
      }
    }
  return din;
}

// ---------------------------------------------------------------------------
// Query coordinate encoding

template <typename S>
MatX<S> fourier_encode(const MatX<S>& B, bool include_input,
                       const MatX<S>& q) {
  if (q.rows() != 3) throw InputError("queries must be 3 x N");
  const int m = static_cast<int>(B.rows());
  const int top = include_input ? 3 : 0;
  MatX<S> gamma(top + 2 * m, q.cols());
  if (include_input) gamma.topRows(3) = q;
  if (m > 0) {
    const S twopi = S(2) * S(EIGEN_PI);
    MatX<S> phase = twopi * (B * q);
    gamma.middleRows(top, m) = phase.array().sin().matrix();
    gamma.bottomRows(m) = phase.array().cos().matrix();
  }
  return gamma;
}

// ---------------------------------------------------------------------------
// Point cloud encoder

template <typename S>
struct CloudCache {
  MatX<S> in;                       // [6 x N], normalized by the caller
  MatX<S> tn1_pre; VecX<S> tn1_pool; std::vector<int> tn1_arg;
  MatX<S> Tin;                      // predicted 3x3 input transform
  MatX<S> p6;                       // xyz replaced by Tin * xyz
  MatX<S> h1_pre, h1;               // [pn_h1 x N]
  MatX<S> tn2_pre; VecX<S> tn2_pool; std::vector<int> tn2_arg;
  MatX<S> Tf;                       // [pn_h1 x pn_h1] feature transform
  MatX<S> h1t;                      // Tf * h1
  MatX<S> h2_pre, h2;               // [pn_h2 x N]
  MatX<S> h3_pre, h3;               // [pn_feat x N]
  std::vector<int> feat_arg;
  VecX<S> cf;                       // [pn_feat]
};

/// `tin_override` replaces the predicted input transform (used by the
/// rotation-equivariance test to inject an inverse rotation).
template <typename S>
void encode_cloud(const ModelConfig& cfg, const CNet<S>& net,
                  const MatX<S>& in, CloudCache<S>& c,
                  const MatX<S>* tin_override = nullptr) {
  if (in.rows() != 6 || in.cols() < 1)
    throw InputError("cloud encoder input must be 6 x N with N >= 1");
  c.in = in;
  const auto xyz = c.in.topRows(3);

  c.tn1_pre = (net.tin_w1 * xyz).colwise() + net.tin_b1;
  MatX<S> tn1_h = relu(c.tn1_pre);
  rowwise_max(tn1_h, c.tn1_pool, c.tn1_arg);
  if (tin_override) {
    if (tin_override->rows() != 3 || tin_override->cols() != 3)
      throw InputError("input transform override must be 3 x 3");
    c.Tin = *tin_override;
  } else {
    VecX<S> tvec = net.tin_w2 * c.tn1_pool + net.tin_b2;
    c.Tin = Eigen::Map<const MatX<S>>(tvec.data(), 3, 3);
  }

  c.p6.resize(6, c.in.cols());
  c.p6.topRows(3) = c.Tin * xyz;
  c.p6.bottomRows(3) = c.in.bottomRows(3);

  c.h1_pre = (net.mlp1_w * c.p6).colwise() + net.mlp1_b;
  c.h1 = relu(c.h1_pre);

  c.tn2_pre = (net.tft_w1 * c.h1).colwise() + net.tft_b1;
  MatX<S> tn2_h = relu(c.tn2_pre);
  rowwise_max(tn2_h, c.tn2_pool, c.tn2_arg);
  VecX<S> tmat = net.tft_w2 * c.tn2_pool + net.tft_b2;
  c.Tf = Eigen::Map<const MatX<S>>(tmat.data(), cfg.pn_h1, cfg.pn_h1);
  c.h1t = c.Tf * c.h1;

  c.h2_pre = (net.mlp2_w * c.h1t).colwise() + net.mlp2_b;
  c.h2 = relu(c.h2_pre);
  c.h3_pre = ((net.mlp3_w * c.h2).colwise() + net.mlp3_b) + net.res_w * c.h1t;
  c.h3 = relu(c.h3_pre);
  rowwise_max(c.h3, c.cf, c.feat_arg);
}

template <typename S>
void encode_cloud_backward(const ModelConfig& cfg, const CNet<S>& net,
                           const CloudCache<S>& c, const VecX<S>& dcf,
                           Net<S>& g, bool tin_overridden = false) {
  const Eigen::Index N = c.in.cols();
  const auto xyz = c.in.topRows(3);

  MatX<S> dh3 = MatX<S>::Zero(cfg.pn_feat, N);
  for (int r = 0; r < cfg.pn_feat; ++r) dh3(r, c.feat_arg[std::size_t(r)]) = dcf[r];
  MatX<S> dpre3 = dh3.cwiseProduct(relu_mask(c.h3_pre));
  g.mlp3_w += dpre3 * c.h2.transpose();
  g.mlp3_b += dpre3.rowwise().sum();
  g.res_w += dpre3 * c.h1t.transpose();

  MatX<S> dh2 = net.mlp3_w.transpose() * dpre3;
  MatX<S> dpre2 = dh2.cwiseProduct(relu_mask(c.h2_pre));
  g.mlp2_w += dpre2 * c.h1t.transpose();
  g.mlp2_b += dpre2.rowwise().sum();

  MatX<S> dh1t = net.res_w.transpose() * dpre3 + net.mlp2_w.transpose() * dpre2;
  MatX<S> dTf = dh1t * c.h1.transpose();
  MatX<S> dh1 = c.Tf.transpose() * dh1t;

  VecX<S> dtmat = Eigen::Map<const VecX<S>>(dTf.data(), dTf.size());
  g.tft_w2 += dtmat * c.tn2_pool.transpose();
  g.tft_b2 += dtmat;
  VecX<S> dpool2 = net.tft_w2.transpose() * dtmat;
  MatX<S> dtn2 = MatX<S>::Zero(cfg.pn_h1, N);
  for (int r = 0; r < cfg.pn_h1; ++r) dtn2(r, c.tn2_arg[std::size_t(r)]) = dpool2[r];
  dtn2 = dtn2.cwiseProduct(relu_mask(c.tn2_pre));
  g.tft_w1 += dtn2 * c.h1.transpose();
  g.tft_b1 += dtn2.rowwise().sum();
  dh1 += net.tft_w1.transpose() * dtn2;

  MatX<S> dpre1 = dh1.cwiseProduct(relu_mask(c.h1_pre));
  g.mlp1_w += dpre1 * c.p6.transpose();
  g.mlp1_b += dpre1.rowwise().sum();

  if (!tin_overridden) {
    MatX<S> dp6_xyz = (net.mlp1_w.transpose() * dpre1).topRows(3);
    MatX<S> dTin = dp6_xyz * xyz.transpose();
    VecX<S> dtvec = Eigen::Map<const VecX<S>>(dTin.data(), 9);
    g.tin_w2 += dtvec * c.tn1_pool.transpose();
    g.tin_b2 += dtvec;
    VecX<S> dpool1 = net.tin_w2.transpose() * dtvec;
    MatX<S> dtn1 = MatX<S>::Zero(cfg.tnet_hidden, N);
    for (int r = 0; r < cfg.tnet_hidden; ++r)
      dtn1(r, c.tn1_arg[std::size_t(r)]) = dpool1[r];
    dtn1 = dtn1.cwiseProduct(relu_mask(c.tn1_pre));
    g.tin_w1 += dtn1 * xyz.transpose();
    g.tin_b1 += dtn1.rowwise().sum();
  }
}

// ---------------------------------------------------------------------------
// Audio encoder

template <typename S>
struct AudioCache {
  MatX<S> x0;                       // [4 x n_mels*n_frames]
  MatX<S> col1, y1_pre;
  MatX<S> col2, y2_pre;
  MatX<S> col3, y3_pre;
  VecX<S> gap;
  VecX<S> af;
};

template <typename S>
void encode_audio(const ModelConfig& cfg, const CNet<S>& net,
                  const MatX<S>& x0, AudioCache<S>& c) {
  if (x0.rows() != 4 ||
      x0.cols() != Eigen::Index(cfg.n_mels) * cfg.n_audio_frames)
    throw InputError("audio encoder input must be 4 x (n_mels*n_frames)");
  c.x0 = x0;
  const int H0 = cfg.n_mels, W0 = cfg.n_audio_frames;
  const int H1 = conv_out(H0), W1 = conv_out(W0);
  const int H2 = conv_out(H1), W2 = conv_out(W1);

  c.col1 = im2col_3x3s2(c.x0, H0, W0);
  c.y1_pre = (net.au1_w * c.col1).colwise() + net.au1_b;
  c.col2 = im2col_3x3s2(MatX<S>(relu(c.y1_pre)), H1, W1);
  c.y2_pre = (net.au2_w * c.col2).colwise() + net.au2_b;
  c.col3 = im2col_3x3s2(MatX<S>(relu(c.y2_pre)), H2, W2);
  c.y3_pre = (net.au3_w * c.col3).colwise() + net.au3_b;
  c.gap = relu(c.y3_pre).rowwise().mean();
  c.af = net.afc_w * c.gap + net.afc_b;
}

template <typename S>
void encode_audio_backward(const ModelConfig& cfg, const CNet<S>& net,
                           const AudioCache<S>& c, const VecX<S>& daf,
                           Net<S>& g) {
  const int H0 = cfg.n_mels, W0 = cfg.n_audio_frames;
  const int H1 = conv_out(H0), W1 = conv_out(W0);
  const int H2 = conv_out(H1), W2 = conv_out(W1);

  g.afc_w += daf * c.gap.transpose();
  g.afc_b += daf;
  VecX<S> dgap = net.afc_w.transpose() * daf;

  const S inv3 = S(1) / S(c.y3_pre.cols());
  MatX<S> dpre3 =
      ((dgap * inv3) * RowX<S>::Ones(c.y3_pre.cols()))
          .cwiseProduct(relu_mask(c.y3_pre));
  g.au3_w += dpre3 * c.col3.transpose();
  g.au3_b += dpre3.rowwise().sum();

  MatX<S> dy2 = col2im_3x3s2(MatX<S>(net.au3_w.transpose() * dpre3),
                             cfg.audio_c2, H2, W2);
  MatX<S> dpre2 = dy2.cwiseProduct(relu_mask(c.y2_pre));
  g.au2_w += dpre2 * c.col2.transpose();
  g.au2_b += dpre2.rowwise().sum();

  MatX<S> dy1 = col2im_3x3s2(MatX<S>(net.au2_w.transpose() * dpre2),
                             cfg.audio_c1, H1, W1);
  MatX<S> dpre1 = dy1.cwiseProduct(relu_mask(c.y1_pre));
  g.au1_w += dpre1 * c.col1.transpose();
  g.au1_b += dpre1.rowwise().sum();
}

// ---------------------------------------------------------------------------
// Trunk and heads over a batch of queries (one frame's features)

template <typename S>
struct QueryCache {
  MatX<S> queries;                  // [3 x Q]
  MatX<S> gamma;                    // [query_dim x Q]
  MatX<S> X;                        // [trunk_in x Q]
  MatX<S> H1, U, H2;                // [trunk_width x Q], tanh values
  MatX<S> A_s, r_s, sdf;            // sdf head: tanh hidden, raw, s_max*tanh
  MatX<S> A_c, r_c, conf;           // confidence head, sigmoid output
  std::array<MatX<S>, 3> colh_pre, colh, col_logits, col_mask;
  MatX<S> semh_pre, semh, sem_logits, sem_mask;
};

template <typename S>
struct TravCache {
  VecX<S> in;                       // [pn_feat + audio_feat]
  VecX<S> h_pre, h;
  S raw = S(0);
  S out = S(0);
};

template <typename S>
MatX<S> sigmoid(const MatX<S>& x) {
  // Branchless stable form: sigma(x) = e^{-softplus(-x)} would cost more;
  // the raw head outputs are small, so the direct formula is safe here.
  return (S(1) / (S(1) + (-x.array()).exp())).matrix();
}

template <typename S>
MatX<S> dropout_mask(Eigen::Index rows, Eigen::Index cols, double p,
                     Rng& rng) {
  MatX<S> mask(rows, cols);
  const S keep_scale = S(1.0 / (1.0 - p));
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      mask(i, j) = rng.uniform() < p ? S(0) : keep_scale;
  return mask;
}

/// Forward through trunk and all query-dependent heads. `dropout_rng`
/// non-null enables dropout (training); mask draw order is color0, color1,
/// color2, semantic.
template <typename S>
void forward_queries(const ModelConfig& cfg, const CNet<S>& net,
                     const MatX<S>& fourier_b, const MatX<S>& queries,
                     const VecX<S>& cf, const VecX<S>& af, QueryCache<S>& c,
                     Rng* dropout_rng = nullptr) {
  const Eigen::Index Q = queries.cols();
  c.queries = queries;
  c.gamma = fourier_encode<S>(fourier_b, cfg.fourier_include_input, queries);
  c.X.resize(cfg.trunk_in(), Q);
  c.X.topRows(cfg.query_dim()) = c.gamma;
  c.X.middleRows(cfg.query_dim(), cfg.pn_feat) = cf.replicate(1, Q);
  c.X.bottomRows(cfg.audio_feat) = af.replicate(1, Q);

  c.H1 = (((net.tr1_w * c.X).colwise() + net.tr1_b).array().tanh()).matrix();
  c.U = (((net.tr2_w * c.H1).colwise() + net.tr2_b).array().tanh()).matrix();
  c.H2 = c.H1 + c.U;

  const S s_max = S(cfg.s_max);
  c.A_s = (((net.sdf_w1 * c.H2).colwise() + net.sdf_b1).array().tanh()).matrix();
  c.r_s = net.sdf_w2 * c.A_s + net.sdf_skip * c.H2;
  c.r_s.array() += net.sdf_b2[0];
  c.sdf = s_max * c.r_s.array().tanh().matrix();

  c.A_c = (((net.conf_w1 * c.H2).colwise() + net.conf_b1).array().tanh()).matrix();
  c.r_c = net.conf_w2 * c.A_c + net.conf_skip * c.H2;
  c.r_c.array() += net.conf_b2[0];
  c.conf = sigmoid(c.r_c);

  const bool drop = dropout_rng != nullptr && cfg.dropout > 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    c.colh_pre[ch] = (net.col_w1[ch] * c.H2).colwise() + net.col_b1[ch];
    c.colh[ch] = relu(c.colh_pre[ch]);
    if (drop) {
      c.col_mask[ch] = dropout_mask<S>(c.colh[ch].rows(), Q, cfg.dropout,
                                       *dropout_rng);
      c.colh[ch] = c.colh[ch].cwiseProduct(c.col_mask[ch]);
    } else {
      c.col_mask[ch].resize(0, 0);
    }
    c.col_logits[ch] = (net.col_w2[ch] * c.colh[ch]).colwise() + net.col_b2[ch];
  }
  c.semh_pre = (net.sem_w1 * c.H2).colwise() + net.sem_b1;
  c.semh = relu(c.semh_pre);
  if (drop) {
    c.sem_mask = dropout_mask<S>(c.semh.rows(), Q, cfg.dropout, *dropout_rng);
    c.semh = c.semh.cwiseProduct(c.sem_mask);
  } else {
    c.sem_mask.resize(0, 0);
  }
  c.sem_logits = (net.sem_w2 * c.semh).colwise() + net.sem_b2;
}

template <typename S>
void forward_trav(const ModelConfig& cfg, const CNet<S>& net,
                  const VecX<S>& cf, const VecX<S>& af, TravCache<S>& c) {
  c.in.resize(cfg.trav_in());
  c.in.head(cfg.pn_feat) = cf;
  c.in.tail(cfg.audio_feat) = af;
  c.h_pre = net.trav_w1 * c.in + net.trav_b1;
  c.h = c.h_pre.array().tanh().matrix();
  c.raw = (net.trav_w2 * c.h)(0, 0) + net.trav_b2[0];
  c.out = S(1) / (S(1) + std::exp(-c.raw));
}

/// Output-side gradient seeds; empty matrices mean "no gradient".
template <typename S>
struct HeadSeeds {
  MatX<S> dsdf, dconf;              // [1 x Q]
  std::array<MatX<S>, 3> dcol;      // [bins x Q]
  MatX<S> dsem;                     // [classes+1 x Q]
};

/// Reverse through heads and trunk, accumulating parameter gradients into
/// `g` and feature gradients into dcf/daf.
template <typename S>
void backward_queries(const ModelConfig& cfg, const CNet<S>& net,
                      const QueryCache<S>& c, const HeadSeeds<S>& seeds,
                      Net<S>& g, VecX<S>& dcf, VecX<S>& daf) {
  const Eigen::Index Q = c.X.cols();
  MatX<S> dH2 = MatX<S>::Zero(cfg.trunk_width, Q);
  const S s_max = S(cfg.s_max);

  if (seeds.dsdf.size() > 0) {
    MatX<S> ty = c.sdf / s_max;                       // tanh(r_s)
    MatX<S> dr = seeds.dsdf.cwiseProduct(
        (s_max * (S(1) - ty.array().square())).matrix());
    g.sdf_w2 += dr * c.A_s.transpose();
    g.sdf_skip += dr * c.H2.transpose();
    g.sdf_b2[0] += dr.sum();
    MatX<S> dA = net.sdf_w2.transpose() * dr;
    MatX<S> dZ = dA.cwiseProduct((S(1) - c.A_s.array().square()).matrix());
    g.sdf_w1 += dZ * c.H2.transpose();
    g.sdf_b1 += dZ.rowwise().sum();
    dH2 += net.sdf_skip.transpose() * dr + net.sdf_w1.transpose() * dZ;
  }
  if (seeds.dconf.size() > 0) {
    MatX<S> dr = seeds.dconf.cwiseProduct(
        c.conf.cwiseProduct((S(1) - c.conf.array()).matrix()));
    g.conf_w2 += dr * c.A_c.transpose();
    g.conf_skip += dr * c.H2.transpose();
    g.conf_b2[0] += dr.sum();
    MatX<S> dA = net.conf_w2.transpose() * dr;
    MatX<S> dZ = dA.cwiseProduct((S(1) - c.A_c.array().square()).matrix());
    g.conf_w1 += dZ * c.H2.transpose();
    g.conf_b1 += dZ.rowwise().sum();
    dH2 += net.conf_skip.transpose() * dr + net.conf_w1.transpose() * dZ;
  }
  for (int ch = 0; ch < 3; ++ch) {
    if (seeds.dcol[ch].size() == 0) continue;
    const MatX<S>& dlog = seeds.dcol[ch];
    g.col_w2[ch] += dlog * c.colh[ch].transpose();
    g.col_b2[ch] += dlog.rowwise().sum();
    MatX<S> dh = net.col_w2[ch].transpose() * dlog;
    if (c.col_mask[ch].size() > 0) dh = dh.cwiseProduct(c.col_mask[ch]);
    MatX<S> dpre = dh.cwiseProduct(relu_mask(c.colh_pre[ch]));
    g.col_w1[ch] += dpre * c.H2.transpose();
    g.col_b1[ch] += dpre.rowwise().sum();
    dH2 += net.col_w1[ch].transpose() * dpre;
  }
  if (seeds.dsem.size() > 0) {
    g.sem_w2 += seeds.dsem * c.semh.transpose();
    g.sem_b2 += seeds.dsem.rowwise().sum();
    MatX<S> dh = net.sem_w2.transpose() * seeds.dsem;
    if (c.sem_mask.size() > 0) dh = dh.cwiseProduct(c.sem_mask);
    MatX<S> dpre = dh.cwiseProduct(relu_mask(c.semh_pre));
    g.sem_w1 += dpre * c.H2.transpose();
    g.sem_b1 += dpre.rowwise().sum();
    dH2 += net.sem_w1.transpose() * dpre;
  }

  // trunk: H2 = H1 + tanh(tr2_w H1 + b), H1 = tanh(tr1_w X + b)
  MatX<S> dZ2 = dH2.cwiseProduct((S(1) - c.U.array().square()).matrix());
  g.tr2_w += dZ2 * c.H1.transpose();
  g.tr2_b += dZ2.rowwise().sum();
  MatX<S> dH1 = dH2 + net.tr2_w.transpose() * dZ2;
  MatX<S> dZ1 = dH1.cwiseProduct((S(1) - c.H1.array().square()).matrix());
  g.tr1_w += dZ1 * c.X.transpose();
  g.tr1_b += dZ1.rowwise().sum();
  MatX<S> dX = net.tr1_w.transpose() * dZ1;
  dcf += dX.middleRows(cfg.query_dim(), cfg.pn_feat).rowwise().sum();
  daf += dX.bottomRows(cfg.audio_feat).rowwise().sum();
}

template <typename S>
void backward_trav(const ModelConfig& cfg, const CNet<S>& net,
                   const TravCache<S>& c, S dout, Net<S>& g, VecX<S>& dcf,
                   VecX<S>& daf) {
  const S draw = dout * c.out * (S(1) - c.out);
  g.trav_w2 += draw * c.h.transpose();
  g.trav_b2[0] += draw;
  VecX<S> dh = net.trav_w2.transpose() * draw;
  VecX<S> dpre = dh.cwiseProduct((S(1) - c.h.array().square()).matrix());
  g.trav_w1 += dpre * c.in.transpose();
  g.trav_b1 += dpre;
  VecX<S> din = net.trav_w1.transpose() * dpre;
  dcf += din.head(cfg.pn_feat);
  daf += din.tail(cfg.audio_feat);
}

// ---------------------------------------------------------------------------
// Query gradient of the sdf head and the Eikonal double-backprop

/// Exact d sdf / d query for every column of the cached batch, [3 x Q].
template <typename S>
MatX<S> sdf_query_gradient(const ModelConfig& cfg, const CNet<S>& net,
                           const MatX<S>& fourier_b, const QueryCache<S>& c) {
  const Eigen::Index Q = c.X.cols();
  const S s_max = S(cfg.s_max);
  MatX<S> ty = c.sdf / s_max;
  MatX<S> dr = (s_max * (S(1) - ty.array().square())).matrix();  // [1 x Q]
  MatX<S> dA = net.sdf_w2.transpose() * dr;
  MatX<S> dH2 = net.sdf_skip.transpose() * dr +
                net.sdf_w1.transpose() * MatX<S>(dA.cwiseProduct(
                    (S(1) - c.A_s.array().square()).matrix()));
  MatX<S> dZ2 = dH2.cwiseProduct((S(1) - c.U.array().square()).matrix());
  MatX<S> dH1 = dH2 + net.tr2_w.transpose() * dZ2;
  MatX<S> dZ1 = dH1.cwiseProduct((S(1) - c.H1.array().square()).matrix());
  MatX<S> dgamma =
      (net.tr1_w.leftCols(cfg.query_dim())).transpose() * dZ1;

  const int m = static_cast<int>(fourier_b.rows());
  const int top = cfg.fourier_include_input ? 3 : 0;
  MatX<S> dq = MatX<S>::Zero(3, Q);
  if (cfg.fourier_include_input) dq = dgamma.topRows(3);
  if (m > 0) {
    const S twopi = S(2) * S(EIGEN_PI);
    // gamma caches sin and cos of the phase directly.
    const auto sinb = c.gamma.middleRows(top, m);
    const auto cosb = c.gamma.bottomRows(m);
    dq += twopi * (fourier_b.transpose() *
                   MatX<S>(dgamma.middleRows(top, m).cwiseProduct(cosb)));
    dq -= twopi * (fourier_b.transpose() *
                   MatX<S>(dgamma.bottomRows(m).cwiseProduct(sinb)));
  }
  return dq;
}

/// Gradient of sum_i dphi_i * (v_i . grad_q sdf_i) with v held constant:
/// a forward tangent sweep along v followed by reverse mode over that sweep.
/// Accumulates into parameter gradients and the feature gradients.
template <typename S>
void eikonal_backward(const ModelConfig& cfg, const CNet<S>& net,
                      const MatX<S>& fourier_b, const QueryCache<S>& c,
                      const MatX<S>& V, const RowX<S>& dphi, Net<S>& g,
                      VecX<S>& dcf, VecX<S>& daf) {
  const Eigen::Index Q = c.X.cols();
  const int qd = cfg.query_dim();
  const S s_max = S(cfg.s_max);
  const S twopi = S(2) * S(EIGEN_PI);

  // Tangent sweep (dotted quantities), v constant per column.
  const int mrows = static_cast<int>(fourier_b.rows());
  const int top = cfg.fourier_include_input ? 3 : 0;
  MatX<S> gdot(qd, Q);
  {
    if (cfg.fourier_include_input) gdot.topRows(3) = V;
    if (mrows > 0) {
      // phase tangent 2*pi*B*V is shared by both blocks;
      // sin' = cos, cos' = -sin, and those values live in gamma.
      MatX<S> pdot = twopi * (fourier_b * V);
      gdot.middleRows(top, mrows) =
          pdot.cwiseProduct(c.gamma.bottomRows(mrows));
      gdot.bottomRows(mrows) =
          -pdot.cwiseProduct(c.gamma.middleRows(top, mrows));
    }
  }
  MatX<S> T1 = (S(1) - c.H1.array().square()).matrix();
  MatX<S> T2 = (S(1) - c.U.array().square()).matrix();
  MatX<S> Ta = (S(1) - c.A_s.array().square()).matrix();
  MatX<S> ty = c.sdf / s_max;
  MatX<S> Ty = (S(1) - ty.array().square()).matrix();

  MatX<S> Z1dot = net.tr1_w.leftCols(qd) * gdot;
  MatX<S> H1dot = T1.cwiseProduct(Z1dot);
  MatX<S> Z2dot = net.tr2_w * H1dot;
  MatX<S> Udot = T2.cwiseProduct(Z2dot);
  MatX<S> H2dot = H1dot + Udot;
  MatX<S> Zadot = net.sdf_w1 * H2dot;
  MatX<S> Adot = Ta.cwiseProduct(Zadot);
  MatX<S> rdot = net.sdf_w2 * Adot + net.sdf_skip * H2dot;  // [1 x Q]
  // phi = s_max * Ty(r) * rdot; reverse from dphi.

  MatX<S> drdot = (dphi.cwiseProduct((s_max * Ty.array()).matrix().row(0))).matrix();
  MatX<S> dr = (dphi.array() * (s_max * rdot.array().row(0)) *
                (S(-2) * ty.array().row(0) * Ty.array().row(0)))
                   .matrix();

  // rdot = sdf_w2 Adot + skip H2dot
  g.sdf_w2 += drdot * Adot.transpose();
  g.sdf_skip += drdot * H2dot.transpose();
  MatX<S> dAdot = net.sdf_w2.transpose() * drdot;
  MatX<S> dH2dot = net.sdf_skip.transpose() * drdot;

  // r = sdf_w2 A + skip H2 + b
  g.sdf_w2 += dr * c.A_s.transpose();
  g.sdf_skip += dr * c.H2.transpose();
  g.sdf_b2[0] += dr.sum();
  MatX<S> dA = net.sdf_w2.transpose() * dr;
  MatX<S> dH2 = net.sdf_skip.transpose() * dr;

  // Adot = Ta . Zadot ; Ta = 1 - A^2
  MatX<S> dZadot = dAdot.cwiseProduct(Ta);
  dA += dAdot.cwiseProduct(Zadot).cwiseProduct((S(-2) * c.A_s.array()).matrix());

  // Zadot = sdf_w1 H2dot
  g.sdf_w1 += dZadot * H2dot.transpose();
  dH2dot += net.sdf_w1.transpose() * dZadot;

  // A = tanh(sdf_w1 H2 + b1)
  MatX<S> dZa = dA.cwiseProduct(Ta);
  g.sdf_w1 += dZa * c.H2.transpose();
  g.sdf_b1 += dZa.rowwise().sum();
  dH2 += net.sdf_w1.transpose() * dZa;

  // H2dot = H1dot + Udot
  MatX<S> dH1dot = dH2dot;
  MatX<S>& dUdot = dH2dot;  // same seed, aliasing is safe below

  // Udot = T2 . Z2dot ; T2 = 1 - U^2
  MatX<S> dZ2dot = dUdot.cwiseProduct(T2);
  MatX<S> dU = dUdot.cwiseProduct(Z2dot).cwiseProduct((S(-2) * c.U.array()).matrix());

  // Z2dot = tr2_w H1dot
  g.tr2_w += dZ2dot * H1dot.transpose();
  dH1dot += net.tr2_w.transpose() * dZ2dot;

  // H2 = H1 + U
  MatX<S> dH1 = dH2;
  dU += dH2;

  // U = tanh(tr2_w H1 + b2)
  MatX<S> dZ2 = dU.cwiseProduct(T2);
  g.tr2_w += dZ2 * c.H1.transpose();
  g.tr2_b += dZ2.rowwise().sum();
  dH1 += net.tr2_w.transpose() * dZ2;

  // H1dot = T1 . Z1dot ; T1 = 1 - H1^2
  MatX<S> dZ1dot = dH1dot.cwiseProduct(T1);
  dH1 += dH1dot.cwiseProduct(Z1dot).cwiseProduct((S(-2) * c.H1.array()).matrix());

  // Z1dot = tr1_w[:, :qd] gdot; gdot is parameter-free
  g.tr1_w.leftCols(qd) += dZ1dot * gdot.transpose();

  // H1 = tanh(tr1_w X + b1); X carries the frame features
  MatX<S> dZ1 = dH1.cwiseProduct(T1);
  g.tr1_w += dZ1 * c.X.transpose();
  g.tr1_b += dZ1.rowwise().sum();
  MatX<S> dX = net.tr1_w.transpose() * dZ1;
  dcf += dX.middleRows(qd, cfg.pn_feat).rowwise().sum();
  daf += dX.bottomRows(cfg.audio_feat).rowwise().sum();
}

}  // namespace wf
