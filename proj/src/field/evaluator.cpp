#include "wildfusion/field/evaluator.hpp"

#include "wildfusion/field/network.hpp"

namespace wf {

FrameEncoding encode_frame(const ModelParams& params, const FrameData& frame) {
  const ParamLayout layout(params.config);
  CNet<float> net(layout, params.theta.data());
  CloudCache<float> cc;
  AudioCache<float> ac;
  TravCache<float> tv;
  encode_cloud(params.config, net, frame.cloud_in, cc);
  encode_audio(params.config, net, frame.audio_in, ac);
  forward_trav(params.config, net, cc.cf, ac.af, tv);
  FrameEncoding enc;
  enc.cloud_feat = cc.cf;
  enc.audio_feat = ac.af;
  enc.traversability = double(tv.out);
  return enc;
}

namespace {

constexpr Eigen::Index kQueryChunk = 4096;

void marshal(const QueryCache<float>& qc, double traversability,
             std::vector<FieldPrediction>& out) {
  for (Eigen::Index j = 0; j < qc.sdf.cols(); ++j) {
    FieldPrediction p;
    p.sdf = double(qc.sdf(0, j));
    p.confidence = double(qc.conf(0, j));
    for (int ch = 0; ch < 3; ++ch)
      p.color_logits[std::size_t(ch)] =
          qc.col_logits[std::size_t(ch)].col(j).cast<double>();
    p.semantic_logits = qc.sem_logits.col(j).cast<double>();
    p.traversability = traversability;
    out.push_back(std::move(p));
  }
}

}  // namespace

std::vector<FieldPrediction> predict_points(const ModelParams& params,
                                            const FrameEncoding& enc,
                                            const Eigen::Matrix3Xd& queries) {
  const ParamLayout layout(params.config);
  CNet<float> net(layout, params.theta.data());
  std::vector<FieldPrediction> out;
  out.reserve(std::size_t(queries.cols()));
  for (Eigen::Index start = 0; start < queries.cols(); start += kQueryChunk) {
    const Eigen::Index n = std::min(kQueryChunk, queries.cols() - start);
    const MatX<float> chunk = queries.middleCols(start, n).cast<float>();
    QueryCache<float> qc;
    forward_queries(params.config, net, params.fourier_b, chunk,
                    enc.cloud_feat, enc.audio_feat, qc);
    marshal(qc, enc.traversability, out);
  }
  return out;
}

FieldPrediction predict_point(const ModelParams& params,
                              const FrameEncoding& enc, const Vec3& query) {
  Eigen::Matrix3Xd one(3, 1);
  one.col(0) = query;
  return predict_points(params, enc, one)[0];
}

Vec3 sdf_gradient(const ModelParams& params, const FrameEncoding& enc,
                  const Vec3& query) {
  const ParamLayout layout(params.config);
  CNet<float> net(layout, params.theta.data());
  MatX<float> q(3, 1);
  q.col(0) = query.cast<float>();
  QueryCache<float> qc;
  forward_queries(params.config, net, params.fourier_b, q, enc.cloud_feat,
                  enc.audio_feat, qc);
  const MatX<float> g =
      sdf_query_gradient(params.config, net, params.fourier_b, qc);
  return g.col(0).cast<double>();
}

FieldGridResult query_grid(const ModelParams& params, const FrameEncoding& enc,
                           const GridSpec& spec) {
  spec.check();
  Eigen::Matrix3Xd pts(3, Eigen::Index(spec.count()));
  for (int iz = 0; iz < spec.nz; ++iz)
    for (int iy = 0; iy < spec.ny; ++iy)
      for (int ix = 0; ix < spec.nx; ++ix)
        pts.col(Eigen::Index(spec.index(ix, iy, iz))) = spec.point(ix, iy, iz);

  FieldGridResult grid;
  grid.spec = spec;
  grid.traversability = enc.traversability;
  grid.cells = predict_points(params, enc, pts);
  return grid;
}

}  // namespace wf
