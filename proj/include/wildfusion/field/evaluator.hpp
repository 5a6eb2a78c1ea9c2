#pragma once

#include <vector>

#include "wildfusion/core/types.hpp"
#include "wildfusion/field/frame_data.hpp"
#include "wildfusion/field/params.hpp"

namespace wf {

/// Frame features computed once and reused for any number of queries.
struct FrameEncoding {
  Eigen::VectorXf cloud_feat;
  Eigen::VectorXf audio_feat;
  double traversability = 0.0;   // per-frame head output
};

FrameEncoding encode_frame(const ModelParams& params, const FrameData& frame);

FieldPrediction predict_point(const ModelParams& params,
                              const FrameEncoding& enc, const Vec3& query);

std::vector<FieldPrediction> predict_points(const ModelParams& params,
                                            const FrameEncoding& enc,
                                            const Eigen::Matrix3Xd& queries);

/// Analytic gradient of the sdf head with respect to the query position.
Vec3 sdf_gradient(const ModelParams& params, const FrameEncoding& enc,
                  const Vec3& query);

/// Regular grid of query points: point(i,j,k) = min + cell*(i,j,k).
/// nz == 1 gives a horizontal slice.
struct GridSpec {
  Vec3 min = Vec3::Zero();
  double cell = 0.1;
  int nx = 1, ny = 1, nz = 1;

  Vec3 point(int ix, int iy, int iz) const {
    return min + cell * Vec3(double(ix), double(iy), double(iz));
  }
  std::size_t index(int ix, int iy, int iz) const {
    return (std::size_t(iz) * std::size_t(ny) + std::size_t(iy)) *
               std::size_t(nx) +
           std::size_t(ix);
  }
  std::size_t count() const {
    return std::size_t(nx) * std::size_t(ny) * std::size_t(nz);
  }
  void check() const {
    if (nx < 1 || ny < 1 || nz < 1 || cell <= 0.0)
      throw ConfigError("grid must have positive extent and cell size");
  }
};

struct FieldGridResult {
  GridSpec spec;
  std::vector<FieldPrediction> cells;   // x fastest, then y, then z
  double traversability = 0.0;

  const FieldPrediction& at(int ix, int iy, int iz) const {
    return cells[spec.index(ix, iy, iz)];
  }
};

FieldGridResult query_grid(const ModelParams& params, const FrameEncoding& enc,
                           const GridSpec& spec);

}  // namespace wf
