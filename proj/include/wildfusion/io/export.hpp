#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wildfusion/core/types.hpp"

namespace wf {

/// Binary 8-bit PGM (P5). Values are mapped linearly from [lo, hi] and
/// clamped; row 0 of the matrix is the top image row.
void write_pgm(const std::string& path, const Eigen::MatrixXd& values,
               double lo, double hi);

struct PlyPoint {
  Vec3 position = Vec3::Zero();
  std::array<std::uint8_t, 3> rgb = {255, 255, 255};
};

/// ASCII PLY point cloud with per-vertex color.
void write_ply(const std::string& path, const std::vector<PlyPoint>& points);

/// One CSV row per inner vector, first row is the header.
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace wf
