#include "wildfusion/io/export.hpp"

#include <algorithm>
#include <fstream>

#include "wildfusion/core/error.hpp"

namespace wf {

void write_pgm(const std::string& path, const Eigen::MatrixXd& values,
               double lo, double hi) {
  if (values.size() == 0) throw InputError("empty image for " + path);
  if (!(hi > lo)) throw InputError("pgm range must satisfy lo < hi");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write image: " + path);
  out << "P5\n" << values.cols() << " " << values.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double v = std::clamp((values(r, c) - lo) / (hi - lo), 0.0, 1.0);
      out.put(static_cast<char>(std::lround(v * 255.0)));
    }
  }
  if (!out) throw InputError("write failed: " + path);
}

void write_ply(const std::string& path, const std::vector<PlyPoint>& points) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write ply: " + path);
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "end_header\n";
  out.precision(7);
  for (const PlyPoint& p : points)
    out << p.position.x() << " " << p.position.y() << " " << p.position.z()
        << " " << int(p.rgb[0]) << " " << int(p.rgb[1]) << " " << int(p.rgb[2])
        << "\n";
  if (!out) throw InputError("write failed: " + path);
}

void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write csv: " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  out.precision(10);
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw InputError(path + ": csv row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << "\n";
  }
  if (!out) throw InputError("write failed: " + path);
}

}  // namespace wf
