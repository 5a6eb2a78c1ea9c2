#include "wildfusion/nav/costmap.hpp"

#include <algorithm>
#include <cmath>

namespace wf {

Eigen::MatrixXd semantic_mask(const Eigen::MatrixXi& ids,
                              const SemanticTable& table) {
  Eigen::MatrixXd mask(ids.rows(), ids.cols());
  for (Eigen::Index r = 0; r < ids.rows(); ++r)
    for (Eigen::Index c = 0; c < ids.cols(); ++c) {
      const int id = ids(r, c);
      if (!table.valid_or_null(id))
        throw InputError("semantic grid holds unknown id " +
                         std::to_string(id));
      mask(r, c) = table.is_null(id) ? 0.0 : table.at(id).base_traversability;
    }
  return mask;
}

Eigen::MatrixXd gaussian_weight(const MapSpec& spec, int robot_ix,
                                int robot_iy, double variance_m2) {
  spec.check();
  if (!spec.contains(robot_ix, robot_iy))
    throw InputError("robot cell outside the map");
  if (variance_m2 <= 0.0) throw ConfigError("variance must be positive");

  Eigen::MatrixXd w(spec.height, spec.width);
  const Vec2 robot = spec.center(robot_ix, robot_iy);
  for (int iy = 0; iy < spec.height; ++iy)
    for (int ix = 0; ix < spec.width; ++ix) {
      const double d2 = (spec.center(ix, iy) - robot).squaredNorm();
      w(iy, ix) = std::exp(-d2 / (2.0 * variance_m2));
    }
  return w;
}

Eigen::MatrixXd pixel_traversability(const Eigen::MatrixXd& sem_mask,
                                     const Eigen::MatrixXd& weight,
                                     double t_model, bool literal_product) {
  if (sem_mask.rows() != weight.rows() || sem_mask.cols() != weight.cols())
    throw InputError("semantic mask and weight grids differ in shape");
  if (t_model < 0.0 || t_model > 1.0)
    throw InputError("model traversability outside [0,1]");

  if (literal_product)
    return sem_mask.cwiseProduct(weight) * t_model;
  return sem_mask.cwiseProduct(
      (1.0 + weight.array() * (t_model - 1.0)).matrix());
}

Costmap costmap_from_traversability(const Eigen::MatrixXd& t,
                                    const MapSpec& spec, double k, double tau,
                                    CostmapKind kind) {
  spec.check();
  if (t.rows() != spec.height || t.cols() != spec.width)
    throw InputError("traversability grid does not match the map spec");

  Costmap map;
  map.spec = spec;
  map.kind = kind;
  map.cost.resize(spec.height, spec.width);
  for (int iy = 0; iy < spec.height; ++iy)
    for (int ix = 0; ix < spec.width; ++ix) {
      const double T = t(iy, ix);
      map.cost(iy, ix) = T < tau ? kImpassable : 1.0 + k * (1.0 - T);
    }
  return map;
}

Costmap elevation_costmap(const Eigen::MatrixXd& elevation,
                          const MapSpec& spec, const NavConfig& config) {
  spec.check();
  config.check();
  if (elevation.rows() != spec.height || elevation.cols() != spec.width)
    throw InputError("elevation grid does not match the map spec");

  Costmap map;
  map.spec = spec;
  map.kind = CostmapKind::elevation_only;
  map.cost.resize(spec.height, spec.width);
  for (int iy = 0; iy < spec.height; ++iy)
    for (int ix = 0; ix < spec.width; ++ix) {
      double max_step = 0.0;
      double max_slope = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || !spec.contains(ix + dx, iy + dy))
            continue;
          const double step =
              std::abs(elevation(iy + dy, ix + dx) - elevation(iy, ix));
          const double run = std::hypot(double(dx), double(dy)) *
                             spec.cell_size;
          max_step = std::max(max_step, step);
          max_slope = std::max(max_slope, step / run);
        }
      map.cost(iy, ix) =
          max_step > config.h_max
              ? kImpassable
              : 1.0 + config.k_e * std::max(0.0, max_slope - config.s0);
    }
  return map;
}

Costmap semantic_costmap(const Eigen::MatrixXi& ids, const SemanticTable& table,
                         const MapSpec& spec, const NavConfig& config) {
  config.check();
  Costmap map = costmap_from_traversability(semantic_mask(ids, table), spec,
                                            config.k, config.tau,
                                            CostmapKind::semantic_only);
  return map;
}

Costmap full_costmap(const Eigen::MatrixXi& ids, const SemanticTable& table,
                     const MapSpec& spec, int robot_ix, int robot_iy,
                     double t_model, const NavConfig& config) {
  config.check();
  const Eigen::MatrixXd w =
      gaussian_weight(spec, robot_ix, robot_iy, config.variance_m2);
  const Eigen::MatrixXd t = pixel_traversability(
      semantic_mask(ids, table), w, t_model, config.literal_product);
  return costmap_from_traversability(t, spec, config.k, config.tau,
                                     CostmapKind::full);
}

void project_field_to_grids(const FieldGridResult& field, const MapSpec& spec,
                            int null_id, Eigen::MatrixXi& semantic_out,
                            Eigen::MatrixXd& elevation_out) {
  spec.check();
  const GridSpec& g = field.spec;
  if (g.nx != spec.width || g.ny != spec.height)
    throw InputError("field sweep does not cover the map footprint");

  semantic_out.setConstant(spec.height, spec.width, null_id);
  elevation_out.setConstant(spec.height, spec.width, spec.origin.z());

  for (int iy = 0; iy < spec.height; ++iy)
    for (int ix = 0; ix < spec.width; ++ix) {
      // scan the column top-down; samples are ordered in +z
      bool have_surface = false;
      bool have_interior = false;
      for (int iz = g.nz - 1; iz >= 0; --iz) {
        const FieldPrediction& p = field.at(ix, iy, iz);
        if (!have_interior && p.sdf <= 0.0) {
          elevation_out(iy, ix) = g.point(ix, iy, iz).z();
          have_interior = true;
        }
        if (!have_surface && std::abs(p.sdf) <= spec.cell_size) {
          semantic_out(iy, ix) = p.semantic_argmax();
          have_surface = true;
        }
        if (have_surface && have_interior) break;
      }
    }
}

}  // namespace wf
