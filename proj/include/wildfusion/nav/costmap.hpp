#pragma once

#include <Eigen/Dense>
#include <limits>

#include "wildfusion/core/types.hpp"
#include "wildfusion/field/evaluator.hpp"

namespace wf {

/// Planar planner grid. Cell (0,0) has its corner at `origin`; origin.z is
/// the ground reference for elevation. Grids index as (row=iy, col=ix).
struct MapSpec {
  Vec3 origin = Vec3::Zero();
  double cell_size = 0.1;
  int width = 1;
  int height = 1;

  Vec2 center(int ix, int iy) const {
    return Vec2(origin.x() + (ix + 0.5) * cell_size,
                origin.y() + (iy + 0.5) * cell_size);
  }
  bool contains(int ix, int iy) const {
    return ix >= 0 && ix < width && iy >= 0 && iy < height;
  }
  std::size_t index(int ix, int iy) const {
    return std::size_t(iy) * std::size_t(width) + std::size_t(ix);
  }
  void check() const {
    if (cell_size <= 0.0 || width < 1 || height < 1)
      throw ConfigError("map must have positive cell size and extent");
  }
};

inline constexpr double kImpassable = std::numeric_limits<double>::infinity();

enum class CostmapKind { full, semantic_only, elevation_only };

/// Finite entries are costs ≥ 1; kImpassable marks cells excluded from
/// search.
struct Costmap {
  MapSpec spec;
  Eigen::MatrixXd cost;  // (height x width)
  CostmapKind kind = CostmapKind::full;
};

struct NavConfig {
  double k = 10.0;          // cost slope on (1 - traversability)
  double tau = 0.1;         // below this traversability a cell is blocked
  double k_e = 20.0;        // elevation-baseline cost slope on excess gradient
  double s0 = 0.3;          // gradient allowance before cost grows
  double h_max = 0.25;      // step height that blocks the elevation baseline
  double variance_m2 = 6.0; // of the robot-centered Gaussian
  bool literal_product = false;  // W·t directly instead of the far-field blend

  void check() const {
    if (k < 0.0 || k_e < 0.0 || tau < 0.0 || tau > 1.0)
      throw ConfigError("cost slopes must be nonnegative, tau within [0,1]");
    if (variance_m2 <= 0.0 || h_max <= 0.0)
      throw ConfigError("variance and step limit must be positive");
  }
};

/// Per-cell base traversability of the class id; the NULL id maps to 0
/// (unknown ground is not walkable).
Eigen::MatrixXd semantic_mask(const Eigen::MatrixXi& ids,
                              const SemanticTable& table);

/// exp(-d² / (2·variance)) with d the metric distance between cell centers.
/// Exactly 1 at the robot cell.
Eigen::MatrixXd gaussian_weight(const MapSpec& spec, int robot_ix,
                                int robot_iy, double variance_m2);

/// Blends the model's scalar prediction into the semantic mask: near the
/// robot the prediction dominates, far away the mask stands alone.
/// T = sem ⊙ (1 + W·(t_model − 1)); the literal-product variant multiplies
/// W·t_model in directly.
Eigen::MatrixXd pixel_traversability(const Eigen::MatrixXd& sem_mask,
                                     const Eigen::MatrixXd& weight,
                                     double t_model,
                                     bool literal_product = false);

/// T < tau → impassable, otherwise cost = 1 + k·(1 − T).
Costmap costmap_from_traversability(const Eigen::MatrixXd& t,
                                    const MapSpec& spec, double k, double tau,
                                    CostmapKind kind = CostmapKind::full);

/// Geometry-only baseline: cost grows with the steepest gradient to an
/// 8-neighbor, and any step taller than h_max blocks the cell.
Costmap elevation_costmap(const Eigen::MatrixXd& elevation,
                          const MapSpec& spec, const NavConfig& config);

/// Category-only baseline: the semantic mask costed directly.
Costmap semantic_costmap(const Eigen::MatrixXi& ids, const SemanticTable& table,
                         const MapSpec& spec, const NavConfig& config);

/// The refined costmap of the full pipeline for a frame with prediction
/// t_model and the robot at (robot_ix, robot_iy).
Costmap full_costmap(const Eigen::MatrixXi& ids, const SemanticTable& table,
                     const MapSpec& spec, int robot_ix, int robot_iy,
                     double t_model, const NavConfig& config);

/// Collapses a volumetric field sweep into planner grids. The sweep must
/// sample one point per map cell center (nx = width, ny = height). Per
/// column: semantic = class at the highest sample with |sdf| ≤ cell_size,
/// NULL when none; elevation = highest sample z with sdf ≤ 0, ground
/// reference when the column is all exterior.
void project_field_to_grids(const FieldGridResult& field, const MapSpec& spec,
                            int null_id, Eigen::MatrixXi& semantic_out,
                            Eigen::MatrixXd& elevation_out);

}  // namespace wf
