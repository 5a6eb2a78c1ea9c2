#pragma once

#include <cstdint>
#include <vector>

#include "wildfusion/core/rng.hpp"
#include "wildfusion/core/types.hpp"

namespace wf {

/// One sinusoidal component of the ground function. direction is the angle
/// of the wave vector in the xy plane.
struct HeightWave {
  double amplitude = 0.0;
  double wavelength = 1.0;
  double direction = 0.0;
  double phase = 0.0;
};

struct Heightfield {
  std::vector<HeightWave> waves;
  double base = 0.0;

  double height(double x, double y) const;
  Vec2 gradient(double x, double y) const;
  /// Upper bound on |∇h| over the whole plane: sum of per-wave maxima.
  double max_gradient() const;
};

enum class ShapeKind : std::uint8_t { sphere = 0, cylinder = 1, box = 2 };

/// Analytic solid. dims meaning per shape:
///   sphere:   dims.x = radius
///   cylinder: dims.x = radius, dims.y = half-height (axis along z)
///   box:      dims = half-extents
struct Primitive {
  ShapeKind kind = ShapeKind::sphere;
  Vec3 center = Vec3::Zero();
  Vec3 dims = Vec3::Ones();
  int semantic_id = 0;
  Vec3 color_lab = Vec3::Zero();

  double sdf(const Vec3& p) const;
};

/// Voronoi site assigning a terrain class to its cell of the ground plane.
struct TerrainSite {
  Vec2 position = Vec2::Zero();
  TerrainClass terrain = TerrainClass::concrete;
};

struct Scene {
  Heightfield ground;
  std::vector<Primitive> primitives;
  std::vector<TerrainSite> terrain_sites;
  double half_extent = 8.0;
  std::uint64_t seed = 0;

  double height(double x, double y) const { return ground.height(x, y); }
  TerrainClass terrain_at(double x, double y) const;
};

/// Exact signed distance to the nearest scene surface (ground uses vertical
/// distance; slopes are bounded so the error stays small).
double scene_sdf(const Scene& scene, const Vec3& p);

/// Index of the closest component at p: -1 for ground, otherwise the
/// primitive index.
int nearest_component(const Scene& scene, const Vec3& p);

/// Surface attributes (semantic id + LAB color) of the component owning p.
struct SurfaceAttributes {
  int semantic_id = 0;
  Vec3 color_lab = Vec3::Zero();
};
SurfaceAttributes surface_attributes(const Scene& scene, const Vec3& p,
                                     const SemanticTable& table);

struct SceneConfig {
  double half_extent = 8.0;
  int n_height_waves = 3;
  double max_total_gradient = 0.3;
  double max_amplitude = 0.4;
  int n_spheres = 2;
  int n_cylinders = 6;
  int n_boxes = 2;
  int n_terrain_sites = 12;
};

/// Deterministic procedural scene. Cylinders become trunks, spheres and
/// boxes rocks; terrain classes are drawn per Voronoi site.
Scene generate_scene(std::uint64_t seed, const SceneConfig& config,
                     const SemanticTable& table);

/// Fixed regression scene: a corridor between impassable rock walls whose
/// only opening is blocked by tall, soft vegetation. An elevation-only
/// planner sees the vegetation as an obstacle; a semantics-aware one does
/// not.
Scene vegetation_corridor_scene(const SemanticTable& table);

}  // namespace wf
