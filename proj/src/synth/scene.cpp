#include "wildfusion/synth/scene.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "wildfusion/core/error.hpp"

namespace wf {

double Heightfield::height(double x, double y) const {
  double h = base;
  for (const auto& w : waves) {
    const double u =
        x * std::cos(w.direction) + y * std::sin(w.direction);
    h += w.amplitude *
         std::sin(2.0 * std::numbers::pi * u / w.wavelength + w.phase);
  }
  return h;
}

Vec2 Heightfield::gradient(double x, double y) const {
  Vec2 g = Vec2::Zero();
  for (const auto& w : waves) {
    const double cx = std::cos(w.direction), sy = std::sin(w.direction);
    const double u = x * cx + y * sy;
    const double k = 2.0 * std::numbers::pi / w.wavelength;
    const double d = w.amplitude * k * std::cos(k * u + w.phase);
    g.x() += d * cx;
    g.y() += d * sy;
  }
  return g;
}

double Heightfield::max_gradient() const {
  double g = 0.0;
  for (const auto& w : waves)
    g += std::abs(w.amplitude) * 2.0 * std::numbers::pi / w.wavelength;
  return g;
}

double Primitive::sdf(const Vec3& p) const {
  const Vec3 d = p - center;
  switch (kind) {
    case ShapeKind::sphere:
      return d.norm() - dims.x();
    case ShapeKind::cylinder: {
      const Vec2 q(d.head<2>().norm() - dims.x(), std::abs(d.z()) - dims.y());
      return std::min(q.maxCoeff(), 0.0) + q.cwiseMax(0.0).norm();
    }
    case ShapeKind::box: {
      const Vec3 q = d.cwiseAbs() - dims;
      return std::min(q.maxCoeff(), 0.0) + q.cwiseMax(0.0).norm();
    }
  }
  return std::numeric_limits<double>::infinity();
}

TerrainClass Scene::terrain_at(double x, double y) const {
  if (terrain_sites.empty()) return TerrainClass::concrete;
  double best = std::numeric_limits<double>::infinity();
  TerrainClass cls = TerrainClass::concrete;
  for (const auto& s : terrain_sites) {
    const double d2 = (Vec2(x, y) - s.position).squaredNorm();
    if (d2 < best) {
      best = d2;
      cls = s.terrain;
    }
  }
  return cls;
}

double scene_sdf(const Scene& scene, const Vec3& p) {
  double d = p.z() - scene.ground.height(p.x(), p.y());
  for (const auto& prim : scene.primitives) d = std::min(d, prim.sdf(p));
  return d;
}

int nearest_component(const Scene& scene, const Vec3& p) {
  double best = p.z() - scene.ground.height(p.x(), p.y());
  int idx = -1;
  for (int i = 0; i < static_cast<int>(scene.primitives.size()); ++i) {
    const double d = scene.primitives[static_cast<std::size_t>(i)].sdf(p);
    if (d < best) {
      best = d;
      idx = i;
    }
  }
  return idx;
}

SurfaceAttributes surface_attributes(const Scene& scene, const Vec3& p,
                                     const SemanticTable& table) {
  const int idx = nearest_component(scene, p);
  if (idx >= 0) {
    const Primitive& prim = scene.primitives[static_cast<std::size_t>(idx)];
    return {prim.semantic_id, prim.color_lab};
  }
  const int cls = static_cast<int>(scene.terrain_at(p.x(), p.y()));
  return {cls, table.at(cls).base_color_lab};
}

Scene generate_scene(std::uint64_t seed, const SceneConfig& config,
                     const SemanticTable& table) {
  if (config.half_extent <= 0.0)
    throw ConfigError("scene half_extent must be positive");
  if (config.n_terrain_sites < 1)
    throw ConfigError("scene needs at least one terrain site");

  Scene scene;
  scene.seed = seed;
  scene.half_extent = config.half_extent;
  Rng rng(Rng::derive(seed, 0x5ce11e));

  // Budget the slope bound across waves so the summed gradient stays under
  // max_total_gradient regardless of draws.
  if (config.n_height_waves > 0) {
    const double per_wave_gradient =
        config.max_total_gradient / config.n_height_waves;
    for (int i = 0; i < config.n_height_waves; ++i) {
      HeightWave w;
      w.wavelength = rng.uniform(4.0, 14.0);
      const double g = rng.uniform(0.4, 1.0) * per_wave_gradient;
      w.amplitude = std::min(
          config.max_amplitude,
          g * w.wavelength / (2.0 * std::numbers::pi));
      w.direction = rng.uniform(0.0, std::numbers::pi);
      w.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      scene.ground.waves.push_back(w);
    }
  }

  const double place = config.half_extent * 0.85;
  auto ground_at = [&](double x, double y) {
    return scene.ground.height(x, y);
  };

  for (int i = 0; i < config.n_spheres; ++i) {
    Primitive prim;
    prim.kind = ShapeKind::sphere;
    const double r = rng.uniform(0.35, 0.8);
    const double x = rng.uniform(-place, place), y = rng.uniform(-place, place);
    prim.center = {x, y, ground_at(x, y) + r * 0.6};
    prim.dims = {r, 0, 0};
    prim.semantic_id = kSemanticRock;
    prim.color_lab = table.at(kSemanticRock).base_color_lab;
    scene.primitives.push_back(prim);
  }
  for (int i = 0; i < config.n_cylinders; ++i) {
    Primitive prim;
    prim.kind = ShapeKind::cylinder;
    const double r = rng.uniform(0.15, 0.4);
    const double hh = rng.uniform(0.8, 1.8);
    const double x = rng.uniform(-place, place), y = rng.uniform(-place, place);
    prim.center = {x, y, ground_at(x, y) + hh * 0.9};
    prim.dims = {r, hh, 0};
    prim.semantic_id = kSemanticTrunk;
    prim.color_lab = table.at(kSemanticTrunk).base_color_lab;
    scene.primitives.push_back(prim);
  }
  for (int i = 0; i < config.n_boxes; ++i) {
    Primitive prim;
    prim.kind = ShapeKind::box;
    const Vec3 he(rng.uniform(0.3, 0.9), rng.uniform(0.3, 0.9),
                  rng.uniform(0.25, 0.7));
    const double x = rng.uniform(-place, place), y = rng.uniform(-place, place);
    prim.center = {x, y, ground_at(x, y) + he.z() * 0.7};
    prim.dims = he;
    prim.semantic_id = kSemanticRock;
    prim.color_lab = table.at(kSemanticRock).base_color_lab;
    scene.primitives.push_back(prim);
  }

  for (int i = 0; i < config.n_terrain_sites; ++i) {
    TerrainSite site;
    site.position = {rng.uniform(-config.half_extent, config.half_extent),
                     rng.uniform(-config.half_extent, config.half_extent)};
    site.terrain = static_cast<TerrainClass>(
        i < kTerrainClassCount ? i : rng.uniform_int(kTerrainClassCount));
    scene.terrain_sites.push_back(site);
  }
  return scene;
}

Scene vegetation_corridor_scene(const SemanticTable& table) {
  Scene scene;
  scene.seed = 0;
  scene.half_extent = 6.0;

  auto wall = [&](double cx, double cy, double hx, double hy) {
    Primitive w;
    w.kind = ShapeKind::box;
    w.center = {cx, cy, 0.6};
    w.dims = {hx, hy, 0.6};
    w.semantic_id = kSemanticRock;
    w.color_lab = table.at(kSemanticRock).base_color_lab;
    scene.primitives.push_back(w);
  };
  // Two wall segments across the scene at y=0 leave a 2 m corridor around
  // x=0; the corridor itself is filled with a dense hedge plus a few taller
  // stalks. The hedge overlaps both wall ends, so geometry alone sees an
  // unbroken barrier from edge to edge.
  wall(-3.6, 0.0, 2.6, 0.45);
  wall(3.6, 0.0, 2.6, 0.45);

  const Vec3 veg_lab =
      table.at(static_cast<int>(TerrainClass::vegetation)).base_color_lab;
  Primitive hedge;
  hedge.kind = ShapeKind::box;
  hedge.center = {0.0, 0.0, 0.45};
  hedge.dims = {1.15, 0.35, 0.45};
  hedge.semantic_id = static_cast<int>(TerrainClass::vegetation);
  hedge.color_lab = veg_lab;
  scene.primitives.push_back(hedge);

  for (int i = 0; i < 5; ++i) {
    Primitive stalk;
    stalk.kind = ShapeKind::cylinder;
    const double x = -0.6 + 0.3 * i;
    const double y = -0.2 + 0.15 * (i % 3);
    stalk.center = {x, y, 0.5};
    stalk.dims = {0.08, 0.5, 0};
    stalk.semantic_id = static_cast<int>(TerrainClass::vegetation);
    stalk.color_lab = veg_lab;
    scene.primitives.push_back(stalk);
  }

  scene.terrain_sites.push_back({{0.0, 0.0}, TerrainClass::vegetation});
  scene.terrain_sites.push_back({{0.0, -3.5}, TerrainClass::grass});
  scene.terrain_sites.push_back({{0.0, 3.5}, TerrainClass::grass});
  return scene;
}

}  // namespace wf
