#include "wildfusion/synth/sensors.hpp"

#include <cmath>
#include <numbers>

#include "wildfusion/core/error.hpp"

namespace wf {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGravity = 9.81;

// Vertical ground distance over-estimates true distance on slopes; with
// |∇h| ≤ 0.3 the true distance is at least 1/sqrt(1.09) ≈ 0.958 of it, so a
// 0.9 step relaxation keeps the march conservative.
constexpr double kTraceRelax = 0.9;
constexpr int kTraceMaxSteps = 128;
constexpr double kTraceTol = 1e-4;

struct AudioClassParams {
  double resonance_hz;
  double decay_s;
  double noise_gain;
  double impulse_gain;
  double tone_gain;
};

// Resonance frequencies are spread on the mel axis so class spectra stay
// disjoint even through their harmonics.
AudioClassParams audio_params(TerrainClass terrain) {
  switch (terrain) {
    case TerrainClass::concrete:
      return {2900.0, 0.020, 0.12, 0.9, 0.25};
    case TerrainClass::grass:
      return {520.0, 0.050, 0.15, 0.5, 0.25};
    case TerrainClass::gravel:
      return {1700.0, 0.080, 0.15, 0.8, 0.25};
    case TerrainClass::leaves:
      return {1150.0, 0.100, 0.14, 0.6, 0.25};
    case TerrainClass::vegetation:
      return {230.0, 0.120, 0.15, 0.45, 0.25};
    case TerrainClass::mud:
      return {95.0, 0.150, 0.12, 0.55, 0.25};
  }
  throw InputError("unknown terrain class");
}

}  // namespace

double terrain_roughness(TerrainClass terrain) {
  switch (terrain) {
    case TerrainClass::concrete:
      return 0.05;
    case TerrainClass::grass:
      return 0.15;
    case TerrainClass::gravel:
      return 0.30;
    case TerrainClass::leaves:
      return 0.45;
    case TerrainClass::vegetation:
      return 0.60;
    case TerrainClass::mud:
      return 0.80;
  }
  throw InputError("unknown terrain class");
}

double trace_ray(const Scene& scene, const Vec3& origin, const Vec3& dir,
                 double max_range) {
  double t = 0.0;
  double prev_t = 0.0;
  for (int step = 0; step < kTraceMaxSteps; ++step) {
    const double d = scene_sdf(scene, origin + t * dir);
    if (std::abs(d) < kTraceTol) return t;
    if (d < 0.0) {
      // Overshot through the surface: bisect between the last outside
      // sample and here.
      double lo = prev_t, hi = t;
      for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (scene_sdf(scene, origin + mid * dir) > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev_t = t;
    t += kTraceRelax * d;
    if (t > max_range) return -1.0;
  }
  return -1.0;
}

PointCloud simulate_lidar(const Scene& scene, const Pose& pose,
                          const LidarPattern& pattern,
                          const SemanticTable& table, Rng& rng) {
  PointCloud cloud;
  cloud.sensor_origin = pose.position;
  cloud.points.reserve(static_cast<std::size_t>(pattern.n_rays));

  // Incommensurate sweep rates: golden-ratio azimuth against an irrational
  // elevation cycle, so directions never repeat between scans.
  constexpr double kAzRate = 0.618033988749895;
  constexpr double kElRate = 0.414213562373095;

  for (int i = 0; i < pattern.n_rays; ++i) {
    double az, el;
    if (pattern.rosette) {
      az = 2.0 * kPi * std::fmod(kAzRate * i, 1.0) + pose.yaw;
      const double u = std::fmod(kElRate * i, 1.0);
      el = pattern.elevation_min +
           (pattern.elevation_max - pattern.elevation_min) * u;
    } else {
      az = rng.uniform(0.0, 2.0 * kPi);
      el = rng.uniform(pattern.elevation_min, pattern.elevation_max);
    }
    const Vec3 dir(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                   std::sin(el));

    const double t = trace_ray(scene, pose.position, dir, pattern.max_range);
    if (t < 0.0) continue;

    Vec3 hit = pose.position + t * dir;
    const SurfaceAttributes attr = surface_attributes(scene, hit, table);
    if (pattern.range_noise_sigma > 0.0) {
      // Clamped at 3σ so the off-surface error of any returned point is
      // bounded, not merely probable.
      const double s = pattern.range_noise_sigma;
      const double noise = std::clamp(rng.normal(0.0, s), -3.0 * s, 3.0 * s);
      hit += noise * dir;
    }

    cloud.points.push_back({hit, attr.color_lab, attr.semantic_id});
  }
  return cloud;
}

Eigen::VectorXf synth_audio(TerrainClass terrain, double duration_s,
                            double gait_rate_hz, std::uint64_t seed) {
  if (duration_s <= 0.0) throw InputError("audio duration must be positive");
  const AudioClassParams p = audio_params(terrain);
  const int n = static_cast<int>(std::llround(duration_s * kAudioSampleRate));
  Rng rng(Rng::derive(seed, 0xa0d10));

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);

  // Sustained resonance hum with two overtones: the surface "rings" at its
  // characteristic frequency while the robot is in contact.
  constexpr double kHarmonicGain[3] = {1.0, 0.5, 0.3};
  for (int h = 0; h < 3; ++h) {
    const double f = p.resonance_hz * (h + 1);
    if (f > 0.95 * kAudioSampleRate / 2.0) break;
    for (int i = 0; i < n; ++i)
      x[i] += p.tone_gain * kHarmonicGain[h] *
              std::sin(2.0 * kPi * f * i / kAudioSampleRate);
  }

  // Footstep impulse responses: decaying class resonance, truncated at 5τ.
  // Onsets follow the gait deterministically; only the strike gain varies.
  const int tail = static_cast<int>(5.0 * p.decay_s * kAudioSampleRate);
  const double step_period = kAudioSampleRate / gait_rate_hz;
  for (double onset = step_period * 0.25; onset < n; onset += step_period) {
    const int start = static_cast<int>(onset);
    const double gain = p.impulse_gain * rng.uniform(0.9, 1.0);
    for (int i = start; i < std::min(n, start + tail); ++i) {
      const double t = (i - start) / kAudioSampleRate;
      x[i] += gain * std::exp(-t / p.decay_s) *
              std::sin(2.0 * kPi * p.resonance_hz * t);
    }
  }

  // Microphone self-noise floor: a fixed realization shared by every
  // recording, so quiet bands sit on a stable reference level instead of
  // the log floor.
  {
    Rng floor_rng(0xf100d);
    for (int i = 0; i < n; ++i) x[i] += 0.03 * floor_rng.normal();
  }

  // Continuous contact noise through two cascaded resonators at the class
  // frequency (RBJ constant-peak bandpass, Q = 5), so the skirts fall off
  // fast enough to keep class spectra apart.
  {
    const double q = 5.0;
    const double w0 = 2.0 * kPi * p.resonance_hz / kAudioSampleRate;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    const double b0 = alpha / a0, b2 = -alpha / a0;
    const double a1 = -2.0 * std::cos(w0) / a0, a2 = (1.0 - alpha) / a0;
    double s1[2] = {0, 0}, s2[2] = {0, 0}, o1[2] = {0, 0}, o2[2] = {0, 0};
    for (int i = 0; i < n; ++i) {
      double v = rng.normal();
      for (int stage = 0; stage < 2; ++stage) {
        const double out = b0 * v + b2 * s2[stage] - a1 * o1[stage] -
                           a2 * o2[stage];
        s2[stage] = s1[stage];
        s1[stage] = v;
        o2[stage] = o1[stage];
        o1[stage] = out;
        v = out;
      }
      x[i] += p.noise_gain * v;
    }
  }

  // Fixed output gain plus a hard limiter; per-recording normalization
  // would shift every band with the loudest strike.
  x *= 0.5;
  x = x.cwiseMax(-1.0).cwiseMin(1.0);
  return x.cast<float>();
}

ImuSeries synth_imu(TerrainClass terrain, double duration_s,
                    std::uint64_t seed) {
  if (duration_s <= 0.0) throw InputError("imu duration must be positive");
  const double rough = terrain_roughness(terrain);
  const int n = static_cast<int>(std::llround(duration_s * kImuSampleRate));
  Rng rng(Rng::derive(seed, 0x1b0));

  ImuSeries s;
  s.t = Eigen::VectorXd::LinSpaced(n, 0.0, (n - 1) / kImuSampleRate);
  s.accel.resize(n, 3);
  const double sigma = 2.0 * rough;
  for (int i = 0; i < n; ++i) {
    s.accel(i, 0) = rng.normal(0.0, sigma);
    s.accel(i, 1) = rng.normal(0.0, sigma);
    s.accel(i, 2) = kGravity + rng.normal(0.0, sigma);
  }
  return s;
}

TactileSeries synth_tactile_raw(double roughness, double slope,
                                double duration_s, std::uint64_t seed) {
  if (duration_s <= 0.0)
    throw InputError("tactile duration must be positive");
  const int n = static_cast<int>(std::llround(duration_s * kTactileSampleRate));
  Rng rng(Rng::derive(seed, 0x7ac7));

  constexpr double kTotalWeight = 240.0;
  // Slope shifts load from front legs (0,1) to rear legs (2,3).
  const double shift = 0.12 * slope;

  TactileSeries s;
  s.t = Eigen::VectorXd::LinSpaced(n, 0.0, (n - 1) / kTactileSampleRate);
  s.force.resize(n, 4);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector4d f;
    for (int leg = 0; leg < 4; ++leg) {
      const double sign = leg < 2 ? -1.0 : 1.0;
      double frac = 0.25 + sign * shift;
      frac += roughness * 0.18 * rng.normal();
      f[leg] = std::max(0.0, frac);
    }
    const double sum = f.sum();
    if (sum > 0.0) f *= kTotalWeight / sum;
    s.force.row(i) = f;
  }
  return s;
}

TactileSeries synth_tactile(TerrainClass terrain, double slope,
                            double duration_s, std::uint64_t seed) {
  return synth_tactile_raw(terrain_roughness(terrain), slope, duration_s,
                           seed);
}

}  // namespace wf
