#include "wildfusion/core/validate.hpp"

#include <cmath>

namespace wf {

std::vector<std::string> validate_frame(const Frame& frame) {
  std::vector<std::string> v;
  auto bad = [&](const std::string& code) { v.push_back(code); };

  if (frame.cloud.points.empty()) bad("empty-cloud");
  for (const auto& p : frame.cloud.points) {
    if (!p.position.allFinite()) {
      bad("non-finite-point");
      break;
    }
  }
  for (const auto& p : frame.cloud.points) {
    const Vec3& c = p.color_lab;
    if (c.x() < 0.0 || c.x() > 100.0 || c.y() < -128.0 || c.y() > 127.0 ||
        c.z() < -128.0 || c.z() > 127.0) {
      bad("color-out-of-range");
      break;
    }
  }

  int present = 0;
  for (const auto& a : frame.audio)
    if (a.size() > 0) ++present;
  if (present != kNumLegs) bad("audio-channel-count");
  if (frame.audio_sample_rate <= 0.0) bad("audio-sample-rate");

  if (frame.imu.rows() == 0) bad("empty-imu");
  if (frame.imu.t.size() != frame.imu.rows()) bad("imu-timestamp-mismatch");
  if (frame.tactile.rows() == 0) bad("empty-tactile");
  if (frame.tactile.t.size() != frame.tactile.rows())
    bad("tactile-timestamp-mismatch");

  if (!(frame.accumulation_window > 0.0)) bad("accumulation-window");
  if (!frame.robot_pose.position.allFinite() ||
      !std::isfinite(frame.robot_pose.yaw))
    bad("non-finite-pose");

  return v;
}

std::vector<std::string> validate_sample(const QuerySample& s,
                                         const SemanticTable& table,
                                         double surface_epsilon) {
  std::vector<std::string> v;
  auto bad = [&](const std::string& code) { v.push_back(code); };

  if (!s.position.allFinite()) bad("non-finite-position");
  if (s.confidence < 0.0 || s.confidence > 1.0) bad("confidence-range");
  if (!table.valid_or_null(s.semantic_id)) bad("semantic-id-range");

  switch (s.kind) {
    case SampleKind::free:
      if (!(s.sdf > 0.0)) bad("free-sdf-sign");
      if (s.confidence != 1.0) bad("free-confidence");
      if (s.color_bins.has_value()) bad("free-color-not-null");
      if (!table.is_null(s.semantic_id)) bad("free-semantic-not-null");
      break;
    case SampleKind::negative:
      if (!(s.sdf < 0.0)) bad("negative-sdf-sign");
      if (!(s.confidence > 0.0)) bad("negative-confidence");
      break;
    case SampleKind::surface:
      if (std::abs(s.sdf) > surface_epsilon) bad("surface-sdf-magnitude");
      break;
  }
  if (s.color_bins) {
    for (int b : *s.color_bins)
      if (b < 0 || b >= 16) {
        bad("color-bin-range");
        break;
      }
  }
  return v;
}

}  // namespace wf
