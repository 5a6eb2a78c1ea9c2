#include "wildfusion/field/frame_data.hpp"

#include "wildfusion/audio/mel.hpp"
#include "wildfusion/core/color.hpp"

namespace wf {

FrameData prepare_frame(const Frame& frame, const LabeledFrame& labels,
                        const ModelConfig& cfg) {
  cfg.check();
  const auto& pts = frame.cloud.points;
  if (pts.empty()) throw InputError("cannot prepare a frame with no points");

  FrameData out;
  out.frame_id = frame.id;
  out.samples = labels.samples;
  out.traversability = static_cast<float>(labels.traversability);

  Vec3 centroid = Vec3::Zero();
  for (const auto& p : pts) centroid += p.position;
  centroid /= double(pts.size());
  double radius = 0.0;
  for (const auto& p : pts)
    radius = std::max(radius, (p.position - centroid).norm());
  const double inv_r = 1.0 / std::max(radius, 1e-9);

  out.cloud_in.resize(6, Eigen::Index(pts.size()));
  for (Eigen::Index j = 0; j < out.cloud_in.cols(); ++j) {
    const auto& p = pts[std::size_t(j)];
    out.cloud_in.col(j).head<3>() =
        ((p.position - centroid) * inv_r).cast<float>();
    out.cloud_in.col(j).tail<3>() = normalize_lab(p.color_lab).cast<float>();
  }

  MelConfig mc;
  mc.n_mels = cfg.n_mels;
  mc.sample_rate = frame.audio_sample_rate;
  mc.fmax = frame.audio_sample_rate / 2.0;
  const MelStack stack = frame_mel_stack(frame, mc);
  if (stack.n_frames() < cfg.n_audio_frames)
    throw InputError("audio too short: " + std::to_string(stack.n_frames()) +
                     " mel frames, need " + std::to_string(cfg.n_audio_frames));
  const int H = cfg.n_mels, W = cfg.n_audio_frames;
  out.audio_in.resize(4, H * W);
  for (int ch = 0; ch < 4; ++ch)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        out.audio_in(ch, y * W + x) =
            normalize_log_mel(stack.legs[std::size_t(ch)](y, x));
  return out;
}

}  // namespace wf
