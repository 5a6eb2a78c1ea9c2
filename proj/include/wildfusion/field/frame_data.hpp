#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wildfusion/core/types.hpp"
#include "wildfusion/field/config.hpp"
#include "wildfusion/label/labeling.hpp"

namespace wf {

/// Affine squash that keeps the log-mel range (silence floor log(1e-6) up to
/// loud contact) within roughly [-2, 2] for the audio CNN.
inline float normalize_log_mel(double v) {
  return static_cast<float>((v + 7.0) * 0.25);
}

/// A frame reduced to exactly what the network consumes.
struct FrameData {
  int frame_id = -1;
  Eigen::MatrixXf cloud_in;   // [6 x N]: centered unit-radius xyz, LAB in [0,1]
  Eigen::MatrixXf audio_in;   // [4 x n_mels*n_frames], normalized log-mel
  std::vector<QuerySample> samples;
  float traversability = 0.0f;
};

FrameData prepare_frame(const Frame& frame, const LabeledFrame& labels,
                        const ModelConfig& cfg);

}  // namespace wf
