#pragma once

#include <string>
#include <vector>

#include "wildfusion/core/types.hpp"
#include "wildfusion/label/labeling.hpp"

namespace wf {

/// Frame container format ("WFRM"): header, f32 point records, four audio
/// channels, timestamped IMU and tactile rows. All values f32
/// little-endian; doubles are quantized on write.
void write_frame(const std::string& path, const Frame& frame);
Frame read_frame(const std::string& path);

/// Label file ("WFLB"): per-sample records; NULL color bins are stored as
/// the u16 sentinel 0xFFFF. Samples are validated against the table on
/// read.
void write_labels(const std::string& path, const LabeledFrame& labels,
                  const SemanticTable& table);
LabeledFrame read_labels(const std::string& path, const SemanticTable& table);

}  // namespace wf
