#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wf {

/// Dataset directory metadata. Split membership lives here, not in the
/// directory layout: seen-viewpoint test frames share the training scene
/// but use perturbed poses, unseen-scene frames come from fresh seeds, and
/// only the manifest can tell them apart.
struct DatasetManifest {
  int version = 1;
  std::uint64_t scene_seed = 0;
  std::string config_digest;
  int frame_count = 0;
  std::vector<int> train_ids;
  std::vector<int> val_ids;
  std::vector<int> test_seen_ids;
  std::vector<int> test_unseen_ids;
  double audio_sample_rate = 16384.0;
  double accumulation_window = 2.0;
  double scene_half_extent = 8.0;

  void check() const;
};

void write_manifest(const std::string& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::string& path);

/// FNV-1a digest of a config snapshot, hex-encoded.
std::string config_digest(const std::string& resolved_config);

/// Canonical frame/label file names within a dataset directory.
std::string frame_file_name(int frame_id);
std::string label_file_name(int frame_id);

}  // namespace wf
