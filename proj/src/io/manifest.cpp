#include "wildfusion/io/manifest.hpp"

#include <fstream>
#include <set>

#include "json.hpp"
#include "wildfusion/core/error.hpp"

namespace wf {

void DatasetManifest::check() const {
  std::set<int> seen;
  std::size_t total = 0;
  for (const auto* ids :
       {&train_ids, &val_ids, &test_seen_ids, &test_unseen_ids}) {
    total += ids->size();
    seen.insert(ids->begin(), ids->end());
  }
  if (seen.size() != total)
    throw FormatError("manifest splits overlap");
  if (static_cast<int>(total) != frame_count)
    throw FormatError("manifest splits do not cover all " +
                      std::to_string(frame_count) + " frames");
  for (int id : seen)
    if (id < 0 || id >= frame_count)
      throw FormatError("manifest split references frame " +
                        std::to_string(id) + " outside [0, " +
                        std::to_string(frame_count) + ")");
}

void write_manifest(const std::string& path, const DatasetManifest& m) {
  m.check();
  nlohmann::json j;
  j["version"] = m.version;
  j["scene_seed"] = m.scene_seed;
  j["config_digest"] = m.config_digest;
  j["frame_count"] = m.frame_count;
  j["splits"]["train"] = m.train_ids;
  j["splits"]["val"] = m.val_ids;
  j["splits"]["test_seen"] = m.test_seen_ids;
  j["splits"]["test_unseen"] = m.test_unseen_ids;
  j["audio_sample_rate"] = m.audio_sample_rate;
  j["accumulation_window"] = m.accumulation_window;
  j["scene_half_extent"] = m.scene_half_extent;

  std::ofstream out(path);
  if (!out) throw InputError("cannot write manifest: " + path);
  out << j.dump(2) << "\n";
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read manifest: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }

  DatasetManifest m;
  try {
    m.version = j.at("version").get<int>();
    m.scene_seed = j.at("scene_seed").get<std::uint64_t>();
    m.config_digest = j.at("config_digest").get<std::string>();
    m.frame_count = j.at("frame_count").get<int>();
    m.train_ids = j.at("splits").at("train").get<std::vector<int>>();
    m.val_ids = j.at("splits").at("val").get<std::vector<int>>();
    m.test_seen_ids = j.at("splits").at("test_seen").get<std::vector<int>>();
    m.test_unseen_ids =
        j.at("splits").at("test_unseen").get<std::vector<int>>();
    m.audio_sample_rate = j.at("audio_sample_rate").get<double>();
    m.accumulation_window = j.at("accumulation_window").get<double>();
    m.scene_half_extent = j.at("scene_half_extent").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  m.check();
  return m;
}

std::string config_digest(const std::string& resolved_config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : resolved_config) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string frame_file_name(int frame_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06d.wfrm", frame_id);
  return buf;
}

std::string label_file_name(int frame_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06d.wflb", frame_id);
  return buf;
}

}  // namespace wf
