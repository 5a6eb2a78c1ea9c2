#include "wildfusion/io/frame_io.hpp"

#include "wildfusion/core/validate.hpp"
#include "wildfusion/io/binary.hpp"

namespace wf {
namespace {

constexpr std::uint16_t kFrameVersion = 1;
constexpr std::uint16_t kLabelVersion = 1;
constexpr std::uint16_t kNullBin = 0xFFFF;
constexpr std::uint32_t kMaxCount = 200'000'000;

}  // namespace

void write_frame(const std::string& path, const Frame& frame) {
  BinaryWriter w(path);
  w.write_bytes("WFRM", 4);
  w.write<std::uint16_t>(kFrameVersion);
  w.write<std::uint32_t>(static_cast<std::uint32_t>(frame.id));
  w.write<float>(static_cast<float>(frame.accumulation_window));
  w.write<float>(static_cast<float>(frame.audio_sample_rate));
  for (int k = 0; k < 3; ++k)
    w.write<float>(static_cast<float>(frame.robot_pose.position[k]));
  w.write<float>(static_cast<float>(frame.robot_pose.yaw));
  for (int k = 0; k < 3; ++k)
    w.write<float>(static_cast<float>(frame.cloud.sensor_origin[k]));

  w.write<std::uint32_t>(static_cast<std::uint32_t>(frame.cloud.points.size()));
  for (const SurfacePoint& p : frame.cloud.points) {
    for (int k = 0; k < 3; ++k) w.write<float>(static_cast<float>(p.position[k]));
    for (int k = 0; k < 3; ++k)
      w.write<float>(static_cast<float>(p.color_lab[k]));
    w.write<std::uint16_t>(static_cast<std::uint16_t>(p.semantic_id));
  }

  for (const auto& ch : frame.audio) {
    w.write<std::uint32_t>(static_cast<std::uint32_t>(ch.size()));
    w.write_bytes(ch.data(), sizeof(float) * static_cast<std::size_t>(ch.size()));
  }

  w.write<std::uint32_t>(static_cast<std::uint32_t>(frame.imu.rows()));
  for (Eigen::Index i = 0; i < frame.imu.rows(); ++i) {
    w.write<float>(static_cast<float>(frame.imu.t[i]));
    for (int k = 0; k < 3; ++k)
      w.write<float>(static_cast<float>(frame.imu.accel(i, k)));
  }
  w.write<std::uint32_t>(static_cast<std::uint32_t>(frame.tactile.rows()));
  for (Eigen::Index i = 0; i < frame.tactile.rows(); ++i) {
    w.write<float>(static_cast<float>(frame.tactile.t[i]));
    for (int k = 0; k < 4; ++k)
      w.write<float>(static_cast<float>(frame.tactile.force(i, k)));
  }
  w.close();
}

Frame read_frame(const std::string& path) {
  BinaryReader r(path);
  r.expect_magic("WFRM");
  const auto version = r.read<std::uint16_t>();
  if (version != kFrameVersion)
    throw FormatError(path + ": unsupported frame version " +
                      std::to_string(version));

  Frame f;
  f.id = static_cast<int>(r.read<std::uint32_t>());
  f.accumulation_window = r.read<float>();
  f.audio_sample_rate = r.read<float>();
  for (int k = 0; k < 3; ++k) f.robot_pose.position[k] = r.read<float>();
  f.robot_pose.yaw = r.read<float>();
  for (int k = 0; k < 3; ++k) f.cloud.sensor_origin[k] = r.read<float>();

  const auto n_points = r.read_count(kMaxCount);
  f.cloud.points.resize(n_points);
  for (auto& p : f.cloud.points) {
    for (int k = 0; k < 3; ++k) p.position[k] = r.read<float>();
    for (int k = 0; k < 3; ++k) p.color_lab[k] = r.read<float>();
    p.semantic_id = r.read<std::uint16_t>();
  }

  for (auto& ch : f.audio) {
    const auto n = r.read_count(kMaxCount);
    ch.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) ch[i] = r.read<float>();
  }

  const auto n_imu = r.read_count(kMaxCount);
  f.imu.t.resize(n_imu);
  f.imu.accel.resize(n_imu, 3);
  for (std::uint32_t i = 0; i < n_imu; ++i) {
    f.imu.t[i] = r.read<float>();
    for (int k = 0; k < 3; ++k) f.imu.accel(i, k) = r.read<float>();
  }
  const auto n_tac = r.read_count(kMaxCount);
  f.tactile.t.resize(n_tac);
  f.tactile.force.resize(n_tac, 4);
  for (std::uint32_t i = 0; i < n_tac; ++i) {
    f.tactile.t[i] = r.read<float>();
    for (int k = 0; k < 4; ++k) f.tactile.force(i, k) = r.read<float>();
  }
  if (!r.at_end())
    throw FormatError(path + ": trailing bytes at offset " +
                      std::to_string(r.offset()));
  return f;
}

void write_labels(const std::string& path, const LabeledFrame& labels,
                  const SemanticTable& table) {
  BinaryWriter w(path);
  w.write_bytes("WFLB", 4);
  w.write<std::uint16_t>(kLabelVersion);
  w.write<std::uint16_t>(static_cast<std::uint16_t>(table.size()));
  w.write<std::uint32_t>(static_cast<std::uint32_t>(labels.frame_id));
  w.write<float>(static_cast<float>(labels.traversability));
  w.write<std::uint32_t>(static_cast<std::uint32_t>(labels.samples.size()));
  for (const QuerySample& s : labels.samples) {
    w.write<std::uint8_t>(static_cast<std::uint8_t>(s.kind));
    for (int k = 0; k < 3; ++k) w.write<float>(static_cast<float>(s.position[k]));
    w.write<float>(static_cast<float>(s.sdf));
    w.write<float>(static_cast<float>(s.confidence));
    for (int k = 0; k < 3; ++k)
      w.write<std::uint16_t>(
          s.color_bins ? static_cast<std::uint16_t>((*s.color_bins)[size_t(k)])
                       : kNullBin);
    w.write<std::uint16_t>(static_cast<std::uint16_t>(s.semantic_id));
  }
  w.close();
}

LabeledFrame read_labels(const std::string& path, const SemanticTable& table) {
  BinaryReader r(path);
  r.expect_magic("WFLB");
  const auto version = r.read<std::uint16_t>();
  if (version != kLabelVersion)
    throw FormatError(path + ": unsupported label version " +
                      std::to_string(version));
  const auto n_classes = r.read<std::uint16_t>();
  if (n_classes != table.size())
    throw FormatError(path + ": class count " + std::to_string(n_classes) +
                      " does not match the semantic table (" +
                      std::to_string(table.size()) + ")");

  LabeledFrame lf;
  lf.frame_id = static_cast<int>(r.read<std::uint32_t>());
  lf.traversability = r.read<float>();
  const auto n = r.read_count(kMaxCount);
  lf.samples.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    QuerySample& s = lf.samples[i];
    const auto kind = r.read<std::uint8_t>();
    if (kind > 2)
      throw FormatError(path + ": invalid sample kind at byte offset " +
                        std::to_string(r.offset() - 1));
    s.kind = static_cast<SampleKind>(kind);
    for (int k = 0; k < 3; ++k) s.position[k] = r.read<float>();
    s.sdf = r.read<float>();
    s.confidence = r.read<float>();
    std::array<int, 3> bins{};
    bool null_bins = false;
    for (int k = 0; k < 3; ++k) {
      const auto b = r.read<std::uint16_t>();
      if (b == kNullBin)
        null_bins = true;
      else
        bins[size_t(k)] = b;
    }
    if (!null_bins) s.color_bins = bins;
    s.semantic_id = r.read<std::uint16_t>();

    const auto violations = validate_sample(s, table);
    if (!violations.empty())
      throw FormatError(path + ": sample " + std::to_string(i) +
                        " violates invariants (" + violations.front() + ")");
  }
  if (!r.at_end())
    throw FormatError(path + ": trailing bytes at offset " +
                      std::to_string(r.offset()));
  return lf;
}

}  // namespace wf
