#include "wildfusion/field/params.hpp"

#include <cmath>
#include <sstream>

#include "wildfusion/io/binary.hpp"
#include "wildfusion/io/config.hpp"

namespace wf {

std::ptrdiff_t ParamLayout::add(const std::string& name, int rows, int cols) {
  TensorSpec s;
  s.name = name;
  s.rows = rows;
  s.cols = cols;
  s.offset = total_;
  specs_.push_back(s);
  total_ += s.size();
  return s.offset;
}

const TensorSpec& ParamLayout::at(const std::string& name) const {
  for (const auto& s : specs_)
    if (s.name == name) return s;
  throw InputError("unknown tensor: " + name);
}

ParamLayout::ParamLayout(const ModelConfig& cfg) {
  cfg.check();
  const int th = cfg.tnet_hidden;
  const int h1 = cfg.pn_h1;

  add("cloud.tnet_in.w1", th, 3);
  add("cloud.tnet_in.b1", th, 1);
  add("cloud.tnet_in.w2", 9, th);
  add("cloud.tnet_in.b2", 9, 1);
  add("cloud.mlp1.w", h1, 6);
  add("cloud.mlp1.b", h1, 1);
  add("cloud.tnet_feat.w1", h1, h1);
  add("cloud.tnet_feat.b1", h1, 1);
  add("cloud.tnet_feat.w2", h1 * h1, h1);
  add("cloud.tnet_feat.b2", h1 * h1, 1);
  add("cloud.mlp2.w", cfg.pn_h2, h1);
  add("cloud.mlp2.b", cfg.pn_h2, 1);
  add("cloud.mlp3.w", cfg.pn_feat, cfg.pn_h2);
  add("cloud.mlp3.b", cfg.pn_feat, 1);
  add("cloud.res.w", cfg.pn_feat, h1);

  add("audio.conv1.w", cfg.audio_c1, 4 * 9);
  add("audio.conv1.b", cfg.audio_c1, 1);
  add("audio.conv2.w", cfg.audio_c2, cfg.audio_c1 * 9);
  add("audio.conv2.b", cfg.audio_c2, 1);
  add("audio.conv3.w", cfg.audio_c3, cfg.audio_c2 * 9);
  add("audio.conv3.b", cfg.audio_c3, 1);
  add("audio.fc.w", cfg.audio_feat, cfg.audio_c3);
  add("audio.fc.b", cfg.audio_feat, 1);

  add("trunk.l1.w", cfg.trunk_width, cfg.trunk_in());
  add("trunk.l1.b", cfg.trunk_width, 1);
  add("trunk.l2.w", cfg.trunk_width, cfg.trunk_width);
  add("trunk.l2.b", cfg.trunk_width, 1);

  const int hh = cfg.head_hidden;
  const int w = cfg.trunk_width;
  for (const char* head : {"sdf", "conf"}) {
    const std::string p = std::string("head.") + head;
    add(p + ".w1", hh, w);
    add(p + ".b1", hh, 1);
    add(p + ".w2", 1, hh);
    add(p + ".skip", 1, w);
    add(p + ".b2", 1, 1);
  }
  for (int c = 0; c < 3; ++c) {
    const std::string p = "head.color" + std::to_string(c);
    add(p + ".w1", hh, w);
    add(p + ".b1", hh, 1);
    add(p + ".w2", cfg.n_color_bins, hh);
    add(p + ".b2", cfg.n_color_bins, 1);
  }
  add("head.sem.w1", hh, w);
  add("head.sem.b1", hh, 1);
  add("head.sem.w2", cfg.semantic_logits(), hh);
  add("head.sem.b2", cfg.semantic_logits(), 1);

  add("head.trav.w1", cfg.trav_hidden, cfg.trav_in());
  add("head.trav.b1", cfg.trav_hidden, 1);
  add("head.trav.w2", 1, cfg.trav_hidden);
  add("head.trav.b2", 1, 1);
}

namespace {

enum class InitKind { kZero, kIdentityBias, kGlorot, kHe };

InitKind init_kind(const TensorSpec& s) {
  const bool tnet = s.name.find("tnet") != std::string::npos;
  const bool w2 = s.name.find(".w2") != std::string::npos;
  const bool b2 = s.name.find(".b2") != std::string::npos;
  if (tnet && w2) return InitKind::kZero;
  if (tnet && b2) return InitKind::kIdentityBias;
  if (s.name.find(".b") != std::string::npos) return InitKind::kZero;
  // tanh-activated stacks get Glorot, rectified ones get He.
  if (s.name.rfind("trunk.", 0) == 0 || s.name.rfind("head.sdf", 0) == 0 ||
      s.name.rfind("head.conf", 0) == 0 || s.name.rfind("head.trav", 0) == 0)
    return InitKind::kGlorot;
  return InitKind::kHe;
}

void fill_identity_bias(Eigen::Ref<Eigen::VectorXf> v) {
  const int n = static_cast<int>(std::lround(std::sqrt(double(v.size()))));
  if (n * n != v.size()) throw NumericError("tnet bias is not a square matrix");
  v.setZero();
  for (int i = 0; i < n; ++i) v[i * n + i] = 1.0f;  // column-major diagonal
}

}  // namespace

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.check();
  ModelParams p;
  p.config = cfg;

  Rng brng(Rng::derive(seed, 1));
  p.fourier_b.resize(cfg.fourier_m, 3);
  for (int i = 0; i < p.fourier_b.rows(); ++i)
    for (int j = 0; j < 3; ++j)
      p.fourier_b(i, j) = static_cast<float>(cfg.fourier_sigma * brng.normal());

  const ParamLayout layout(cfg);
  p.theta.resize(layout.total());
  Rng wrng(Rng::derive(seed, 2));
  for (const auto& s : layout.tensors()) {
    auto seg = p.theta.segment(s.offset, s.size());
    switch (init_kind(s)) {
      case InitKind::kZero:
        seg.setZero();
        break;
      case InitKind::kIdentityBias:
        fill_identity_bias(seg);
        break;
      case InitKind::kGlorot: {
        const double a = std::sqrt(6.0 / (s.rows + s.cols));
        for (Eigen::Index i = 0; i < seg.size(); ++i)
          seg[i] = static_cast<float>(wrng.uniform(-a, a));
        break;
      }
      case InitKind::kHe: {
        const double std = std::sqrt(2.0 / s.cols);
        for (Eigen::Index i = 0; i < seg.size(); ++i)
          seg[i] = static_cast<float>(std * wrng.normal());
        break;
      }
    }
  }
  return p;
}

namespace {

std::string render_config(const ModelConfig& c) {
  std::ostringstream os;
  os.precision(17);  // doubles must survive the text round trip
  os << "fourier_m = " << c.fourier_m << "\n";
  os << "fourier_sigma = " << c.fourier_sigma << "\n";
  os << "fourier_include_input = " << (c.fourier_include_input ? 1 : 0) << "\n";
  os << "tnet_hidden = " << c.tnet_hidden << "\n";
  os << "pn_h1 = " << c.pn_h1 << "\n";
  os << "pn_h2 = " << c.pn_h2 << "\n";
  os << "pn_feat = " << c.pn_feat << "\n";
  os << "audio_c1 = " << c.audio_c1 << "\n";
  os << "audio_c2 = " << c.audio_c2 << "\n";
  os << "audio_c3 = " << c.audio_c3 << "\n";
  os << "audio_feat = " << c.audio_feat << "\n";
  os << "n_mels = " << c.n_mels << "\n";
  os << "n_audio_frames = " << c.n_audio_frames << "\n";
  os << "trunk_width = " << c.trunk_width << "\n";
  os << "head_hidden = " << c.head_hidden << "\n";
  os << "trav_hidden = " << c.trav_hidden << "\n";
  os << "n_classes = " << c.n_classes << "\n";
  os << "n_color_bins = " << c.n_color_bins << "\n";
  os << "s_max = " << c.s_max << "\n";
  os << "dropout = " << c.dropout << "\n";
  return os.str();
}

ModelConfig parse_config(const std::string& text) {
  ConfigMap m = ConfigMap::parse_text(text, "checkpoint config");
  ModelConfig c;
  c.fourier_m = m.get_int("fourier_m", c.fourier_m);
  c.fourier_sigma = m.get_double("fourier_sigma", c.fourier_sigma);
  c.fourier_include_input =
      m.get_int("fourier_include_input", c.fourier_include_input ? 1 : 0) != 0;
  c.tnet_hidden = m.get_int("tnet_hidden", c.tnet_hidden);
  c.pn_h1 = m.get_int("pn_h1", c.pn_h1);
  c.pn_h2 = m.get_int("pn_h2", c.pn_h2);
  c.pn_feat = m.get_int("pn_feat", c.pn_feat);
  c.audio_c1 = m.get_int("audio_c1", c.audio_c1);
  c.audio_c2 = m.get_int("audio_c2", c.audio_c2);
  c.audio_c3 = m.get_int("audio_c3", c.audio_c3);
  c.audio_feat = m.get_int("audio_feat", c.audio_feat);
  c.n_mels = m.get_int("n_mels", c.n_mels);
  c.n_audio_frames = m.get_int("n_audio_frames", c.n_audio_frames);
  c.trunk_width = m.get_int("trunk_width", c.trunk_width);
  c.head_hidden = m.get_int("head_hidden", c.head_hidden);
  c.trav_hidden = m.get_int("trav_hidden", c.trav_hidden);
  c.n_classes = m.get_int("n_classes", c.n_classes);
  c.n_color_bins = m.get_int("n_color_bins", c.n_color_bins);
  c.s_max = m.get_double("s_max", c.s_max);
  c.dropout = m.get_double("dropout", c.dropout);
  m.check_consumed();
  return c;
}

void write_tensor(BinaryWriter& w, const std::string& name, const float* data,
                  int rows, int cols) {
  w.write<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
  w.write_bytes(name.data(), name.size());
  w.write<std::uint32_t>(static_cast<std::uint32_t>(rows));
  w.write<std::uint32_t>(static_cast<std::uint32_t>(cols));
  w.write_bytes(data, sizeof(float) * std::size_t(rows) * std::size_t(cols));
}

}  // namespace

void write_checkpoint(const std::string& path, const ModelParams& params) {
  const ParamLayout layout(params.config);
  if (params.theta.size() != layout.total())
    throw InputError("parameter vector does not match the model configuration");

  BinaryWriter w(path);
  w.write_bytes("WFLD", 4);
  w.write<std::uint16_t>(1);
  const std::string cfg = render_config(params.config);
  w.write<std::uint32_t>(static_cast<std::uint32_t>(cfg.size()));
  w.write_bytes(cfg.data(), cfg.size());
  w.write<std::uint32_t>(static_cast<std::uint32_t>(layout.tensors().size()) + 1);
  write_tensor(w, "fourier_b", params.fourier_b.data(),
               static_cast<int>(params.fourier_b.rows()),
               static_cast<int>(params.fourier_b.cols()));
  for (const auto& s : layout.tensors())
    write_tensor(w, s.name, params.theta.data() + s.offset, s.rows, s.cols);
  w.close();
}

ModelParams read_checkpoint(const std::string& path) {
  BinaryReader r(path);
  r.expect_magic("WFLD");
  const auto version = r.read<std::uint16_t>();
  if (version != 1)
    throw FormatError(path + ": unsupported checkpoint version " +
                      std::to_string(version));
  const auto cfg_len = r.read_count(1u << 20);
  std::string cfg_text(cfg_len, '\0');
  for (auto& ch : cfg_text) ch = r.read<char>();

  ModelParams p;
  p.config = parse_config(cfg_text);
  const ParamLayout layout(p.config);
  p.theta.resize(layout.total());

  const auto n_tensors = r.read_count(1u << 16);
  if (n_tensors != layout.tensors().size() + 1)
    throw FormatError(path + ": tensor count mismatch");

  auto read_header = [&](const std::string& want, int rows, int cols) {
    const auto len = r.read<std::uint16_t>();
    std::string name(len, '\0');
    for (auto& ch : name) ch = r.read<char>();
    const auto tr = r.read<std::uint32_t>();
    const auto tc = r.read<std::uint32_t>();
    if (name != want || int(tr) != rows || int(tc) != cols)
      throw FormatError(path + ": expected tensor " + want + " [" +
                        std::to_string(rows) + "x" + std::to_string(cols) +
                        "], found " + name + " [" + std::to_string(tr) + "x" +
                        std::to_string(tc) + "]");
  };
  auto read_data = [&](float* dst, int n) {
    for (int i = 0; i < n; ++i) dst[i] = r.read<float>();
  };

  read_header("fourier_b", p.config.fourier_m, 3);
  p.fourier_b.resize(p.config.fourier_m, 3);
  read_data(p.fourier_b.data(), static_cast<int>(p.fourier_b.size()));
  for (const auto& s : layout.tensors()) {
    read_header(s.name, s.rows, s.cols);
    read_data(p.theta.data() + s.offset, s.size());
  }
  if (!r.at_end())
    throw FormatError(path + ": trailing bytes after checkpoint payload");
  return p;
}

}  // namespace wf
