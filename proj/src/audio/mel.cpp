#include "wildfusion/audio/mel.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "wildfusion/core/error.hpp"

namespace wf {

void fft_inplace(std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (n == 0 || !std::has_single_bit(n))
    throw InputError("fft size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = x[i + k];
        const std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

Eigen::MatrixXd stft_magnitude(const Eigen::VectorXf& waveform, int n_fft,
                               int hop) {
  if (waveform.size() < n_fft)
    throw InputError("waveform shorter than one FFT window");
  if (hop <= 0 || hop > n_fft) throw InputError("hop must be in (0, n_fft]");

  const int n_frames =
      1 + static_cast<int>((waveform.size() - n_fft) / hop);
  const int n_bins = n_fft / 2 + 1;

  Eigen::VectorXd window(n_fft);
  for (int i = 0; i < n_fft; ++i)
    window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / n_fft));

  Eigen::MatrixXd mag(n_bins, n_frames);
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(n_fft));
  for (int t = 0; t < n_frames; ++t) {
    const int off = t * hop;
    for (int i = 0; i < n_fft; ++i)
      buf[static_cast<std::size_t>(i)] = {window[i] * waveform[off + i], 0.0};
    fft_inplace(buf);
    for (int k = 0; k < n_bins; ++k)
      mag(k, t) = std::abs(buf[static_cast<std::size_t>(k)]);
  }
  return mag;
}

Eigen::MatrixXd mel_filterbank(const MelConfig& config) {
  if (config.fmax > config.sample_rate / 2.0)
    throw ConfigError("mel fmax above Nyquist");
  if (config.hop > config.n_fft) throw ConfigError("mel hop above n_fft");

  const int n_bins = config.n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(config.fmin);
  const double mel_hi = hz_to_mel(config.fmax);

  std::vector<double> corners(static_cast<std::size_t>(config.n_mels) + 2);
  for (int i = 0; i < config.n_mels + 2; ++i)
    corners[static_cast<std::size_t>(i)] = mel_to_hz(
        mel_lo + (mel_hi - mel_lo) * i / (config.n_mels + 1));

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(config.n_mels, n_bins);
  for (int m = 0; m < config.n_mels; ++m) {
    const double left = corners[static_cast<std::size_t>(m)];
    const double center = corners[static_cast<std::size_t>(m) + 1];
    const double right = corners[static_cast<std::size_t>(m) + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * config.sample_rate / config.n_fft;
      double w = 0.0;
      if (f > left && f < right)
        w = f <= center ? (f - left) / (center - left)
                        : (right - f) / (right - center);
      fb(m, k) = w;
    }
    if (fb.row(m).sum() <= 0.0)
      throw ConfigError("empty mel filter " + std::to_string(m) +
                        ": too many bands for FFT resolution");
  }
  return fb;
}

Eigen::MatrixXd mel_spectrogram(const Eigen::VectorXf& waveform,
                                const MelConfig& config) {
  const auto segment_samples =
      static_cast<Eigen::Index>(config.segment_s * config.sample_rate);
  if (waveform.size() < segment_samples)
    throw InputError("waveform shorter than one audio segment");

  const Eigen::MatrixXd mag =
      stft_magnitude(waveform.head(segment_samples), config.n_fft, config.hop);
  const Eigen::MatrixXd fb = mel_filterbank(config);
  constexpr double kEps = 1e-6;
  return ((fb * mag.array().square().matrix()).array() + kEps).log().matrix();
}

MelStack stack_legs(const std::array<Eigen::MatrixXd, kNumLegs>& mels) {
  for (const auto& m : mels) {
    if (m.rows() != mels[0].rows() || m.cols() != mels[0].cols())
      throw InputError("leg spectrogram shapes differ");
    if (m.size() == 0) throw InputError("empty leg spectrogram");
  }
  return MelStack{mels};
}

MelStack frame_mel_stack(const Frame& frame, const MelConfig& config) {
  std::array<Eigen::MatrixXd, kNumLegs> mels;
  for (int leg = 0; leg < kNumLegs; ++leg)
    mels[static_cast<std::size_t>(leg)] =
        mel_spectrogram(frame.audio[static_cast<std::size_t>(leg)], config);
  return stack_legs(mels);
}

}  // namespace wf
