#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

#include "wildfusion/core/types.hpp"

namespace wf {

struct MelConfig {
  int n_fft = 2048;
  int hop = 512;
  int n_mels = 128;
  double fmin = 0.0;
  double fmax = 8192.0;
  double sample_rate = 16384.0;
  double segment_s = 0.5;
};

/// Frequency → mel, HTK flavor.
inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double mel_to_hz(double m) {
  return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
}

/// In-place radix-2 FFT; size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& x);

/// Hann-windowed magnitude spectrogram, one column per frame, no centering.
/// Rows are the one-sided bins 0..n_fft/2.
Eigen::MatrixXd stft_magnitude(const Eigen::VectorXf& waveform, int n_fft,
                               int hop);

/// Triangular unit-peak filters, one row per mel band, columns over the
/// one-sided FFT bins.
Eigen::MatrixXd mel_filterbank(const MelConfig& config);

/// log(filterbank · |STFT|² + 1e-6) over exactly the first segment_s seconds.
Eigen::MatrixXd mel_spectrogram(const Eigen::VectorXf& waveform,
                                const MelConfig& config);

/// Per-leg spectrograms stacked in fixed leg order
/// (front-left, front-right, rear-left, rear-right).
struct MelStack {
  std::array<Eigen::MatrixXd, kNumLegs> legs;
  int n_mels() const { return static_cast<int>(legs[0].rows()); }
  int n_frames() const { return static_cast<int>(legs[0].cols()); }
};

MelStack stack_legs(const std::array<Eigen::MatrixXd, kNumLegs>& mels);

/// Full per-frame audio feature: mel_spectrogram per leg, stacked.
MelStack frame_mel_stack(const Frame& frame, const MelConfig& config);

}  // namespace wf
