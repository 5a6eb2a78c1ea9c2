#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "wildfusion/audio/mel.hpp"
#include "wildfusion/core/error.hpp"
#include "wildfusion/core/rng.hpp"

using namespace wf;

namespace {

// O(n²) windowed DFT magnitude of one frame, the reference the FFT must
// reproduce.
Eigen::VectorXd naive_frame_magnitude(const Eigen::VectorXf& x, int off,
                                      int n_fft) {
  const int n_bins = n_fft / 2 + 1;
  Eigen::VectorXd mag(n_bins);
  for (int k = 0; k < n_bins; ++k) {
    std::complex<double> acc(0, 0);
    for (int n = 0; n < n_fft; ++n) {
      const double w =
          0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / n_fft));
      const double ang = -2.0 * std::numbers::pi * k * n / n_fft;
      acc += w * double(x[off + n]) * std::complex<double>(std::cos(ang),
                                                           std::sin(ang));
    }
    mag[k] = std::abs(acc);
  }
  return mag;
}

Eigen::VectorXf sine(double freq, double sr, int n) {
  Eigen::VectorXf x(n);
  for (int i = 0; i < n; ++i)
    x[i] = float(std::sin(2.0 * std::numbers::pi * freq * i / sr));
  return x;
}

}  // namespace

TEST_CASE("stft matches naive DFT oracle on random frames") {
  Rng rng(42);
  Eigen::VectorXf x(2048);
  for (auto& v : x) v = float(rng.normal());
  const Eigen::MatrixXd mag = stft_magnitude(x, 2048, 512);
  REQUIRE(mag.cols() == 1);
  const Eigen::VectorXd oracle = naive_frame_magnitude(x, 0, 2048);
  CHECK((mag.col(0) - oracle).cwiseAbs().maxCoeff() < 1e-5);

  const Eigen::MatrixXd small = stft_magnitude(x, 256, 64);
  REQUIRE(small.cols() == 1 + (2048 - 256) / 64);
  for (int t : {0, 7, 28}) {
    Eigen::VectorXf frame = x;
    const Eigen::VectorXd o = naive_frame_magnitude(x, t * 64, 256);
    CHECK((small.col(t) - o).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("stft basics") {
  const Eigen::VectorXf zeros = Eigen::VectorXf::Zero(4096);
  CHECK(stft_magnitude(zeros, 2048, 512).cwiseAbs().maxCoeff() == 0.0);

  CHECK(stft_magnitude(sine(1000.0, 16384.0, 8192), 2048, 512).cols() == 13);

  CHECK_THROWS_AS(stft_magnitude(Eigen::VectorXf::Zero(100), 2048, 512),
                  InputError);
}

TEST_CASE("bin-centered sine concentrates energy at its bin") {
  const double sr = 16384.0;
  const int n_fft = 2048;
  const int k = 125;
  const Eigen::MatrixXd mag =
      stft_magnitude(sine(k * sr / n_fft, sr, n_fft), n_fft, n_fft);

  Eigen::Index argmax = 0;
  mag.col(0).maxCoeff(&argmax);
  CHECK(argmax == k);

  // The Hann window spreads an exact-bin tone over bins k-1..k+1; together
  // they must hold essentially all frame energy.
  const Eigen::VectorXd p = mag.col(0).array().square();
  const double total = p.sum();
  CHECK((p[k - 1] + p[k] + p[k + 1]) / total > 0.99);
  CHECK(p[k] / total > 0.5);
}

TEST_CASE("Parseval: one-sided power sums to windowed energy") {
  Rng rng(3);
  Eigen::VectorXf x(2048);
  for (auto& v : x) v = float(rng.uniform(-1.0, 1.0));
  const int n = 2048;
  const Eigen::MatrixXd mag = stft_magnitude(x, n, n);

  double energy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / n));
    energy += w * w * double(x[i]) * double(x[i]);
  }
  double power = mag(0, 0) * mag(0, 0) + mag(n / 2, 0) * mag(n / 2, 0);
  for (int k = 1; k < n / 2; ++k) power += 2.0 * mag(k, 0) * mag(k, 0);
  CHECK(power / n == doctest::Approx(energy).epsilon(1e-6));
}

TEST_CASE("mel filterbank geometry") {
  CHECK(hz_to_mel(1000.0) == doctest::Approx(999.99).epsilon(1e-4));
  CHECK(mel_to_hz(hz_to_mel(437.5)) == doctest::Approx(437.5));

  MelConfig cfg;
  const Eigen::MatrixXd fb = mel_filterbank(cfg);
  REQUIRE(fb.rows() == 128);
  REQUIRE(fb.cols() == 1025);
  CHECK(fb.minCoeff() >= 0.0);
  for (int m = 0; m < fb.rows(); ++m) CHECK(fb.row(m).sum() > 0.0);

  // center bin of each filter strictly increases with the band index
  double prev_center = -1.0;
  for (int m = 0; m < fb.rows(); ++m) {
    Eigen::Index peak = 0;
    fb.row(m).maxCoeff(&peak);
    const double f = peak * cfg.sample_rate / cfg.n_fft;
    CHECK(f > prev_center);
    prev_center = f;
  }

  MelConfig bad = cfg;
  bad.fmax = 10000.0;
  CHECK_THROWS_AS(mel_filterbank(bad), ConfigError);
  bad = cfg;
  bad.n_mels = 2000;
  CHECK_THROWS_AS(mel_filterbank(bad), ConfigError);
}

TEST_CASE("mel spectrogram") {
  MelConfig cfg;
  const Eigen::MatrixXd silent =
      mel_spectrogram(Eigen::VectorXf::Zero(8192), cfg);
  REQUIRE(silent.rows() == 128);
  REQUIRE(silent.cols() == 13);
  CHECK(silent.maxCoeff() == doctest::Approx(std::log(1e-6)));
  CHECK(silent.minCoeff() == doctest::Approx(std::log(1e-6)));

  const Eigen::MatrixXd tone =
      mel_spectrogram(sine(1000.0, cfg.sample_rate, 8192), cfg);
  Eigen::Index band = 0;
  Eigen::VectorXd mean = tone.rowwise().mean();
  mean.maxCoeff(&band);
  // the winning band's triangle must straddle 1 kHz
  const double mel_lo = hz_to_mel(cfg.fmin), mel_hi = hz_to_mel(cfg.fmax);
  const double left =
      mel_to_hz(mel_lo + (mel_hi - mel_lo) * band / (cfg.n_mels + 1));
  const double right =
      mel_to_hz(mel_lo + (mel_hi - mel_lo) * (band + 2) / (cfg.n_mels + 1));
  CHECK(left < 1000.0);
  CHECK(right > 1000.0);

  CHECK_THROWS_AS(mel_spectrogram(Eigen::VectorXf::Zero(1000), cfg),
                  InputError);
}

TEST_CASE("leg stacking") {
  std::array<Eigen::MatrixXd, 4> mels;
  for (int i = 0; i < 4; ++i)
    mels[size_t(i)] = Eigen::MatrixXd::Constant(128, 13, double(i));
  const MelStack stack = stack_legs(mels);
  CHECK(stack.n_mels() == 128);
  CHECK(stack.n_frames() == 13);
  CHECK(stack.legs[2](0, 0) == 2.0);

  // order is a contract: permuting legs is observable
  std::swap(mels[0], mels[3]);
  CHECK(stack_legs(mels).legs[0](0, 0) == 3.0);

  mels[1] = Eigen::MatrixXd::Zero(128, 12);
  CHECK_THROWS_AS(stack_legs(mels), InputError);
}
