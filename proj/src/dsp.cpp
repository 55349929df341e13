#include "vdep/dsp.hpp"

#include <cmath>

#include "vdep/common.hpp"

namespace vdep {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLogFloor = 1e-10;

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterBank build_mel_filterbank(int n_mels, int n_fft, int sample_rate) {
  if (n_mels != kNumMels || n_fft != kFftSize || sample_rate != 16000) {
    fail("mel filterbank is fixed at (128 bands, 512 fft, 16000 Hz); got ({}, {}, {})",
         n_mels, n_fft, sample_rate);
  }
  const int n_bins = n_fft / 2 + 1;
  const double f_max = sample_rate / 2.0;

  MelFilterBank bank;
  bank.band_edges.resize(n_mels + 2);
  const double mel_max = hz_to_mel(f_max);
  for (int i = 0; i < n_mels + 2; ++i) {
    bank.band_edges[i] = mel_to_hz(mel_max * i / (n_mels + 1));
  }

  bank.weights = Eigen::MatrixXd::Zero(n_mels, n_bins);
  for (int m = 0; m < n_mels; ++m) {
    const double lower = bank.band_edges[m];
    const double center = bank.band_edges[m + 1];
    const double upper = bank.band_edges[m + 2];
    const double norm = 2.0 / (upper - lower);
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      double w = 0.0;
      if (f > lower && f < center) {
        w = (f - lower) / (center - lower);
      } else if (f == center) {
        w = 1.0;
      } else if (f > center && f < upper) {
        w = (upper - f) / (upper - center);
      }
      bank.weights(m, k) = w * norm;
    }
  }
  return bank;
}

int frame_count(int n_samples, int n_fft, int hop) {
  if (n_samples < n_fft) return 0;
  return (n_samples - n_fft) / hop + 1;
}

void fft_pow2(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) fail("fft size {} is not a power of two", n);

  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

Eigen::MatrixXd log_mel_frames(const float* samples, size_t n,
                               const MelFilterBank& bank) {
  const int frames = frame_count(static_cast<int>(n));
  if (frames <= 0) fail("segment of {} samples is shorter than one FFT window", n);

  // periodic Hann
  static thread_local std::vector<double> window;
  if (window.size() != kFftSize) {
    window.resize(kFftSize);
    for (int i = 0; i < kFftSize; ++i) {
      window[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / kFftSize));
    }
  }

  Eigen::MatrixXd out(bank.weights.rows(), frames);
  std::vector<std::complex<double>> buf(kFftSize);
  Eigen::VectorXd power(kFftSize / 2 + 1);
  for (int t = 0; t < frames; ++t) {
    const float* frame = samples + static_cast<size_t>(t) * kHopSize;
    for (int i = 0; i < kFftSize; ++i) {
      buf[i] = std::complex<double>(static_cast<double>(frame[i]) * window[i], 0.0);
    }
    fft_pow2(buf);
    for (int k = 0; k <= kFftSize / 2; ++k) {
      power[k] = std::norm(buf[k]);
    }
    out.col(t) = (bank.weights * power).array().unaryExpr(
        [](double e) { return std::log(e + kLogFloor); });
  }
  return out;
}

MelPatch log_mel(const float* samples, size_t n, const MelFilterBank& bank) {
  if (n != kSegmentSamples) {
    fail("log_mel expects exactly {} samples (250 ms at 16 kHz), got {}",
         kSegmentSamples, n);
  }
  MelPatch patch;
  patch.values = log_mel_frames(samples, n, bank).cast<float>();
  return patch;
}

}  // namespace vdep
