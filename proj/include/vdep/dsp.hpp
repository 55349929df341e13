#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace vdep {

inline constexpr int kNumMels = 128;
inline constexpr int kFftSize = 512;
inline constexpr int kHopSize = 128;
inline constexpr int kSegmentSamples = 4000;  // 250 ms at 16 kHz
inline constexpr int kPatchFrames = 28;       // floor((4000-512)/128)+1

double hz_to_mel(double hz);  // HTK: 2595 * log10(1 + f/700)
double mel_to_hz(double mel);

struct MelFilterBank {
  Eigen::MatrixXd weights;        // kNumMels x (kFftSize/2 + 1)
  std::vector<double> band_edges; // kNumMels + 2 frequencies in Hz

  double center_hz(int band) const { return band_edges[band + 1]; }
};

// Triangular filters on an HTK-mel grid from 0 to sample_rate/2, rows scaled
// by 2/(upper-lower). Parameters other than (128, 512, 16000) are rejected;
// the downstream network shapes depend on them.
MelFilterBank build_mel_filterbank(int n_mels = kNumMels, int n_fft = kFftSize,
                                   int sample_rate = 16000);

struct MelPatch {
  Eigen::MatrixXf values;  // kNumMels x kPatchFrames, log(mel energy + 1e-10)
};

// Number of hop-aligned full FFT frames in a segment of n samples.
int frame_count(int n_samples, int n_fft = kFftSize, int hop = kHopSize);

// Log-mel patch of a 250 ms segment: Hann window, 512-point FFT, power
// spectrum, mel projection, natural log with a 1e-10 floor. Exactly 4000
// samples in, (128, 28) out.
MelPatch log_mel(const float* samples, size_t n, const MelFilterBank& bank);

// Same transform for any segment length >= n_fft; column count follows
// frame_count(). log_mel() is the fixed-shape wrapper over this.
Eigen::MatrixXd log_mel_frames(const float* samples, size_t n,
                               const MelFilterBank& bank);

// In-place iterative radix-2 FFT (size must be a power of two). Exposed so
// tests can pin it against a direct DFT.
void fft_pow2(std::vector<std::complex<double>>& a);

}  // namespace vdep
