#pragma once

#include <cstdint>
#include <string>

#include "vdep/corpus.hpp"

namespace vdep {

// Desk-scale corpus: utterances are concatenations of two-formant vowel tones
// and noise "consonant" fillers, with the true token boundaries written to
// the phone tier. Depressed participants carry a planted acoustic marker --
// formant targets shrunk toward the vowel-space centroid with less jitter,
// and a narrower token-amplitude distribution -- so the class is learnable.
struct SyntheticSpec {
  int n_depressed = 4;
  int n_control = 8;
  int utterances_per_participant = 3;
  int tokens_min = 14;
  int tokens_max = 20;
  double vowel_prob = 0.65;  // a token is a vowel, else a noise filler
  double vowel_dur_min = 0.12;
  double vowel_dur_max = 0.30;
  double filler_dur_min = 0.06;
  double filler_dur_max = 0.16;
  double pause_prob = 0.15;  // chance of an "sp" gap after a token
  double pause_dur_min = 0.04;
  double pause_dur_max = 0.12;
  double f0_min = 95.0;
  double f0_max = 220.0;
  double formant_jitter = 0.08;       // relative, per token
  double amp_min = 0.25;              // per-token peak amplitude, control class
  double amp_max = 0.95;
  double dep_formant_shrink = 0.70;   // toward the (500, 1500) Hz centroid
  double dep_formant_jitter = 0.025;
  double dep_amp_min = 0.55;
  double dep_amp_max = 0.70;
  double filler_amp_min = 0.08;
  double filler_amp_max = 0.20;
  std::string out_dir;
};

// Writes WAVs under <out_dir>/audio, phone tiers under <out_dir>/align, and
// returns the manifest with paths relative to out_dir. Identical (spec, seed)
// produce byte-identical files.
CorpusManifest generate_synthetic_corpus(const SyntheticSpec& spec, uint64_t seed);

}  // namespace vdep
