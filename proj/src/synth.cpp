#include "vdep/synth.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "vdep/common.hpp"
#include "vdep/csvio.hpp"
#include "vdep/fileio.hpp"
#include "vdep/rng.hpp"
#include "vdep/segmentation.hpp"
#include "vdep/wav.hpp"

namespace vdep {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct VowelTarget {
  const char* arpabet;  // written to the phone tier
  double f1;
  double f2;
};

// Canonical American English two-formant targets.
constexpr std::array<VowelTarget, 5> kVowels{{
    {"AA1", 730.0, 1090.0},  // /a/
    {"EH1", 530.0, 1840.0},  // /e/
    {"IY1", 270.0, 2290.0},  // /i/
    {"OW1", 570.0, 840.0},   // /o/
    {"UW1", 300.0, 870.0},   // /u/
}};

constexpr const char* kFillers[] = {"S", "T", "F"};

constexpr double kCentroidF1 = 500.0;
constexpr double kCentroidF2 = 1500.0;

// Two-pole resonator, applied in place.
void resonate(std::vector<double>& x, double freq, double bandwidth) {
  const double r = std::exp(-kPi * bandwidth / kSampleRate);
  const double a1 = 2.0 * r * std::cos(2.0 * kPi * freq / kSampleRate);
  const double a2 = -r * r;
  double y1 = 0.0, y2 = 0.0;
  for (double& v : x) {
    const double y = v + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

std::vector<double> vowel_token(int n_samples, double f0, double f1, double f2,
                                double amplitude) {
  std::vector<double> x(n_samples, 0.0);
  const int period = std::max(1, static_cast<int>(std::lround(kSampleRate / f0)));
  for (int i = 0; i < n_samples; i += period) x[static_cast<size_t>(i)] = 1.0;
  resonate(x, f1, 80.0);
  resonate(x, f2, 120.0);

  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  const double gain = peak > 0 ? amplitude / peak : 0.0;
  const int fade = std::min(n_samples / 4, kSampleRate / 100);  // 10 ms
  for (int i = 0; i < n_samples; ++i) {
    double env = 1.0;
    if (i < fade) env = 0.5 * (1.0 - std::cos(kPi * i / fade));
    if (n_samples - 1 - i < fade) {
      env = std::min(env, 0.5 * (1.0 - std::cos(kPi * (n_samples - 1 - i) / fade)));
    }
    x[static_cast<size_t>(i)] *= gain * env;
  }
  return x;
}

std::vector<double> filler_token(int n_samples, double amplitude, Rng& rng) {
  std::vector<double> x(n_samples);
  double prev = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double white = rng.uniform(-1.0, 1.0);
    x[static_cast<size_t>(i)] = (white - prev) * 0.5;  // first difference, tilts high
    prev = white;
  }
  for (int i = 0; i < n_samples; ++i) x[static_cast<size_t>(i)] *= amplitude;
  return x;
}

}  // namespace

CorpusManifest generate_synthetic_corpus(const SyntheticSpec& spec, uint64_t seed) {
  if (spec.n_depressed <= 0 || spec.n_control <= 0) {
    fail("synthetic spec needs at least one participant per class (got {} depressed, {} control)",
         spec.n_depressed, spec.n_control);
  }
  if (spec.out_dir.empty()) fail("synthetic spec needs an output directory");
  ensure_dir(path_join(spec.out_dir, "audio"));
  ensure_dir(path_join(spec.out_dir, "align"));

  CorpusManifest manifest;
  manifest.split_tag = SplitTag::Train;

  const int total = spec.n_depressed + spec.n_control;
  for (int p = 0; p < total; ++p) {
    const bool depressed = p < spec.n_depressed;
    Rng rng(mix_seed(seed, static_cast<uint64_t>(p)));

    ParticipantRecord rec;
    rec.participant_id = fmt::format("P{:03d}", p + 1);
    rec.depression_label = depressed ? 1 : 0;
    rec.phq8_score = depressed ? 10 + rng.range(0, 14) : rng.range(0, 9);

    const double f0 = rng.uniform(spec.f0_min, spec.f0_max);
    const double jitter = depressed ? spec.dep_formant_jitter : spec.formant_jitter;
    const double amp_lo = depressed ? spec.dep_amp_min : spec.amp_min;
    const double amp_hi = depressed ? spec.dep_amp_max : spec.amp_max;

    for (int u = 0; u < spec.utterances_per_participant; ++u) {
      std::vector<double> audio;
      std::string tier = "phone,start,end\n";
      int cursor = 0;  // samples

      auto add_interval = [&](const char* phone, int n) {
        tier += fmt::format("{},{:.7f},{:.7f}\n", phone,
                            static_cast<double>(cursor) / kSampleRate,
                            static_cast<double>(cursor + n) / kSampleRate);
        cursor += n;
      };

      const int tokens = rng.range(spec.tokens_min, spec.tokens_max);
      for (int t = 0; t < tokens; ++t) {
        if (rng.bernoulli(spec.vowel_prob)) {
          const int vclass = rng.range(0, 4);
          const auto& target = kVowels[static_cast<size_t>(vclass)];
          double f1 = target.f1;
          double f2 = target.f2;
          if (depressed) {
            f1 = kCentroidF1 + spec.dep_formant_shrink * (f1 - kCentroidF1);
            f2 = kCentroidF2 + spec.dep_formant_shrink * (f2 - kCentroidF2);
          }
          f1 *= 1.0 + rng.uniform(-jitter, jitter);
          f2 *= 1.0 + rng.uniform(-jitter, jitter);
          const int n = rng.range(static_cast<int>(spec.vowel_dur_min * kSampleRate),
                                  static_cast<int>(spec.vowel_dur_max * kSampleRate));
          const double amp = rng.uniform(amp_lo, amp_hi);
          const double tf0 = f0 * (1.0 + rng.uniform(-0.03, 0.03));
          auto x = vowel_token(n, tf0, f1, f2, amp);
          audio.insert(audio.end(), x.begin(), x.end());
          add_interval(target.arpabet, n);
        } else {
          const int n = rng.range(static_cast<int>(spec.filler_dur_min * kSampleRate),
                                  static_cast<int>(spec.filler_dur_max * kSampleRate));
          const double amp = rng.uniform(spec.filler_amp_min, spec.filler_amp_max);
          auto x = filler_token(n, amp, rng);
          audio.insert(audio.end(), x.begin(), x.end());
          add_interval(kFillers[static_cast<size_t>(rng.range(0, 2))], n);
        }
        if (rng.bernoulli(spec.pause_prob)) {
          const int n = rng.range(static_cast<int>(spec.pause_dur_min * kSampleRate),
                                  static_cast<int>(spec.pause_dur_max * kSampleRate));
          audio.insert(audio.end(), static_cast<size_t>(n), 0.0);
          add_interval("sp", n);
        }
      }

      const std::string stem = fmt::format("{}_u{:02d}", rec.participant_id, u);
      const std::string wav_rel = path_join("audio", stem + ".wav");
      const std::string align_rel = path_join("align", stem + ".csv");
      std::vector<float> samples(audio.size());
      for (size_t i = 0; i < audio.size(); ++i) samples[i] = static_cast<float>(audio[i]);
      write_wav16(path_join(spec.out_dir, wav_rel), samples);
      write_text_atomic(path_join(spec.out_dir, align_rel), tier);

      UtteranceRef ref;
      ref.audio_path = wav_rel;
      ref.alignment_path = align_rel;
      ref.start_offset = 0.0;
      rec.utterances.push_back(std::move(ref));
    }
    manifest.participants.push_back(std::move(rec));
  }
  return manifest;
}

}  // namespace vdep
