#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vdep {

// Conv 5 channel order. NotVowel is last so the vowel classes line up with
// their embedding channels 0..4.
enum class VowelLabel : int { A = 0, E = 1, I = 2, O = 3, U = 4, NotVowel = 5 };

inline constexpr int kNumVowelClasses = 6;

const char* to_string(VowelLabel v);
std::optional<VowelLabel> vowel_label_from_string(const std::string& s);

struct PhoneInterval {
  std::string phone;  // aligner symbol, ARPAbet-style; "sp"/"sil"/"" kept as-is
  double start = 0;   // seconds
  double end = 0;
};

// Reads a phone tier from either the CSV format (header "phone,start,end")
// or a Praat TextGrid (first IntervalTier named "phone"). Intervals must be
// time-ordered and non-overlapping.
std::vector<PhoneInterval> parse_alignment(const std::string& path);

using PhoneMapping = std::map<std::string, VowelLabel>;

// ARPAbet nuclei for the five-vowel inventory; diphthongs map by nucleus.
PhoneMapping default_phone_mapping();

// CSV override with header "phone,vowel", vowel in {A,E,I,O,U}.
PhoneMapping load_phone_mapping(const std::string& path);

// Stress digits are stripped before lookup; unknown symbols map to nothing.
std::optional<VowelLabel> map_phone(const std::string& phone,
                                    const PhoneMapping& mapping);

inline constexpr double kSegmentSeconds = 0.250;
inline constexpr double kSegmentHopSeconds = 0.125;
inline constexpr int kSegmentHopSamples = 2000;

struct Span {
  double start = 0;
  double end = 0;

  double length() const { return end - start; }
};

// 250 ms windows every 125 ms; a trailing window shorter than 250 ms is
// dropped. Throws for utterances shorter than one window.
std::vector<Span> window_utterance(double duration);

// Vowel label of one 250 ms span against a phone tier:
//  - a vowel qualifies when more than 80% of it lies inside the span or it
//    covers more than half of the span (full containment always qualifies);
//  - the first qualifying vowel in order of appearance wins;
//  - otherwise NotVowel.
VowelLabel label_segment(const Span& span, const std::vector<PhoneInterval>& tier,
                         const PhoneMapping& mapping);

struct SegmentRecord {
  std::string participant_id;
  int utterance_index = 0;
  int segment_index = 0;  // ordinal within the utterance
  double start = 0;       // span is [start, start + 0.250]
  VowelLabel label = VowelLabel::NotVowel;

  std::string id() const;  // "participant:utterance:segment"
};

std::vector<SegmentRecord> segment_utterance(const std::string& participant_id,
                                             int utterance_index, double duration,
                                             const std::vector<PhoneInterval>& tier,
                                             const PhoneMapping& mapping);

}  // namespace vdep
