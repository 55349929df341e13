#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vdep {

inline constexpr int kPhq8DepressionThreshold = 10;

struct UtteranceRef {
  std::string audio_path;      // mono 16 kHz 16-bit PCM WAV
  std::string alignment_path;  // phone tier (CSV or TextGrid)
  double start_offset = 0;     // seconds from the start of the interview
};

struct ParticipantRecord {
  std::string participant_id;
  int depression_label = 0;  // 1 iff PHQ-8 >= 10
  std::optional<int> phq8_score;
  std::vector<UtteranceRef> utterances;
};

enum class SplitTag { Train, Dev };

const char* to_string(SplitTag tag);

struct CorpusManifest {
  SplitTag split_tag = SplitTag::Train;
  std::vector<ParticipantRecord> participants;
};

// JSON-lines manifest, one participant per line. Relative audio/alignment
// paths are resolved against the manifest's directory and every referenced
// file must exist. Validates id uniqueness, label range, PHQ-8 consistency
// with the threshold, and non-empty utterance lists.
CorpusManifest load_manifest(const std::string& path, SplitTag tag = SplitTag::Train);

// Writes paths exactly as stored in the records.
void save_manifest(const CorpusManifest& manifest, const std::string& path);

// Participant-level split with the class ratio approximately preserved; each
// split keeps at least one participant of each class.
std::pair<CorpusManifest, CorpusManifest> split_train_dev(
    const CorpusManifest& manifest, double dev_fraction, uint64_t seed);

}  // namespace vdep
