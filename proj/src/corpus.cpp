#include "vdep/corpus.hpp"

#include <cmath>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "vdep/common.hpp"
#include "vdep/fileio.hpp"
#include "vdep/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace vdep {

const char* to_string(SplitTag tag) {
  return tag == SplitTag::Train ? "train" : "dev";
}

namespace {

std::string resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute()) return path.string();
  return (base / path).lexically_normal().string();
}

}  // namespace

CorpusManifest load_manifest(const std::string& path, SplitTag tag) {
  const auto lines = read_lines(path);
  const fs::path base = fs::path(path).parent_path();

  CorpusManifest manifest;
  manifest.split_tag = tag;
  std::set<std::string> seen_ids;

  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const std::exception& e) {
      fail("{}: line {}: malformed JSON: {}", path, i + 1, e.what());
    }

    ParticipantRecord rec;
    try {
      rec.participant_id = j.at("participant_id").get<std::string>();
      rec.depression_label = j.at("depression_label").get<int>();
      if (j.contains("phq8_score") && !j["phq8_score"].is_null()) {
        rec.phq8_score = j["phq8_score"].get<int>();
      }
      for (const auto& u : j.at("utterances")) {
        UtteranceRef ref;
        ref.audio_path = u.at("audio").get<std::string>();
        ref.alignment_path = u.at("alignment").get<std::string>();
        ref.start_offset = u.value("start_offset", 0.0);
        rec.utterances.push_back(std::move(ref));
      }
    } catch (const std::exception& e) {
      fail("{}: line {}: {}", path, i + 1, e.what());
    }

    if (rec.depression_label != 0 && rec.depression_label != 1) {
      fail("{}: line {}: depression_label must be 0 or 1", path, i + 1);
    }
    if (rec.phq8_score) {
      if (*rec.phq8_score < 0 || *rec.phq8_score > 24) {
        fail("{}: line {}: phq8_score {} out of range 0..24", path, i + 1, *rec.phq8_score);
      }
      const int expected = *rec.phq8_score >= kPhq8DepressionThreshold ? 1 : 0;
      if (rec.depression_label != expected) {
        fail("{}: line {}: participant '{}': depression_label {} inconsistent with phq8_score {}",
             path, i + 1, rec.participant_id, rec.depression_label, *rec.phq8_score);
      }
    }
    if (rec.utterances.empty()) {
      fail("{}: line {}: participant '{}' has no utterances", path, i + 1, rec.participant_id);
    }
    if (!seen_ids.insert(rec.participant_id).second) {
      fail("{}: line {}: duplicate participant_id '{}'", path, i + 1, rec.participant_id);
    }
    for (auto& u : rec.utterances) {
      u.audio_path = resolve(base, u.audio_path);
      u.alignment_path = resolve(base, u.alignment_path);
      if (!fs::exists(u.audio_path)) {
        fail("{}: participant '{}': missing audio file {}", path, rec.participant_id, u.audio_path);
      }
      if (!fs::exists(u.alignment_path)) {
        fail("{}: participant '{}': missing alignment file {}", path, rec.participant_id,
             u.alignment_path);
      }
      if (u.start_offset < 0) {
        fail("{}: participant '{}': negative start_offset", path, rec.participant_id);
      }
    }
    manifest.participants.push_back(std::move(rec));
  }
  return manifest;
}

void save_manifest(const CorpusManifest& manifest, const std::string& path) {
  std::string out;
  for (const auto& rec : manifest.participants) {
    ordered_json j;
    j["participant_id"] = rec.participant_id;
    j["depression_label"] = rec.depression_label;
    if (rec.phq8_score) j["phq8_score"] = *rec.phq8_score;
    j["utterances"] = ordered_json::array();
    for (const auto& u : rec.utterances) {
      ordered_json ju;
      ju["audio"] = u.audio_path;
      ju["alignment"] = u.alignment_path;
      ju["start_offset"] = u.start_offset;
      j["utterances"].push_back(std::move(ju));
    }
    out += j.dump();
    out += '\n';
  }
  write_text_atomic(path, out);
}

std::pair<CorpusManifest, CorpusManifest> split_train_dev(
    const CorpusManifest& manifest, double dev_fraction, uint64_t seed) {
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) {
    fail("dev_fraction must be in (0, 1), got {}", dev_fraction);
  }

  std::vector<size_t> by_class[2];
  for (size_t i = 0; i < manifest.participants.size(); ++i) {
    by_class[manifest.participants[i].depression_label].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < 2) {
      fail("too few participants with label {} ({}) to place one in each split", c,
           by_class[c].size());
    }
  }

  Rng rng(seed);
  std::set<size_t> dev_indices;
  for (int c = 0; c < 2; ++c) {
    auto& idx = by_class[c];
    rng.shuffle(idx);
    const auto n = static_cast<long>(idx.size());
    long k = std::llround(dev_fraction * static_cast<double>(n));
    k = std::clamp(k, 1L, n - 1);
    for (long i = 0; i < k; ++i) dev_indices.insert(idx[static_cast<size_t>(i)]);
  }

  CorpusManifest train, dev;
  train.split_tag = SplitTag::Train;
  dev.split_tag = SplitTag::Dev;
  for (size_t i = 0; i < manifest.participants.size(); ++i) {
    (dev_indices.count(i) ? dev : train).participants.push_back(manifest.participants[i]);
  }
  return {std::move(train), std::move(dev)};
}

}  // namespace vdep
