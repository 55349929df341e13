#include "vdep/segmentation.hpp"

#include <algorithm>
#include <cmath>

#include "vdep/common.hpp"
#include "vdep/csvio.hpp"
#include "vdep/fileio.hpp"

namespace vdep {

const char* to_string(VowelLabel v) {
  switch (v) {
    case VowelLabel::A: return "A";
    case VowelLabel::E: return "E";
    case VowelLabel::I: return "I";
    case VowelLabel::O: return "O";
    case VowelLabel::U: return "U";
    case VowelLabel::NotVowel: return "NOT_VOWEL";
  }
  return "?";
}

std::optional<VowelLabel> vowel_label_from_string(const std::string& s) {
  if (s == "A") return VowelLabel::A;
  if (s == "E") return VowelLabel::E;
  if (s == "I") return VowelLabel::I;
  if (s == "O") return VowelLabel::O;
  if (s == "U") return VowelLabel::U;
  if (s == "NOT_VOWEL") return VowelLabel::NotVowel;
  return std::nullopt;
}

namespace {

void validate_tier(const std::vector<PhoneInterval>& tier, const std::string& path) {
  for (size_t i = 0; i < tier.size(); ++i) {
    const auto& iv = tier[i];
    if (!(iv.start < iv.end)) {
      fail("{}: interval {} has start {} >= end {}", path, i, iv.start, iv.end);
    }
    if (i > 0) {
      if (iv.start < tier[i - 1].start) {
        fail("{}: intervals {} and {} are out of order", path, i - 1, i);
      }
      if (iv.start < tier[i - 1].end - 1e-9) {
        fail("{}: intervals {} and {} overlap", path, i - 1, i);
      }
    }
  }
}

std::vector<PhoneInterval> parse_alignment_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) fail("{}: empty alignment file", path);
  std::vector<PhoneInterval> tier;
  size_t first = 0;
  if (lines[0].rfind("phone,", 0) == 0) first = 1;  // header
  for (size_t i = first; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 3) fail("{}: line {}: expected 3 fields, got {}", path, i + 1, f.size());
    PhoneInterval iv;
    iv.phone = f[0];
    try {
      iv.start = std::stod(f[1]);
      iv.end = std::stod(f[2]);
    } catch (const std::exception&) {
      fail("{}: line {}: unparsable time value", path, i + 1);
    }
    tier.push_back(std::move(iv));
  }
  return tier;
}

// Minimal TextGrid reader: scans for the first IntervalTier named "phone"
// and collects its xmin/xmax/text triples. Handles the long format written
// by Praat and by forced aligners.
std::vector<PhoneInterval> parse_alignment_textgrid(const std::string& path) {
  const auto lines = read_lines(path);

  auto value_after = [](const std::string& line, const char* key) -> std::optional<std::string> {
    const size_t k = line.find(key);
    if (k == std::string::npos) return std::nullopt;
    const size_t eq = line.find('=', k);
    if (eq == std::string::npos) return std::nullopt;
    std::string v = line.substr(eq + 1);
    const size_t b = v.find_first_not_of(" \t");
    if (b == std::string::npos) return std::string();
    size_t e = v.find_last_not_of(" \t");
    v = v.substr(b, e - b + 1);
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    return v;
  };

  std::vector<PhoneInterval> tier;
  bool in_interval_tier = false;
  bool in_phone_tier = false;
  PhoneInterval cur;
  int have = 0;  // bit 1: xmin, bit 2: xmax

  for (const auto& raw : lines) {
    if (auto cls = value_after(raw, "class")) {
      if (in_phone_tier) break;  // next tier starts; done
      in_interval_tier = (*cls == "IntervalTier");
      continue;
    }
    if (in_interval_tier && !in_phone_tier) {
      if (auto name = value_after(raw, "name")) {
        if (*name == "phone" || *name == "phones") in_phone_tier = true;
        else in_interval_tier = false;
      }
      continue;
    }
    if (!in_phone_tier) continue;

    if (auto v = value_after(raw, "xmin")) {
      try { cur.start = std::stod(*v); } catch (...) { fail("{}: bad xmin '{}'", path, *v); }
      have |= 1;
    } else if (auto v2 = value_after(raw, "xmax")) {
      try { cur.end = std::stod(*v2); } catch (...) { fail("{}: bad xmax '{}'", path, *v2); }
      have |= 2;
    } else if (auto t = value_after(raw, "text")) {
      if (have == 3) {
        cur.phone = *t;
        tier.push_back(cur);
      }
      have = 0;
    }
  }
  if (!in_phone_tier) fail("{}: no IntervalTier named \"phone\"", path);
  // The tier-level xmin/xmax precede the first interval and leave a spurious
  // record only if a text line follows them, which the grammar forbids.
  return tier;
}

}  // namespace

std::vector<PhoneInterval> parse_alignment(const std::string& path) {
  const std::string head = read_text_file(path).substr(0, 64);
  std::vector<PhoneInterval> tier;
  if (head.find("TextGrid") != std::string::npos) {
    tier = parse_alignment_textgrid(path);
  } else {
    tier = parse_alignment_csv(path);
  }
  validate_tier(tier, path);
  return tier;
}

PhoneMapping default_phone_mapping() {
  return PhoneMapping{
      {"AA", VowelLabel::A}, {"AH", VowelLabel::A}, {"AY", VowelLabel::A},
      {"AW", VowelLabel::A},
      {"EH", VowelLabel::E}, {"EY", VowelLabel::E}, {"AE", VowelLabel::E},
      {"ER", VowelLabel::E},
      {"IY", VowelLabel::I}, {"IH", VowelLabel::I},
      {"AO", VowelLabel::O}, {"OW", VowelLabel::O}, {"OY", VowelLabel::O},
      {"UW", VowelLabel::U}, {"UH", VowelLabel::U},
  };
}

PhoneMapping load_phone_mapping(const std::string& path) {
  const auto lines = read_lines(path);
  PhoneMapping mapping;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    if (i == 0 && lines[i].rfind("phone,", 0) == 0) continue;
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 2) fail("{}: line {}: expected phone,vowel", path, i + 1);
    auto v = vowel_label_from_string(f[1]);
    if (!v || *v == VowelLabel::NotVowel) {
      fail("{}: line {}: '{}' is not a vowel class", path, i + 1, f[1]);
    }
    mapping[f[0]] = *v;
  }
  if (mapping.empty()) fail("{}: empty phone mapping", path);
  return mapping;
}

std::optional<VowelLabel> map_phone(const std::string& phone,
                                    const PhoneMapping& mapping) {
  std::string base = phone;
  while (!base.empty() && base.back() >= '0' && base.back() <= '9') base.pop_back();
  const auto it = mapping.find(base);
  if (it == mapping.end()) return std::nullopt;
  return it->second;
}

std::vector<Span> window_utterance(double duration) {
  if (!(duration >= kSegmentSeconds)) {
    fail("utterance of {:.3f} s is shorter than one {:.0f} ms segment", duration,
         kSegmentSeconds * 1000);
  }
  const int last = static_cast<int>(
      std::floor((duration - kSegmentSeconds) / kSegmentHopSeconds + 1e-9));
  std::vector<Span> spans;
  spans.reserve(last + 1);
  for (int k = 0; k <= last; ++k) {
    const double s = k * kSegmentHopSeconds;
    spans.push_back(Span{s, s + kSegmentSeconds});
  }
  return spans;
}

VowelLabel label_segment(const Span& span, const std::vector<PhoneInterval>& tier,
                         const PhoneMapping& mapping) {
  const double span_len = span.length();
  for (const auto& iv : tier) {
    const auto vowel = map_phone(iv.phone, mapping);
    if (!vowel) continue;
    const double overlap = std::min(iv.end, span.end) - std::max(iv.start, span.start);
    if (overlap <= 0) continue;
    const bool fully_inside = iv.start >= span.start && iv.end <= span.end;
    const bool qualifies = fully_inside ||
                           overlap / (iv.end - iv.start) > 0.8 ||
                           overlap / span_len > 0.5;
    if (qualifies) return *vowel;
  }
  return VowelLabel::NotVowel;
}

std::string SegmentRecord::id() const {
  return fmt::format("{}:{}:{}", participant_id, utterance_index, segment_index);
}

std::vector<SegmentRecord> segment_utterance(const std::string& participant_id,
                                             int utterance_index, double duration,
                                             const std::vector<PhoneInterval>& tier,
                                             const PhoneMapping& mapping) {
  const auto spans = window_utterance(duration);
  std::vector<SegmentRecord> records;
  records.reserve(spans.size());
  for (size_t k = 0; k < spans.size(); ++k) {
    SegmentRecord r;
    r.participant_id = participant_id;
    r.utterance_index = utterance_index;
    r.segment_index = static_cast<int>(k);
    r.start = spans[k].start;
    r.label = label_segment(spans[k], tier, mapping);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace vdep
