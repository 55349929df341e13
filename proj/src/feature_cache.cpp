#include "vdep/feature_cache.hpp"

#include <algorithm>
#include <cstring>

#include "vdep/common.hpp"
#include "vdep/csvio.hpp"
#include "vdep/fileio.hpp"

namespace vdep {

FloatRecordFile FloatRecordFile::create(int dim) {
  require(dim > 0, "record file: dim must be positive");
  FloatRecordFile f;
  f.dim_ = dim;
  return f;
}

void FloatRecordFile::append(const std::string& id, const float* row) {
  ids_.push_back(id);
  offsets_.push_back(data_.size());
  data_.insert(data_.end(), row, row + dim_);
  index_.clear();  // rebuilt lazily
}

void FloatRecordFile::save(const std::string& base_path) const {
  write_binary_atomic(base_path + ".bin", data_.data(), data_.size() * sizeof(float));
  std::string idx = "segment_id,offset\n";
  for (size_t i = 0; i < ids_.size(); ++i) {
    idx += fmt::format("{},{}\n", ids_[i], offsets_[i] * sizeof(float));
  }
  write_text_atomic(base_path + ".idx.csv", idx);
}

FloatRecordFile FloatRecordFile::load(const std::string& base_path) {
  FloatRecordFile f;
  const std::string bytes = read_text_file(base_path + ".bin");
  if (bytes.size() % sizeof(float) != 0) fail("{}.bin: truncated float data", base_path);
  f.data_.resize(bytes.size() / sizeof(float));
  std::memcpy(f.data_.data(), bytes.data(), bytes.size());

  const auto lines = read_lines(base_path + ".idx.csv");
  require(!lines.empty() && lines[0] == "segment_id,offset",
          base_path + ".idx.csv: bad header");
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 2) fail("{}.idx.csv: line {}: expected 2 fields", base_path, i + 1);
    f.ids_.push_back(fields[0]);
    f.offsets_.push_back(std::stoull(fields[1]) / sizeof(float));
  }
  if (f.ids_.empty()) fail("{}.idx.csv: empty cache", base_path);
  if (f.data_.size() % f.ids_.size() != 0) {
    fail("{}: data size {} not divisible by {} records", base_path, f.data_.size(),
         f.ids_.size());
  }
  f.dim_ = static_cast<int>(f.data_.size() / f.ids_.size());
  f.rebuild_index();
  return f;
}

void FloatRecordFile::rebuild_index() {
  index_.clear();
  index_.reserve(ids_.size());
  for (size_t i = 0; i < ids_.size(); ++i) index_.emplace_back(ids_[i], i);
  std::sort(index_.begin(), index_.end());
}

size_t FloatRecordFile::find_row(const std::string& id) const {
  if (index_.size() != ids_.size()) {
    const_cast<FloatRecordFile*>(this)->rebuild_index();
  }
  const auto it = std::lower_bound(
      index_.begin(), index_.end(), id,
      [](const auto& entry, const std::string& key) { return entry.first < key; });
  if (it == index_.end() || it->first != id) fail("missing cached record for segment {}", id);
  return it->second;
}

bool FloatRecordFile::contains(const std::string& id) const {
  if (index_.size() != ids_.size()) {
    const_cast<FloatRecordFile*>(this)->rebuild_index();
  }
  const auto it = std::lower_bound(
      index_.begin(), index_.end(), id,
      [](const auto& entry, const std::string& key) { return entry.first < key; });
  return it != index_.end() && it->first == id;
}

Eigen::Map<const Eigen::VectorXf> FloatRecordFile::get(const std::string& id) const {
  const size_t row = find_row(id);
  return {data_.data() + offsets_[row], dim_};
}

void write_segment_table(const std::string& path,
                         const std::vector<SegmentRecord>& segments) {
  std::string out = "participant_id,utterance_index,segment_index,start,label\n";
  for (const auto& s : segments) {
    out += fmt::format("{},{},{},{},{}\n", s.participant_id, s.utterance_index,
                       s.segment_index, csv_num(s.start, 6), to_string(s.label));
  }
  write_text_atomic(path, out);
}

std::vector<SegmentRecord> read_segment_table(const std::string& path) {
  const auto lines = read_lines(path);
  require(!lines.empty() &&
              lines[0] == "participant_id,utterance_index,segment_index,start,label",
          path + ": bad segment table header");
  std::vector<SegmentRecord> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 5) fail("{}: line {}: expected 5 fields", path, i + 1);
    SegmentRecord r;
    r.participant_id = f[0];
    r.utterance_index = std::stoi(f[1]);
    r.segment_index = std::stoi(f[2]);
    r.start = std::stod(f[3]);
    const auto label = vowel_label_from_string(f[4]);
    if (!label) fail("{}: line {}: unknown label '{}'", path, i + 1, f[4]);
    r.label = *label;
    out.push_back(std::move(r));
  }
  return out;
}

void write_patch_cache(const std::string& base_path,
                       const std::vector<SegmentRecord>& segments,
                       const std::vector<MelPatch>& patches) {
  require(segments.size() == patches.size(), "patch cache: segment/patch mismatch");
  auto file = FloatRecordFile::create(kNumMels * kPatchFrames);
  std::vector<float> row(static_cast<size_t>(kNumMels) * kPatchFrames);
  for (size_t i = 0; i < segments.size(); ++i) {
    const auto& v = patches[i].values;
    for (int r = 0; r < kNumMels; ++r) {
      for (int c = 0; c < kPatchFrames; ++c) {
        row[static_cast<size_t>(r) * kPatchFrames + c] = v(r, c);
      }
    }
    file.append(segments[i].id(), row.data());
  }
  file.save(base_path);
}

PatchCache PatchCache::load(const std::string& base_path) {
  PatchCache cache;
  cache.records = FloatRecordFile::load(base_path);
  if (cache.records.dim() != kNumMels * kPatchFrames) {
    fail("{}: record dim {} is not a (128, 28) patch", base_path, cache.records.dim());
  }
  return cache;
}

MelPatch PatchCache::get(const std::string& segment_id) const {
  const auto row = records.get(segment_id);
  MelPatch p;
  p.values.resize(kNumMels, kPatchFrames);
  for (int r = 0; r < kNumMels; ++r) {
    for (int c = 0; c < kPatchFrames; ++c) {
      p.values(r, c) = row[r * kPatchFrames + c];
    }
  }
  return p;
}

}  // namespace vdep
