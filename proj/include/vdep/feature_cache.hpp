#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vdep/dsp.hpp"
#include "vdep/segmentation.hpp"

namespace vdep {

// Fixed-width float32 records addressed by segment id: a .bin file of
// little-endian rows plus a CSV sidecar (<base>.idx.csv) mapping each id to
// its byte offset. Patches are stored row-major (128, 28) = 3584 floats;
// embeddings are 6 or 2304 floats.
class FloatRecordFile {
 public:
  FloatRecordFile() = default;

  static FloatRecordFile create(int dim);
  static FloatRecordFile load(const std::string& base_path);

  void append(const std::string& id, const float* row);
  void save(const std::string& base_path) const;

  int dim() const { return dim_; }
  size_t size() const { return ids_.size(); }
  bool contains(const std::string& id) const;
  const std::vector<std::string>& ids() const { return ids_; }

  // Row view; throws naming the id when absent.
  Eigen::Map<const Eigen::VectorXf> get(const std::string& id) const;

 private:
  int dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<size_t> offsets_;  // insertion order, id -> row
  std::vector<float> data_;
  std::vector<std::pair<std::string, size_t>> index_;  // sorted for lookup

  size_t find_row(const std::string& id) const;
  void rebuild_index();
};

// Segment table CSV: participant_id,utterance_index,segment_index,start,label.
void write_segment_table(const std::string& path, const std::vector<SegmentRecord>& segments);
std::vector<SegmentRecord> read_segment_table(const std::string& path);

void write_patch_cache(const std::string& base_path,
                       const std::vector<SegmentRecord>& segments,
                       const std::vector<MelPatch>& patches);

struct PatchCache {
  FloatRecordFile records;

  static PatchCache load(const std::string& base_path);
  MelPatch get(const std::string& segment_id) const;
};

}  // namespace vdep
