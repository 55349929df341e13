#pragma once

#include <cstdint>
#include <string>

#include "vdep/corpus.hpp"
#include "vdep/vowel_net.hpp"

namespace vdep {

// Declarative pipeline settings: a `key = value` file, overridable by CLI
// flags (flags win). Every stage derives its artifact paths from these roots.
struct PipelineConfig {
  std::string data_dir = "data";
  std::string cache_dir = "cache";
  std::string checkpoint_dir = "checkpoints";
  std::string report_dir = "reports";
  uint64_t seed = 0;
  std::string embedding = "conv5";
  std::string phone_map;  // optional CSV override of the ARPAbet table
  double dev_fraction = 0.25;

  // generator
  int gen_depressed = 4;
  int gen_control = 8;
  int gen_utterances = 3;
  int gen_tokens_min = 14;
  int gen_tokens_max = 20;

  // vowel CNN
  int cnn_epochs = 50;
  int cnn_batch = 64;
  double cnn_lr = 1e-3;
  double cnn_l2 = 1e-3;
  double cnn_target_f1 = 2.0;  // >1 disables early stop
  std::string ct_list = "0,0.3,0.6,0.9";

  // depression LSTM
  int lstm_epochs = 0;  // 0 -> kind default (conv4: 7, conv5: 39)
  int lstm_batch = 32;
  double lstm_lr = 0.01;
  double lstm_l2 = 1e-3;
  int lstm_max_steps = 300;

  // explainability
  int lime_samples = 1000;
  double ridge_alpha = 1.0;
  double kernel_width = 0.25;
  int smooth_window = 32;

  // derived artifact paths
  std::string manifest_all() const;
  std::string manifest(SplitTag split) const;
  std::string segment_table(SplitTag split) const;
  std::string patch_cache(SplitTag split) const;   // base path (.bin/.idx.csv)
  std::string embedding_store(EmbeddingKind kind, SplitTag split) const;
  std::string cnn_checkpoint() const;
  std::string lstm_checkpoint(EmbeddingKind kind) const;

  EmbeddingKind kind() const { return embedding_kind_from_string(embedding); }
};

PipelineConfig load_config(const std::string& path);
void apply_config_entry(PipelineConfig& config, const std::string& key,
                        const std::string& value);
std::string config_to_string(const PipelineConfig& config);
std::vector<double> parse_ct_list(const std::string& list);

}  // namespace vdep
