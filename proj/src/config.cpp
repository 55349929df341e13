#include "vdep/config.hpp"

#include <sstream>

#include "vdep/common.hpp"
#include "vdep/csvio.hpp"
#include "vdep/fileio.hpp"

namespace vdep {

std::string PipelineConfig::manifest_all() const {
  return path_join(data_dir, "manifest.jsonl");
}

std::string PipelineConfig::manifest(SplitTag split) const {
  return path_join(data_dir, fmt::format("manifest_{}.jsonl", to_string(split)));
}

std::string PipelineConfig::segment_table(SplitTag split) const {
  return path_join(cache_dir, fmt::format("segments_{}.csv", to_string(split)));
}

std::string PipelineConfig::patch_cache(SplitTag split) const {
  return path_join(cache_dir, fmt::format("patches_{}", to_string(split)));
}

std::string PipelineConfig::embedding_store(EmbeddingKind kind, SplitTag split) const {
  return path_join(cache_dir,
                   fmt::format("embeddings_{}_{}", to_string(kind), to_string(split)));
}

std::string PipelineConfig::cnn_checkpoint() const {
  return path_join(checkpoint_dir, "cnn.ckpt");
}

std::string PipelineConfig::lstm_checkpoint(EmbeddingKind kind) const {
  return path_join(checkpoint_dir, fmt::format("lstm_{}.ckpt", to_string(kind)));
}

namespace {

template <typename T>
T parse_num(const std::string& key, const std::string& value) {
  std::istringstream ss(value);
  T out;
  ss >> out;
  if (ss.fail() || !ss.eof()) fail("config key '{}': bad numeric value '{}'", key, value);
  return out;
}

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_entry(PipelineConfig& c, const std::string& key,
                        const std::string& value) {
  if (key == "data_dir") c.data_dir = value;
  else if (key == "cache_dir") c.cache_dir = value;
  else if (key == "checkpoint_dir") c.checkpoint_dir = value;
  else if (key == "report_dir") c.report_dir = value;
  else if (key == "seed") c.seed = parse_num<uint64_t>(key, value);
  else if (key == "embedding") c.embedding = value;
  else if (key == "phone_map") c.phone_map = value;
  else if (key == "dev_fraction") c.dev_fraction = parse_num<double>(key, value);
  else if (key == "gen_depressed") c.gen_depressed = parse_num<int>(key, value);
  else if (key == "gen_control") c.gen_control = parse_num<int>(key, value);
  else if (key == "gen_utterances") c.gen_utterances = parse_num<int>(key, value);
  else if (key == "gen_tokens_min") c.gen_tokens_min = parse_num<int>(key, value);
  else if (key == "gen_tokens_max") c.gen_tokens_max = parse_num<int>(key, value);
  else if (key == "cnn_epochs") c.cnn_epochs = parse_num<int>(key, value);
  else if (key == "cnn_batch") c.cnn_batch = parse_num<int>(key, value);
  else if (key == "cnn_lr") c.cnn_lr = parse_num<double>(key, value);
  else if (key == "cnn_l2") c.cnn_l2 = parse_num<double>(key, value);
  else if (key == "cnn_target_f1") c.cnn_target_f1 = parse_num<double>(key, value);
  else if (key == "ct_list") c.ct_list = value;
  else if (key == "lstm_epochs") c.lstm_epochs = parse_num<int>(key, value);
  else if (key == "lstm_batch") c.lstm_batch = parse_num<int>(key, value);
  else if (key == "lstm_lr") c.lstm_lr = parse_num<double>(key, value);
  else if (key == "lstm_l2") c.lstm_l2 = parse_num<double>(key, value);
  else if (key == "lstm_max_steps") c.lstm_max_steps = parse_num<int>(key, value);
  else if (key == "lime_samples") c.lime_samples = parse_num<int>(key, value);
  else if (key == "ridge_alpha") c.ridge_alpha = parse_num<double>(key, value);
  else if (key == "kernel_width") c.kernel_width = parse_num<double>(key, value);
  else if (key == "smooth_window") c.smooth_window = parse_num<int>(key, value);
  else fail("unknown config key '{}'", key);
}

PipelineConfig load_config(const std::string& path) {
  PipelineConfig config;
  const auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) fail("{}: line {}: expected key = value", path, i + 1);
    apply_config_entry(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

std::string config_to_string(const PipelineConfig& c) {
  std::string out;
  auto kv = [&out](const char* k, const auto& v) { out += fmt::format("{} = {}\n", k, v); };
  kv("data_dir", c.data_dir);
  kv("cache_dir", c.cache_dir);
  kv("checkpoint_dir", c.checkpoint_dir);
  kv("report_dir", c.report_dir);
  kv("seed", c.seed);
  kv("embedding", c.embedding);
  kv("phone_map", c.phone_map);
  kv("dev_fraction", c.dev_fraction);
  kv("gen_depressed", c.gen_depressed);
  kv("gen_control", c.gen_control);
  kv("gen_utterances", c.gen_utterances);
  kv("gen_tokens_min", c.gen_tokens_min);
  kv("gen_tokens_max", c.gen_tokens_max);
  kv("cnn_epochs", c.cnn_epochs);
  kv("cnn_batch", c.cnn_batch);
  kv("cnn_lr", c.cnn_lr);
  kv("cnn_l2", c.cnn_l2);
  kv("cnn_target_f1", c.cnn_target_f1);
  kv("ct_list", c.ct_list);
  kv("lstm_epochs", c.lstm_epochs);
  kv("lstm_batch", c.lstm_batch);
  kv("lstm_lr", c.lstm_lr);
  kv("lstm_l2", c.lstm_l2);
  kv("lstm_max_steps", c.lstm_max_steps);
  kv("lime_samples", c.lime_samples);
  kv("ridge_alpha", c.ridge_alpha);
  kv("kernel_width", c.kernel_width);
  kv("smooth_window", c.smooth_window);
  return out;
}

std::vector<double> parse_ct_list(const std::string& list) {
  std::vector<double> cts;
  for (const auto& field : split_csv_line(list)) {
    if (field.empty()) continue;
    cts.push_back(parse_num<double>("ct", field));
  }
  if (cts.empty()) fail("empty confidence threshold list");
  return cts;
}

}  // namespace vdep
