#pragma once

#include <string>

#include "vdep/depression_net.hpp"
#include "vdep/vowel_net.hpp"

namespace vdep {

// Versioned binary checkpoint: magic, a JSON layer-spec header, then the
// parameter tensors (and batch-norm running stats) as little-endian float32
// in a fixed order. The training seed rides in the header.
void save_cnn_checkpoint(const CnnModelF& model, const std::string& path);
CnnModelF load_cnn_checkpoint(const std::string& path);

void save_lstm_checkpoint(const LstmModelF& model, EmbeddingKind kind,
                          const std::string& path);
LstmModelF load_lstm_checkpoint(const std::string& path, EmbeddingKind* kind = nullptr);

}  // namespace vdep
