#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vdep/corpus.hpp"
#include "vdep/feature_cache.hpp"
#include "vdep/metrics.hpp"
#include "vdep/nn.hpp"
#include "vdep/vowel_net.hpp"

namespace vdep {

inline constexpr int kLstmHiddenDim = 128;
inline constexpr int kDepClasses = 2;  // 0 control, 1 depressed

struct ParticipantSequence {
  std::string participant_id;
  int label = 0;
  Eigen::MatrixXf steps;  // T x dim, segment order within and across utterances
};

// One LSTM layer (128 units) plus a fully connected head to the two-class
// logits.
struct LstmModelF {
  nn::LstmCell<float> cell;
  nn::Linear<float> fc;
  uint64_t seed = 0;

  std::vector<nn::ParamRef<float>> params();
  double weight_sq_norm() const;  // wx, wh and fc weights; biases excluded
};

LstmModelF build_lstm(int input_dim, uint64_t seed);

// Concatenates each participant's utterance embeddings in manifest order.
// Throws naming the first segment whose embedding is missing.
std::vector<ParticipantSequence> build_sequences(const CorpusManifest& manifest,
                                                 const std::vector<SegmentRecord>& segments,
                                                 const FloatRecordFile& store,
                                                 EmbeddingKind kind);

// Every depressed sequence appears twice: originals first, then the copies.
std::vector<ParticipantSequence> duplicate_positives(
    std::vector<ParticipantSequence> sequences);

// Whole sequence when it fits, otherwise a seeded uniformly-random contiguous
// window of max_steps.
Eigen::MatrixXf crop_for_training(const Eigen::MatrixXf& steps, int max_steps,
                                  uint64_t seed);

struct LstmHyper {
  int batch_size = 32;
  double learning_rate = 0.01;
  double l2 = 1e-3;
  int epochs = 0;  // 0 -> kind default (Conv4: 7, Conv5: 39)
  int max_steps = 300;
  uint64_t seed = 0;
};

int default_lstm_epochs(EmbeddingKind kind);

double lstm_batch_loss(LstmModelF& model, const std::vector<ParticipantSequence>& seqs,
                       const std::vector<size_t>& batch,
                       const std::vector<Eigen::MatrixXf>& crops, double l2);

// Adam on final-step cross-entropy + l2 over already-duplicated sequences; a
// fresh seeded crop is drawn per sequence each epoch.
TrainReport train_lstm(LstmModelF& model, const std::vector<ParticipantSequence>& sequences,
                       const LstmHyper& hyper, EmbeddingKind kind);

struct Classification {
  double probability = 0;  // depression class
  int predicted = 0;       // probability >= 0.5
};

Classification classify(const LstmModelF& model, const Eigen::MatrixXf& steps);

struct DepEvalReport {
  Prf depression;      // class-1 metrics
  Prf control;         // class-0 metrics
  double macro_f1 = 0; // mean of the two class F1 values

  struct Row {
    std::string participant_id;
    int label = 0;
    int predicted = 0;
    double probability = 0;
  };
  std::vector<Row> rows;
};

DepEvalReport evaluate_depression(const LstmModelF& model,
                                  const std::vector<ParticipantSequence>& dev);

std::string dep_eval_csv(const DepEvalReport& report);
std::string dep_predictions_csv(const DepEvalReport& report);

}  // namespace vdep
