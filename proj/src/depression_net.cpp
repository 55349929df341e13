#include "vdep/depression_net.hpp"

#include <algorithm>
#include <cmath>

#include "vdep/csvio.hpp"

namespace vdep {

std::vector<nn::ParamRef<float>> LstmModelF::params() {
  std::vector<nn::ParamRef<float>> refs;
  auto add = [&refs](auto& w, auto& g, bool decay) {
    refs.push_back({w.data(), g.data(), w.size(), decay});
  };
  add(cell.wx, cell.dwx, true);
  add(cell.wh, cell.dwh, true);
  add(cell.b, cell.db, false);
  add(fc.weight, fc.dweight, true);
  add(fc.bias, fc.dbias, false);
  return refs;
}

double LstmModelF::weight_sq_norm() const {
  double s = cell.wx.cast<double>().array().square().sum();
  s += cell.wh.cast<double>().array().square().sum();
  s += fc.weight.cast<double>().array().square().sum();
  return s;
}

LstmModelF build_lstm(int input_dim, uint64_t seed) {
  LstmModelF model;
  model.seed = seed;
  model.cell = nn::LstmCell<float>(input_dim, kLstmHiddenDim);
  model.fc = nn::Linear<float>(kLstmHiddenDim, kDepClasses);
  Rng rng(seed);
  model.cell.init(rng);
  model.fc.init(rng);
  return model;
}

std::vector<ParticipantSequence> build_sequences(const CorpusManifest& manifest,
                                                 const std::vector<SegmentRecord>& segments,
                                                 const FloatRecordFile& store,
                                                 EmbeddingKind kind) {
  if (store.dim() != embedding_dim(kind)) {
    fail("embedding store dim {} does not match {} ({})", store.dim(), to_string(kind),
         embedding_dim(kind));
  }

  // Segment ids per (participant, utterance), preserving segment order.
  std::vector<ParticipantSequence> out;
  for (const auto& rec : manifest.participants) {
    if (rec.utterances.empty()) fail("participant '{}' has no utterances", rec.participant_id);
    std::vector<const SegmentRecord*> mine;
    for (const auto& s : segments) {
      if (s.participant_id == rec.participant_id) mine.push_back(&s);
    }
    if (mine.empty()) {
      fail("participant '{}' has no segments in the segment table", rec.participant_id);
    }
    std::stable_sort(mine.begin(), mine.end(), [](const auto* a, const auto* b) {
      return std::tie(a->utterance_index, a->segment_index) <
             std::tie(b->utterance_index, b->segment_index);
    });

    ParticipantSequence seq;
    seq.participant_id = rec.participant_id;
    seq.label = rec.depression_label;
    seq.steps.resize(static_cast<Eigen::Index>(mine.size()), store.dim());
    for (size_t i = 0; i < mine.size(); ++i) {
      seq.steps.row(static_cast<Eigen::Index>(i)) = store.get(mine[i]->id()).transpose();
    }
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<ParticipantSequence> duplicate_positives(
    std::vector<ParticipantSequence> sequences) {
  const size_t n = sequences.size();
  for (size_t i = 0; i < n; ++i) {
    if (sequences[i].label == 1) sequences.push_back(sequences[i]);
  }
  return sequences;
}

Eigen::MatrixXf crop_for_training(const Eigen::MatrixXf& steps, int max_steps,
                                  uint64_t seed) {
  require(max_steps >= 1, "crop_for_training: max_steps must be >= 1");
  if (steps.rows() <= max_steps) return steps;
  Rng rng(seed);
  const auto offset = static_cast<Eigen::Index>(
      rng.below(static_cast<uint64_t>(steps.rows() - max_steps) + 1));
  return steps.middleRows(offset, max_steps);
}

int default_lstm_epochs(EmbeddingKind kind) {
  return kind == EmbeddingKind::Conv4 ? 7 : 39;
}

namespace {

double sequence_loss(LstmModelF& model, const Eigen::MatrixXf& steps, int label,
                     bool backprop) {
  nn::Mat<float> x = steps.transpose();  // D x T
  nn::Mat<float> h_all;
  nn::LstmTrace<float> trace;
  nn::lstm_forward<float>(model.cell, x, h_all, backprop ? &trace : nullptr);

  const nn::Vec<float> h_last = h_all.col(h_all.cols() - 1);
  nn::Mat<float> logits = model.fc.forward(h_last);
  nn::Mat<float> dlogits;
  const double ce =
      nn::softmax_cross_entropy<float>(logits, {label}, backprop ? &dlogits : nullptr);
  if (backprop) {
    const nn::Vec<float> dh_last = model.fc.backward(h_last, dlogits.col(0));
    nn::Mat<float> dh = nn::Mat<float>::Zero(kLstmHiddenDim, h_all.cols());
    dh.col(dh.cols() - 1) = dh_last;
    nn::lstm_backward<float>(model.cell, trace, dh, nullptr);
  }
  return ce;
}

}  // namespace

double lstm_batch_loss(LstmModelF& model, const std::vector<ParticipantSequence>& seqs,
                       const std::vector<size_t>& batch,
                       const std::vector<Eigen::MatrixXf>& crops, double l2) {
  double ce = 0;
  for (size_t i : batch) {
    ce += sequence_loss(model, crops[i], seqs[i].label, false);
  }
  return ce / static_cast<double>(batch.size()) + l2 * model.weight_sq_norm();
}

TrainReport train_lstm(LstmModelF& model, const std::vector<ParticipantSequence>& sequences,
                       const LstmHyper& hyper, EmbeddingKind kind) {
  if (sequences.empty()) fail("train_lstm: empty sequence set");
  for (const auto& s : sequences) {
    if (s.steps.cols() != model.cell.input_dim) {
      fail("train_lstm: sequence '{}' dim {} != model input dim {}", s.participant_id,
           s.steps.cols(), model.cell.input_dim);
    }
  }
  const int epochs = hyper.epochs > 0 ? hyper.epochs : default_lstm_epochs(kind);

  TrainReport report;
  report.seed = hyper.seed;

  std::vector<size_t> order(sequences.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  auto crops_for_epoch = [&](int epoch) {
    std::vector<Eigen::MatrixXf> crops(sequences.size());
    for (size_t i = 0; i < sequences.size(); ++i) {
      crops[i] = crop_for_training(sequences[i].steps, hyper.max_steps,
                                   mix_seed(hyper.seed, static_cast<uint64_t>(epoch), i));
    }
    return crops;
  };

  auto batches_of = [&](const std::vector<size_t>& idx) {
    std::vector<std::vector<size_t>> batches;
    for (size_t s = 0; s < idx.size(); s += static_cast<size_t>(hyper.batch_size)) {
      const size_t e = std::min(idx.size(), s + static_cast<size_t>(hyper.batch_size));
      batches.emplace_back(idx.begin() + static_cast<long>(s),
                           idx.begin() + static_cast<long>(e));
    }
    return batches;
  };

  {
    const auto crops = crops_for_epoch(0);
    double sum = 0;
    const auto batches = batches_of(order);
    for (const auto& b : batches) sum += lstm_batch_loss(model, sequences, b, crops, hyper.l2);
    report.initial_loss = sum / static_cast<double>(batches.size());
  }

  auto refs = model.params();
  nn::Adam<float> adam(refs);

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    Rng rng(mix_seed(hyper.seed, static_cast<uint64_t>(epoch)));
    rng.shuffle(order);
    const auto crops = crops_for_epoch(epoch);
    double loss_sum = 0;
    const auto batches = batches_of(order);
    for (size_t bi = 0; bi < batches.size(); ++bi) {
      model.cell.zero_grad();
      model.fc.zero_grad();
      double ce = 0;
      for (size_t i : batches[bi]) {
        ce += sequence_loss(model, crops[i], sequences[i].label, true);
      }
      const auto bn = static_cast<double>(batches[bi].size());
      ce /= bn;
      // gradients were accumulated per sequence; match the mean objective
      model.cell.dwx /= static_cast<float>(bn);
      model.cell.dwh /= static_cast<float>(bn);
      model.cell.db /= static_cast<float>(bn);
      model.fc.dweight /= static_cast<float>(bn);
      model.fc.dbias /= static_cast<float>(bn);

      const double loss = ce + hyper.l2 * model.weight_sq_norm();
      if (!std::isfinite(loss)) {
        fail("train_lstm: non-finite loss at epoch {} batch {}", epoch, bi);
      }
      loss_sum += loss;
      adam.step(hyper.learning_rate, hyper.l2);
    }
    report.epoch_loss.push_back(loss_sum / static_cast<double>(batches.size()));
    report.chosen_epoch = epoch;
  }
  return report;
}

Classification classify(const LstmModelF& model, const Eigen::MatrixXf& steps) {
  if (steps.rows() == 0) fail("classify: empty sequence");
  if (steps.cols() != model.cell.input_dim) {
    fail("classify: sequence dim {} != model input dim {}", steps.cols(),
         model.cell.input_dim);
  }
  nn::Mat<float> x = steps.transpose();
  nn::Mat<float> h_all;
  nn::lstm_forward<float>(model.cell, x, h_all, nullptr);
  const nn::Vec<float> logits = model.fc.forward(h_all.col(h_all.cols() - 1));
  const auto probs = nn::softmax<float>(logits);
  Classification c;
  c.probability = static_cast<double>(probs[1]);
  c.predicted = c.probability >= 0.5 ? 1 : 0;
  return c;
}

DepEvalReport evaluate_depression(const LstmModelF& model,
                                  const std::vector<ParticipantSequence>& dev) {
  if (dev.empty()) fail("evaluate_depression: empty dev set");
  DepEvalReport report;
  std::vector<int> labels, preds;
  for (const auto& seq : dev) {
    const auto c = classify(model, seq.steps);
    report.rows.push_back({seq.participant_id, seq.label, c.predicted, c.probability});
    labels.push_back(seq.label);
    preds.push_back(c.predicted);
  }
  const auto m = classification_metrics(labels, preds, kDepClasses);
  report.control = m.per_class[0];
  report.depression = m.per_class[1];
  report.macro_f1 = m.macro.f1;
  return report;
}

std::string dep_eval_csv(const DepEvalReport& report) {
  std::string out = "precision,recall,f1,macro_f1\n";
  out += fmt::format("{},{},{},{}\n", csv_num(report.depression.precision),
                     csv_num(report.depression.recall), csv_num(report.depression.f1),
                     csv_num(report.macro_f1));
  return out;
}

std::string dep_predictions_csv(const DepEvalReport& report) {
  std::string out = "participant_id,label,predicted,probability\n";
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{},{}\n", r.participant_id, r.label, r.predicted,
                       csv_num(r.probability));
  }
  return out;
}

}  // namespace vdep
