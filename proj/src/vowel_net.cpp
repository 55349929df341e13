#include "vdep/vowel_net.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "vdep/csvio.hpp"

namespace vdep {

namespace {

void fill_batch(const LabeledPatchSet& data, const std::vector<size_t>& batch,
                nn::BatchAct<float>& x, std::vector<int>& targets) {
  x.resize(static_cast<int>(batch.size()), 1, kNumMels, kPatchFrames);
  targets.resize(batch.size());
  for (size_t b = 0; b < batch.size(); ++b) {
    const auto& p = data.patches[batch[b]].values;
    for (int i = 0; i < kNumMels; ++i) {
      for (int j = 0; j < kPatchFrames; ++j) {
        x.m(0, x.col(static_cast<int>(b), i, j)) = p(i, j);
      }
    }
    targets[b] = data.labels[batch[b]];
  }
}

struct BatchPrediction {
  std::vector<int> predicted;
  std::vector<float> confidence;
};

BatchPrediction predict_all(const CnnModelF& model, const LabeledPatchSet& data) {
  BatchPrediction out;
  out.predicted.resize(data.size());
  out.confidence.resize(data.size());
  constexpr size_t kChunk = 256;
  nn::BatchAct<float> x;
  std::vector<int> targets;
  for (size_t start = 0; start < data.size(); start += kChunk) {
    const size_t n = std::min(kChunk, data.size() - start);
    std::vector<size_t> batch(n);
    for (size_t i = 0; i < n; ++i) batch[i] = start + i;
    fill_batch(data, batch, x, targets);
    nn::Mat<float> logits;
    model.forward_eval(x, logits, nullptr);
    for (size_t i = 0; i < n; ++i) {
      const auto probs = nn::softmax<float>(logits.col(static_cast<Eigen::Index>(i)));
      Eigen::Index arg;
      out.confidence[start + i] = probs.maxCoeff(&arg);
      out.predicted[start + i] = static_cast<int>(arg);
    }
  }
  return out;
}

}  // namespace

CnnModelF build_cnn(uint64_t seed) {
  CnnModelF model;
  model.seed = seed;
  Rng rng(seed);
  model.block1.conv.init(rng);
  model.block2.conv.init(rng);
  model.block3.conv.init(rng);
  model.block4.conv.init(rng);
  model.conv5.init(rng);
  return model;
}

std::vector<size_t> oversample_indices(const std::vector<int>& labels, uint64_t seed) {
  if (labels.empty()) fail("oversample: empty dataset");
  std::map<int, std::vector<size_t>> by_class;
  for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  size_t majority = 0;
  for (const auto& [c, idx] : by_class) majority = std::max(majority, idx.size());

  std::vector<size_t> out(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) out[i] = i;
  Rng rng(seed);
  for (const auto& [c, idx] : by_class) {
    for (size_t k = idx.size(); k < majority; ++k) {
      out.push_back(idx[rng.below(idx.size())]);
    }
  }
  return out;
}

LabeledPatchSet oversample(const LabeledPatchSet& data, uint64_t seed) {
  const auto idx = oversample_indices(data.labels, seed);
  LabeledPatchSet out;
  out.patches.reserve(idx.size());
  out.labels.reserve(idx.size());
  for (size_t i : idx) {
    out.patches.push_back(data.patches[i]);
    out.labels.push_back(data.labels[i]);
  }
  return out;
}

double cnn_batch_loss(CnnModelF& model, const LabeledPatchSet& data,
                      const std::vector<size_t>& batch, double l2) {
  nn::BatchAct<float> x;
  std::vector<int> targets;
  fill_batch(data, batch, x, targets);
  nn::Mat<float> logits;
  typename CnnModelF::Cache cache;
  model.forward_train(x, logits, cache, /*update_running=*/false);
  const double ce = nn::softmax_cross_entropy<float>(logits, targets, nullptr);
  return ce + l2 * model.weight_sq_norm();
}

TrainReport train_cnn(CnnModelF& model, const LabeledPatchSet& train,
                      const LabeledPatchSet& dev, const CnnHyper& hyper) {
  if (train.size() == 0) fail("train_cnn: empty training set");
  if (dev.size() == 0) fail("train_cnn: empty dev set");
  require(train.labels.size() == train.patches.size(), "train_cnn: label/patch mismatch");

  TrainReport report;
  report.seed = hyper.seed;

  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

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
    double sum = 0;
    const auto batches = batches_of(order);
    for (const auto& b : batches) sum += cnn_batch_loss(model, train, b, hyper.l2);
    report.initial_loss = sum / static_cast<double>(batches.size());
  }

  auto refs = model.params();
  nn::Adam<float> adam(refs);

  CnnModelF best = model;
  double best_f1 = -1.0;

  nn::BatchAct<float> x;
  std::vector<int> targets;
  nn::Mat<float> logits, dlogits;
  typename CnnModelF::Cache cache;
  for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    Rng rng(mix_seed(hyper.seed, static_cast<uint64_t>(epoch)));
    rng.shuffle(order);
    double loss_sum = 0;
    const auto batches = batches_of(order);
    for (size_t bi = 0; bi < batches.size(); ++bi) {
      fill_batch(train, batches[bi], x, targets);
      model.forward_train(x, logits, cache, /*update_running=*/true);
      const double ce = nn::softmax_cross_entropy<float>(logits, targets, &dlogits);
      const double loss = ce + hyper.l2 * model.weight_sq_norm();
      if (!std::isfinite(loss)) {
        fail("train_cnn: non-finite loss at epoch {} batch {}", epoch, bi);
      }
      loss_sum += loss;
      model.zero_grad();
      model.backward(cache, dlogits);
      adam.step(hyper.learning_rate, hyper.l2);
    }
    report.epoch_loss.push_back(loss_sum / static_cast<double>(batches.size()));

    const auto eval = evaluate_vowels(model, dev, {0.0});
    const double f1 = eval.rows[0].macro.f1;
    report.epoch_dev_macro_f1.push_back(f1);
    if (f1 > best_f1) {
      best_f1 = f1;
      best = model;
      report.chosen_epoch = epoch;
    }
    if (best_f1 >= hyper.target_macro_f1) break;
  }

  model = best;
  return report;
}

VowelPrediction infer_vowel(const CnnModelF& model, const MelPatch& patch) {
  if (patch.values.rows() != kNumMels || patch.values.cols() != kPatchFrames) {
    fail("infer_vowel: patch shape ({}, {}) != ({}, {})", patch.values.rows(),
         patch.values.cols(), kNumMels, kPatchFrames);
  }
  LabeledPatchSet one;
  one.patches.push_back(patch);
  one.labels.push_back(0);
  nn::BatchAct<float> x;
  std::vector<int> targets;
  fill_batch(one, {0}, x, targets);
  nn::Mat<float> logits;
  model.forward_eval(x, logits, nullptr);

  VowelPrediction pred;
  pred.logits = logits.col(0);
  const auto probs = nn::softmax<float>(logits.col(0));
  pred.probabilities = probs;
  Eigen::Index arg;
  pred.confidence = probs.maxCoeff(&arg);
  pred.predicted = static_cast<VowelLabel>(arg);
  return pred;
}

const char* to_string(EmbeddingKind kind) {
  return kind == EmbeddingKind::Conv4 ? "conv4" : "conv5";
}

EmbeddingKind embedding_kind_from_string(const std::string& s) {
  if (s == "conv4") return EmbeddingKind::Conv4;
  if (s == "conv5") return EmbeddingKind::Conv5;
  fail("unknown embedding kind '{}' (expected conv4 or conv5)", s);
}

int embedding_dim(EmbeddingKind kind) {
  return kind == EmbeddingKind::Conv4 ? 2304 : kNumVowelClasses;
}

Eigen::MatrixXf extract_embeddings(const CnnModelF& model,
                                   const std::vector<MelPatch>& patches,
                                   EmbeddingKind kind) {
  if (patches.empty()) fail("extract_embeddings: no patches");
  const int dim = embedding_dim(kind);
  Eigen::MatrixXf out(static_cast<Eigen::Index>(patches.size()), dim);

  constexpr size_t kChunk = 256;
  LabeledPatchSet view;
  nn::BatchAct<float> x;
  std::vector<int> targets;
  for (size_t start = 0; start < patches.size(); start += kChunk) {
    const size_t n = std::min(kChunk, patches.size() - start);
    view.patches.assign(patches.begin() + static_cast<long>(start),
                        patches.begin() + static_cast<long>(start + n));
    view.labels.assign(n, 0);
    std::vector<size_t> batch(n);
    for (size_t i = 0; i < n; ++i) batch[i] = i;
    fill_batch(view, batch, x, targets);
    nn::Mat<float> logits, conv4_flat;
    model.forward_eval(x, logits, kind == EmbeddingKind::Conv4 ? &conv4_flat : nullptr);
    const nn::Mat<float>& src = kind == EmbeddingKind::Conv4 ? conv4_flat : logits;
    for (size_t i = 0; i < n; ++i) {
      out.row(static_cast<Eigen::Index>(start + i)) =
          src.col(static_cast<Eigen::Index>(i)).transpose();
    }
  }
  return out;
}

VowelEvalReport evaluate_vowels(const CnnModelF& model, const LabeledPatchSet& dev,
                                const std::vector<double>& thresholds) {
  if (dev.size() == 0) fail("evaluate_vowels: empty dev set");
  for (double ct : thresholds) {
    if (!(ct >= 0.0 && ct < 1.0)) fail("confidence threshold {} outside [0, 1)", ct);
  }
  const auto pred = predict_all(model, dev);

  VowelEvalReport report;
  report.total_segments = dev.size();
  for (double ct : thresholds) {
    VowelEvalRow row;
    row.ct = ct;
    std::vector<int> labels, preds;
    for (size_t i = 0; i < dev.size(); ++i) {
      if (pred.confidence[i] >= static_cast<float>(ct)) {
        labels.push_back(dev.labels[i]);
        preds.push_back(pred.predicted[i]);
      }
    }
    row.retained_pct = 100.0 * static_cast<double>(labels.size()) /
                       static_cast<double>(dev.size());
    if (labels.empty()) {
      row.defined = false;
      const double nan = std::nan("");
      row.per_class.assign(kNumVowelClasses, Prf{nan, nan, nan});
      row.macro = Prf{nan, nan, nan};
    } else {
      row.defined = true;
      const auto m = classification_metrics(labels, preds, kNumVowelClasses);
      row.per_class = m.per_class;
      row.macro = m.macro;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string vowel_eval_csv(const VowelEvalReport& report) {
  std::string out = "ct,segments_pct";
  for (int c = 0; c < kNumVowelClasses; ++c) {
    const std::string name = to_string(static_cast<VowelLabel>(c));
    for (const char* metric : {"precision", "recall", "f1"}) {
      out += fmt::format(",{}_{}", name, metric);
    }
  }
  out += ",macro_precision,macro_recall,macro_f1\n";
  for (const auto& row : report.rows) {
    out += fmt::format("{},{}", csv_num(row.ct, 2), csv_num(row.retained_pct, 4));
    for (const auto& p : row.per_class) {
      out += fmt::format(",{},{},{}", csv_num(p.precision), csv_num(p.recall),
                         csv_num(p.f1));
    }
    out += fmt::format(",{},{},{}\n", csv_num(row.macro.precision),
                       csv_num(row.macro.recall), csv_num(row.macro.f1));
  }
  return out;
}

std::string train_report_csv(const TrainReport& report) {
  std::string out;
  out += fmt::format("# seed={}\n", report.seed);
  out += fmt::format("# chosen_epoch={}\n", report.chosen_epoch);
  out += fmt::format("# initial_loss={}\n", csv_num(report.initial_loss));
  out += "epoch,loss,dev_macro_f1\n";
  for (size_t e = 0; e < report.epoch_loss.size(); ++e) {
    const double f1 = e < report.epoch_dev_macro_f1.size()
                          ? report.epoch_dev_macro_f1[e]
                          : std::nan("");
    out += fmt::format("{},{},{}\n", e + 1, csv_num(report.epoch_loss[e]), csv_num(f1));
  }
  return out;
}

}  // namespace vdep
