#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vdep/dsp.hpp"
#include "vdep/metrics.hpp"
#include "vdep/nn.hpp"
#include "vdep/segmentation.hpp"

namespace vdep {

// One conv block of the vowel CNN: convolution -> ReLU -> batch norm -> max
// pool, in the order the blocks are enumerated.
template <typename T>
struct ConvBlock {
  nn::Conv2d<T> conv;
  nn::BatchNorm2d<T> bn;
  nn::MaxPool2d<T> pool;

  // All intermediate buffers live here so repeated same-shape batches reuse
  // their allocations.
  struct Cache {
    nn::Mat<T> cols;
    int in_n = 0, in_h = 0, in_w = 0;
    nn::BatchAct<T> act;  // relu(conv + bias), the batch-norm input
    typename nn::BatchNorm2d<T>::Cache bn_cache;
    nn::BatchAct<T> bn_out;
    nn::MatI argmax;
    nn::BatchAct<T> d_bn_out, d_act;
    nn::Mat<T> dcols;
  };

  ConvBlock() = default;
  ConvBlock(int in_c, int out_c, int kh, int kw, int ph, int pw)
      : conv(in_c, out_c, kh, kw), bn(out_c), pool(ph, pw) {}

  void forward_train(const nn::BatchAct<T>& x, nn::BatchAct<T>& y, Cache& cache,
                     bool update_running) {
    cache.in_n = x.n;
    cache.in_h = x.h;
    cache.in_w = x.w;
    conv.forward(x, cache.act, &cache.cols, /*fuse_relu=*/true);
    bn.forward_train(cache.act, cache.bn_out, cache.bn_cache, update_running);
    pool.forward(cache.bn_out, y, &cache.argmax);
  }

  void forward_eval(const nn::BatchAct<T>& x, nn::BatchAct<T>& y) const {
    nn::BatchAct<T> act, bn_out;
    conv.forward(x, act, nullptr, /*fuse_relu=*/true);
    bn.forward_eval(act, bn_out);
    pool.forward(bn_out, y, nullptr);
  }

  void backward(Cache& cache, const nn::BatchAct<T>& dy, nn::BatchAct<T>* dx) {
    pool.backward(cache.argmax, dy, cache.in_n, conv.out_c, cache.bn_out.h,
                  cache.bn_out.w, cache.d_bn_out);
    bn.backward(cache.bn_cache, cache.d_bn_out, cache.d_act);
    // relu mask applied in place; act holds the post-relu values
    cache.d_act.m.array() *= (cache.act.m.array() > T(0)).template cast<T>();
    conv.backward(cache.cols, cache.d_act, cache.in_n, cache.in_h, cache.in_w, dx,
                  &cache.dcols);
  }

  void zero_grad() {
    conv.zero_grad();
    bn.zero_grad();
  }
};

// Vowel classification CNN. Forward shape chain on a (1, 128, 28) patch:
// (64,63,28) -> (64,30,28) -> (64,14,14) -> (64,6,6) -> (6,1,1). Block 3
// pools (2,2); the declared output shapes require it even though the layer
// table lists (2,1).
template <typename T>
struct CnnModel {
  ConvBlock<T> block1{1, 64, 3, 1, 2, 1};
  ConvBlock<T> block2{64, 64, 3, 1, 2, 1};
  ConvBlock<T> block3{64, 64, 3, 1, 2, 2};
  ConvBlock<T> block4{64, 64, 3, 3, 2, 2};
  nn::Conv2d<T> conv5{64, kNumVowelClasses, 6, 6};
  uint64_t seed = 0;

  struct Cache {
    typename ConvBlock<T>::Cache b1, b2, b3, b4;
    nn::BatchAct<T> a1, a2, a3, a4;  // pooled block outputs
    nn::Mat<T> cols5;                // 2304 x n, flattened block-4 output
    nn::BatchAct<T> d1, d2, d3, d4;
    int n = 0;
  };

  // logits come out as a (kNumVowelClasses x n) matrix.
  void forward_train(const nn::BatchAct<T>& x, nn::Mat<T>& logits, Cache& cache,
                     bool update_running) {
    nn::BatchAct<T> out;
    cache.n = x.n;
    block1.forward_train(x, cache.a1, cache.b1, update_running);
    block2.forward_train(cache.a1, cache.a2, cache.b2, update_running);
    block3.forward_train(cache.a2, cache.a3, cache.b3, update_running);
    block4.forward_train(cache.a3, cache.a4, cache.b4, update_running);
    conv5.forward(cache.a4, out, &cache.cols5);
    logits = out.m;
  }

  // conv4_flat, when requested, receives the flattened (64,6,6) block-4
  // output, one 2304-long column per sample, in (channel, row, col) order.
  void forward_eval(const nn::BatchAct<T>& x, nn::Mat<T>& logits,
                    nn::Mat<T>* conv4_flat) const {
    nn::BatchAct<T> a1, a2, a3, a4, out;
    block1.forward_eval(x, a1);
    block2.forward_eval(a1, a2);
    block3.forward_eval(a2, a3);
    block4.forward_eval(a3, a4);
    nn::Mat<T> cols;
    conv5.forward(a4, out, conv4_flat ? conv4_flat : &cols);
    logits = out.m;
  }

  void backward(Cache& cache, const nn::Mat<T>& dlogits) {
    nn::BatchAct<T> dout;
    dout.n = cache.n;
    dout.c = kNumVowelClasses;
    dout.h = 1;
    dout.w = 1;
    dout.m = dlogits;
    conv5.backward(cache.cols5, dout, cache.n, 6, 6, &cache.d4);
    block4.backward(cache.b4, cache.d4, &cache.d3);
    block3.backward(cache.b3, cache.d3, &cache.d2);
    block2.backward(cache.b2, cache.d2, &cache.d1);
    block1.backward(cache.b1, cache.d1, nullptr);
  }

  void zero_grad() {
    block1.zero_grad();
    block2.zero_grad();
    block3.zero_grad();
    block4.zero_grad();
    conv5.zero_grad();
  }

  std::vector<nn::ParamRef<T>> params() {
    std::vector<nn::ParamRef<T>> refs;
    auto add = [&refs](auto& mat, auto& grad, bool decay) {
      refs.push_back({mat.data(), grad.data(), mat.size(), decay});
    };
    for (ConvBlock<T>* blk : {&block1, &block2, &block3, &block4}) {
      add(blk->conv.weight, blk->conv.dweight, true);
      add(blk->conv.bias, blk->conv.dbias, false);
      add(blk->bn.gamma, blk->bn.dgamma, false);
      add(blk->bn.beta, blk->bn.dbeta, false);
    }
    add(conv5.weight, conv5.dweight, true);
    add(conv5.bias, conv5.dbias, false);
    return refs;
  }

  // l2 penalty base: all convolution weights, not biases or batch-norm.
  double weight_sq_norm() const {
    double s = 0;
    for (const ConvBlock<T>* blk : {&block1, &block2, &block3, &block4}) {
      s += blk->conv.weight.template cast<double>().array().square().sum();
    }
    s += conv5.weight.template cast<double>().array().square().sum();
    return s;
  }
};

using CnnModelF = CnnModel<float>;

// Seeded fan-in-scaled uniform initialization; batch-norm scale 1, shift 0.
CnnModelF build_cnn(uint64_t seed);

// Labeled 250 ms patches, the unit the CNN trains on.
struct LabeledPatchSet {
  std::vector<MelPatch> patches;
  std::vector<int> labels;  // VowelLabel indices

  size_t size() const { return patches.size(); }
};

// Random oversampling with replacement: every class that occurs is brought up
// to the majority count; originals are all retained, draws appended per class.
std::vector<size_t> oversample_indices(const std::vector<int>& labels, uint64_t seed);
LabeledPatchSet oversample(const LabeledPatchSet& data, uint64_t seed);

struct CnnHyper {
  int batch_size = 64;
  double learning_rate = 1e-3;
  double l2 = 1e-3;
  int max_epochs = 50;
  double target_macro_f1 = 2.0;  // early stop once dev macro-F1 reaches this
  uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_dev_macro_f1;
  int chosen_epoch = 0;  // 1-based
  double initial_loss = 0;
  uint64_t seed = 0;
};

// Training objective evaluated on one batch without touching model state:
// mean cross-entropy plus l2 * sum of squared conv weights.
double cnn_batch_loss(CnnModelF& model, const LabeledPatchSet& data,
                      const std::vector<size_t>& batch, double l2);

// Adam on cross-entropy + l2 over the (already oversampled) training set;
// the model is left at the epoch with the best dev macro-F1 at CT=0.
TrainReport train_cnn(CnnModelF& model, const LabeledPatchSet& train,
                      const LabeledPatchSet& dev, const CnnHyper& hyper);

struct VowelPrediction {
  Eigen::Matrix<float, kNumVowelClasses, 1> logits;  // Conv 5 channels, pre-softmax
  Eigen::Matrix<float, kNumVowelClasses, 1> probabilities;
  VowelLabel predicted = VowelLabel::NotVowel;
  float confidence = 0;  // max probability
};

VowelPrediction infer_vowel(const CnnModelF& model, const MelPatch& patch);

enum class EmbeddingKind { Conv4, Conv5 };

const char* to_string(EmbeddingKind kind);
EmbeddingKind embedding_kind_from_string(const std::string& s);
int embedding_dim(EmbeddingKind kind);  // 2304 / 6

// One row per patch, in input order: flattened block-4 activations or
// pre-softmax Conv 5 logits.
Eigen::MatrixXf extract_embeddings(const CnnModelF& model,
                                   const std::vector<MelPatch>& patches,
                                   EmbeddingKind kind);

struct VowelEvalRow {
  double ct = 0;
  double retained_pct = 0;
  bool defined = false;  // false when the threshold retains nothing
  std::vector<Prf> per_class;
  Prf macro;
};

struct VowelEvalReport {
  std::vector<VowelEvalRow> rows;
  size_t total_segments = 0;
};

// Table-2 protocol: metrics over the segments whose confidence reaches each
// threshold.
VowelEvalReport evaluate_vowels(const CnnModelF& model, const LabeledPatchSet& dev,
                                const std::vector<double>& thresholds);

std::string vowel_eval_csv(const VowelEvalReport& report);
std::string train_report_csv(const TrainReport& report);

}  // namespace vdep
