#include "vdep/metrics.hpp"

#include "vdep/common.hpp"

namespace vdep {

MultiClassMetrics classification_metrics(const std::vector<int>& labels,
                                         const std::vector<int>& predictions,
                                         int num_classes) {
  require(labels.size() == predictions.size(), "metrics: size mismatch");
  MultiClassMetrics m;
  m.confusion = Eigen::MatrixXi::Zero(num_classes, num_classes);
  for (size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < num_classes, "metrics: label out of range");
    require(predictions[i] >= 0 && predictions[i] < num_classes,
            "metrics: prediction out of range");
    m.confusion(labels[i], predictions[i])++;
  }
  m.per_class.resize(static_cast<size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) {
    const double tp = m.confusion(c, c);
    const double fp = m.confusion.col(c).sum() - tp;
    const double fn = m.confusion.row(c).sum() - tp;
    Prf& p = m.per_class[static_cast<size_t>(c)];
    p.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    p.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    p.f1 = p.precision + p.recall > 0
               ? 2.0 * p.precision * p.recall / (p.precision + p.recall)
               : 0.0;
    m.macro.precision += p.precision;
    m.macro.recall += p.recall;
    m.macro.f1 += p.f1;
  }
  m.macro.precision /= num_classes;
  m.macro.recall /= num_classes;
  m.macro.f1 /= num_classes;
  return m;
}

}  // namespace vdep
