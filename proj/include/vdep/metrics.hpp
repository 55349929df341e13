#pragma once

#include <vector>

#include <Eigen/Dense>

namespace vdep {

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct MultiClassMetrics {
  std::vector<Prf> per_class;
  Prf macro;  // unweighted means over all classes
  Eigen::MatrixXi confusion;  // (true, predicted)
};

// Zero-denominator conventions: precision/recall are 0 when undefined, F1 is
// 0 when precision + recall is 0.
MultiClassMetrics classification_metrics(const std::vector<int>& labels,
                                         const std::vector<int>& predictions,
                                         int num_classes);

}  // namespace vdep
