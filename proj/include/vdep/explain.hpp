#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vdep/depression_net.hpp"
#include "vdep/rng.hpp"

namespace vdep {

inline constexpr int kLimeChannels = 6;       // Conv 5 channels
inline constexpr int kSmoothWindowSteps = 32; // 4 s at the 125 ms hop

// 1 = channel left alone, 0 = channel perturbed.
struct PerturbMask {
  std::array<int, kLimeChannels> keep{1, 1, 1, 1, 1, 1};

  int perturbed_count() const {
    int k = 0;
    for (int v : keep) k += 1 - v;
    return k;
  }
};

// Draws m ~ U{1..6}, picks m distinct channels, and replaces each chosen
// channel element-wise with draws from the uniform range of that channel's
// original values. x is steps x 6.
std::pair<Eigen::MatrixXd, PerturbMask> perturb_channels(const Eigen::MatrixXd& x,
                                                         Rng& rng);

// exp(-(k/6)^2 / width) over the perturbed-channel count k; 1 when nothing
// is perturbed.
double similarity_weight(const PerturbMask& mask, double kernel_width = 0.25);

// w = (F' S F + alpha I)^-1 F' S y with S = diag(sample_weights), solved via
// LDLT on the regularized normal matrix.
Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                          const Eigen::VectorXd& sample_weights, double alpha);

using SequenceClassifier = std::function<double(const Eigen::MatrixXd&)>;

struct ChannelExplanation {
  std::string sample_id;
  Eigen::Matrix<double, kLimeChannels, 1> weights;
  std::array<int, kLimeChannels> ranks{};  // 1 = largest |w|
  bool degenerate = false;                 // classifier output had no variance
};

// Modified LIME over Conv 5 channel time-series: N perturbed samples plus the
// original appended with similarity weight 0, ridge fit on the masks.
ChannelExplanation lime_explain(const SequenceClassifier& f, const Eigen::MatrixXd& x,
                                int n_samples, uint64_t seed, double alpha = 1.0,
                                double kernel_width = 0.25);

SequenceClassifier make_lstm_classifier(const LstmModelF& model);

struct DecisionTrajectory {
  std::vector<double> raw;       // per-step depression probability
  std::vector<double> smoothed;
  double step_seconds = 0.125;
  int window_steps = kSmoothWindowSteps;
};

// Depression probability from every hidden state through the FC head; the
// last raw value equals classify()'s probability.
DecisionTrajectory decision_trajectory(const LstmModelF& model, const Eigen::MatrixXf& steps,
                                       int window_steps = kSmoothWindowSteps);

// Centered moving average with truncated windows at the edges.
std::vector<double> smooth_series(const std::vector<double>& series, int window_steps);

// census(channel, r) = number of explanations where the channel ranked r+1.
Eigen::Matrix<int, kLimeChannels, kLimeChannels> rank_census(
    const std::vector<ChannelExplanation>& explanations);

std::string explanations_csv(const std::vector<ChannelExplanation>& explanations);
std::string rank_census_csv(const Eigen::Matrix<int, kLimeChannels, kLimeChannels>& census);
std::string trajectory_csv(const DecisionTrajectory& t);
std::string trajectory_svg(const DecisionTrajectory& t, const std::string& title);

}  // namespace vdep
