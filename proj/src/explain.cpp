#include "vdep/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vdep/csvio.hpp"
#include "vdep/segmentation.hpp"

namespace vdep {

std::pair<Eigen::MatrixXd, PerturbMask> perturb_channels(const Eigen::MatrixXd& x,
                                                         Rng& rng) {
  require(x.cols() == kLimeChannels, "perturb_channels: expected 6 channels");
  require(x.rows() > 0, "perturb_channels: empty sequence");

  Eigen::MatrixXd perturbed = x;
  PerturbMask mask;
  const int m = rng.range(1, kLimeChannels);
  for (int j = 0; j < m; ++j) {
    // pick among the channels still unperturbed
    int remaining = static_cast<int>(rng.below(static_cast<uint64_t>(kLimeChannels - j)));
    int channel = -1;
    for (int c = 0; c < kLimeChannels; ++c) {
      if (mask.keep[static_cast<size_t>(c)] == 1 && remaining-- == 0) {
        channel = c;
        break;
      }
    }
    mask.keep[static_cast<size_t>(channel)] = 0;
    const double lo = x.col(channel).minCoeff();
    const double hi = x.col(channel).maxCoeff();
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
      perturbed(t, channel) = rng.uniform(lo, hi);  // degenerates to lo when lo == hi
    }
  }
  return {std::move(perturbed), mask};
}

double similarity_weight(const PerturbMask& mask, double kernel_width) {
  const double frac = static_cast<double>(mask.perturbed_count()) / kLimeChannels;
  return std::exp(-(frac * frac) / kernel_width);
}

Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                          const Eigen::VectorXd& sample_weights, double alpha) {
  require(features.rows() == targets.size(), "ridge_fit: feature/target mismatch");
  require(features.rows() == sample_weights.size(), "ridge_fit: weight count mismatch");
  require(features.rows() >= 1, "ridge_fit: need at least one sample");
  require(alpha > 0, "ridge_fit: alpha must be positive");
  if (!features.allFinite() || !targets.allFinite() || !sample_weights.allFinite()) {
    fail("ridge_fit: non-finite inputs");
  }

  const Eigen::MatrixXd weighted = sample_weights.asDiagonal() * features;
  Eigen::MatrixXd gram = features.transpose() * weighted;
  gram.diagonal().array() += alpha;
  const Eigen::VectorXd rhs = weighted.transpose() * targets;
  return gram.ldlt().solve(rhs);
}

ChannelExplanation lime_explain(const SequenceClassifier& f, const Eigen::MatrixXd& x,
                                int n_samples, uint64_t seed, double alpha,
                                double kernel_width) {
  require(n_samples >= 10, "lime_explain: need at least 10 perturbed samples");

  Eigen::MatrixXd features(n_samples + 1, kLimeChannels);
  Eigen::VectorXd targets(n_samples + 1);
  Eigen::VectorXd weights(n_samples + 1);

  Rng rng(seed);
  for (int i = 0; i < n_samples; ++i) {
    auto [perturbed, mask] = perturb_channels(x, rng);
    double y;
    try {
      y = f(perturbed);
    } catch (const std::exception& e) {
      fail("lime_explain: classifier failed on perturbed sample {}: {}", i, e.what());
    }
    for (int c = 0; c < kLimeChannels; ++c) {
      features(i, c) = mask.keep[static_cast<size_t>(c)];
    }
    targets[i] = y;
    weights[i] = similarity_weight(mask, kernel_width);
  }
  // the original sample enters with similarity 0, as the procedure is written
  features.row(n_samples).setOnes();
  targets[n_samples] = f(x);
  weights[n_samples] = 0.0;

  ChannelExplanation ex;
  ex.weights = ridge_fit(features, targets, weights, alpha);

  const double wsum = weights.sum();
  if (wsum > 0) {
    const double mean = weights.dot(targets) / wsum;
    const double var =
        weights.dot((targets.array() - mean).square().matrix()) / wsum;
    ex.degenerate = var <= 1e-12;
  } else {
    ex.degenerate = true;
  }

  std::array<int, kLimeChannels> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(ex.weights[a]) > std::abs(ex.weights[b]);
  });
  for (int r = 0; r < kLimeChannels; ++r) {
    ex.ranks[static_cast<size_t>(order[static_cast<size_t>(r)])] = r + 1;
  }
  return ex;
}

SequenceClassifier make_lstm_classifier(const LstmModelF& model) {
  return [&model](const Eigen::MatrixXd& x) {
    return classify(model, x.cast<float>()).probability;
  };
}

DecisionTrajectory decision_trajectory(const LstmModelF& model,
                                       const Eigen::MatrixXf& steps, int window_steps) {
  if (steps.rows() == 0) fail("decision_trajectory: empty sequence");
  if (steps.cols() != model.cell.input_dim) {
    fail("decision_trajectory: sequence dim {} != model input dim {}", steps.cols(),
         model.cell.input_dim);
  }

  nn::Mat<float> x = steps.transpose();
  nn::Mat<float> h_all;
  nn::lstm_forward<float>(model.cell, x, h_all, nullptr);

  DecisionTrajectory t;
  t.window_steps = window_steps;
  t.raw.resize(static_cast<size_t>(h_all.cols()));
  for (Eigen::Index i = 0; i < h_all.cols(); ++i) {
    const auto probs = nn::softmax<float>(model.fc.forward(h_all.col(i)));
    t.raw[static_cast<size_t>(i)] = static_cast<double>(probs[1]);
  }
  t.smoothed = smooth_series(t.raw, window_steps);
  return t;
}

std::vector<double> smooth_series(const std::vector<double>& series, int window_steps) {
  require(window_steps >= 1, "smooth_series: window must be >= 1");
  const auto n = static_cast<long>(series.size());
  const long back = window_steps / 2;
  const long fwd = window_steps - 1 - back;
  std::vector<double> out(series.size());
  for (long i = 0; i < n; ++i) {
    const long lo = std::max(0L, i - back);
    const long hi = std::min(n - 1, i + fwd);
    double sum = 0;
    for (long j = lo; j <= hi; ++j) sum += series[static_cast<size_t>(j)];
    out[static_cast<size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

Eigen::Matrix<int, kLimeChannels, kLimeChannels> rank_census(
    const std::vector<ChannelExplanation>& explanations) {
  Eigen::Matrix<int, kLimeChannels, kLimeChannels> census;
  census.setZero();
  for (const auto& ex : explanations) {
    for (int c = 0; c < kLimeChannels; ++c) {
      census(c, ex.ranks[static_cast<size_t>(c)] - 1)++;
    }
  }
  return census;
}

namespace {

std::string channel_name(int c) {
  return to_string(static_cast<VowelLabel>(c));
}

}  // namespace

std::string explanations_csv(const std::vector<ChannelExplanation>& explanations) {
  std::string out = "participant_id";
  for (int c = 0; c < kLimeChannels; ++c) out += fmt::format(",w_{}", channel_name(c));
  for (int c = 0; c < kLimeChannels; ++c) out += fmt::format(",rank_{}", channel_name(c));
  out += ",degenerate\n";
  for (const auto& ex : explanations) {
    out += ex.sample_id;
    for (int c = 0; c < kLimeChannels; ++c) out += "," + csv_num(ex.weights[c]);
    for (int c = 0; c < kLimeChannels; ++c) {
      out += fmt::format(",{}", ex.ranks[static_cast<size_t>(c)]);
    }
    out += fmt::format(",{}\n", ex.degenerate ? 1 : 0);
  }
  return out;
}

std::string rank_census_csv(
    const Eigen::Matrix<int, kLimeChannels, kLimeChannels>& census) {
  std::string out = "channel,rank1,rank2,rank3,rank4,rank5,rank6\n";
  for (int c = 0; c < kLimeChannels; ++c) {
    out += channel_name(c);
    for (int r = 0; r < kLimeChannels; ++r) out += fmt::format(",{}", census(c, r));
    out += "\n";
  }
  return out;
}

std::string trajectory_csv(const DecisionTrajectory& t) {
  std::string out = "step,time_s,raw_p,smoothed_p\n";
  for (size_t i = 0; i < t.raw.size(); ++i) {
    out += fmt::format("{},{},{},{}\n", i, csv_num(static_cast<double>(i) * t.step_seconds, 3),
                       csv_num(t.raw[i]), csv_num(t.smoothed[i]));
  }
  return out;
}

std::string trajectory_svg(const DecisionTrajectory& t, const std::string& title) {
  const double width = 800, height = 300;
  const double ml = 50, mr = 15, mt = 30, mb = 35;
  const double pw = width - ml - mr, ph = height - mt - mb;
  const auto n = static_cast<double>(t.raw.size());

  auto px = [&](size_t i) {
    return ml + (n > 1 ? pw * static_cast<double>(i) / (n - 1) : pw / 2);
  };
  auto py = [&](double p) { return mt + ph * (1.0 - p); };

  auto polyline = [&](const std::vector<double>& s, const char* color, double w) {
    std::string pts;
    for (size_t i = 0; i < s.size(); ++i) {
      pts += fmt::format("{:.2f},{:.2f} ", px(i), py(s[i]));
    }
    return fmt::format(
        "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" points=\"{}\"/>\n",
        color, w, pts);
  };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\">\n",
      width, height, width, height);
  svg += fmt::format(
      "<text x=\"{}\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
      ml, title);
  svg += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
      "stroke=\"#888\"/>\n",
      ml, mt, pw, ph);
  // 0.5 decision reference
  svg += fmt::format(
      "<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#b44\" "
      "stroke-dasharray=\"5,4\"/>\n",
      ml, py(0.5), ml + pw, py(0.5));
  for (double p : {0.0, 0.5, 1.0}) {
    svg += fmt::format(
        "<text x=\"{}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" "
        "text-anchor=\"end\">{:.1f}</text>\n",
        ml - 6, py(p) + 4, p);
  }
  svg += fmt::format(
      "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">time (s), "
      "{} steps of {} s</text>\n",
      ml, height - 10, t.raw.size(), t.step_seconds);
  svg += polyline(t.raw, "#bbd", 1.0);
  svg += polyline(t.smoothed, "#226", 2.0);
  svg += "</svg>\n";
  return svg;
}

}  // namespace vdep
