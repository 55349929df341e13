#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "vdep/common.hpp"
#include "vdep/rng.hpp"

// Small dense-layer toolkit behind the two networks. Everything is templated
// on the scalar so training runs in float while gradient tests run the same
// code in double.
namespace vdep::nn {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
using MatI = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

// Batch of 3-D feature maps stored as one matrix: m(c, ((b*h)+i)*w + j).
// Channels sit in the contiguous (column) direction, so per-channel batch
// statistics and GEMM-based convolution both stay dense column sweeps.
template <typename T>
struct BatchAct {
  int n = 0, c = 0, h = 0, w = 0;
  Mat<T> m;

  void resize(int n_, int c_, int h_, int w_) {
    n = n_;
    c = c_;
    h = h_;
    w = w_;
    m.resize(c_, static_cast<Eigen::Index>(n_) * h_ * w_);
  }
  void resize_zero(int n_, int c_, int h_, int w_) {
    resize(n_, c_, h_, w_);
    m.setZero();
  }
  Eigen::Index col(int b, int i, int j) const {
    return (static_cast<Eigen::Index>(b) * h + i) * w + j;
  }
};

template <typename T>
inline Vec<T> softmax(const Vec<T>& z) {
  const T mx = z.maxCoeff();
  Vec<T> e = (z.array() - mx).exp();
  return e / e.sum();
}

// Mean cross-entropy over columns; writes d(loss)/d(logits) if requested.
template <typename T>
inline double softmax_cross_entropy(const Mat<T>& logits, const std::vector<int>& targets,
                                    Mat<T>* dlogits) {
  const Eigen::Index n = logits.cols();
  require(static_cast<size_t>(n) == targets.size(), "softmax_cross_entropy: size mismatch");
  if (dlogits) dlogits->resize(logits.rows(), n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const T mx = logits.col(i).maxCoeff();
    Vec<T> e = (logits.col(i).array() - mx).exp();
    const T sum = e.sum();
    loss -= static_cast<double>(logits(targets[static_cast<size_t>(i)], i) - mx) -
            std::log(static_cast<double>(sum));
    if (dlogits) {
      dlogits->col(i) = e / sum;
      (*dlogits)(targets[static_cast<size_t>(i)], i) -= T(1);
      dlogits->col(i) /= static_cast<T>(n);
    }
  }
  return loss / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Convolution (valid padding, stride 1) via im2col + GEMM.

template <typename T>
struct Conv2d {
  int in_c = 0, out_c = 0, kh = 0, kw = 0;
  Mat<T> weight;  // out_c x (in_c*kh*kw), row-of-filter layout (c, u, v)
  Vec<T> bias;
  Mat<T> dweight;
  Vec<T> dbias;

  Conv2d() = default;
  Conv2d(int in_c_, int out_c_, int kh_, int kw_)
      : in_c(in_c_), out_c(out_c_), kh(kh_), kw(kw_) {
    weight.setZero(out_c, static_cast<Eigen::Index>(in_c) * kh * kw);
    bias.setZero(out_c);
    dweight.setZero(weight.rows(), weight.cols());
    dbias.setZero(out_c);
  }

  void init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_c) * kh * kw);
    for (Eigen::Index j = 0; j < weight.cols(); ++j) {
      for (Eigen::Index i = 0; i < weight.rows(); ++i) {
        weight(i, j) = static_cast<T>(rng.uniform(-bound, bound));
      }
    }
    bias.setZero();
  }

  void im2col(const BatchAct<T>& x, Mat<T>& cols) const {
    const int oh = x.h - kh + 1;
    const int ow = x.w - kw + 1;
    cols.resize(static_cast<Eigen::Index>(in_c) * kh * kw,
                static_cast<Eigen::Index>(x.n) * oh * ow);
    for (int b = 0; b < x.n; ++b) {
      for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) {
          const Eigen::Index out_col = (static_cast<Eigen::Index>(b) * oh + i) * ow + j;
          for (int u = 0; u < kh; ++u) {
            for (int v = 0; v < kw; ++v) {
              const Eigen::Index in_col = x.col(b, i + u, j + v);
              for (int c = 0; c < in_c; ++c) {
                cols((static_cast<Eigen::Index>(c) * kh + u) * kw + v, out_col) =
                    x.m(c, in_col);
              }
            }
          }
        }
      }
    }
  }

  // Optionally fuses the ReLU that always follows this layer in the vowel
  // CNN into the bias pass.
  void forward(const BatchAct<T>& x, BatchAct<T>& y, Mat<T>* cache_cols,
               bool fuse_relu = false) const {
    require(x.c == in_c, "conv: channel mismatch");
    require(x.h >= kh && x.w >= kw, "conv: input smaller than kernel");
    Mat<T> local;
    Mat<T>& cols = cache_cols ? *cache_cols : local;
    im2col(x, cols);
    y.resize(x.n, out_c, x.h - kh + 1, x.w - kw + 1);
    y.m.noalias() = weight * cols;
    if (fuse_relu) {
      y.m = (y.m.colwise() + bias).cwiseMax(T(0));
    } else {
      y.m.colwise() += bias;
    }
  }

  // dx is sized and zeroed here; pass nullptr at the network input.
  void backward(const Mat<T>& cols, const BatchAct<T>& dy, int in_n, int in_h, int in_w,
                BatchAct<T>* dx, Mat<T>* dcols_scratch = nullptr) {
    dweight.noalias() += dy.m * cols.transpose();
    dbias.noalias() += dy.m.rowwise().sum();
    if (!dx) return;
    Mat<T> local;
    Mat<T>& dcols = dcols_scratch ? *dcols_scratch : local;
    dcols.noalias() = weight.transpose() * dy.m;
    dx->resize_zero(in_n, in_c, in_h, in_w);
    const int oh = dy.h;
    const int ow = dy.w;
    for (int b = 0; b < in_n; ++b) {
      for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) {
          const Eigen::Index out_col = (static_cast<Eigen::Index>(b) * oh + i) * ow + j;
          for (int u = 0; u < kh; ++u) {
            for (int v = 0; v < kw; ++v) {
              const Eigen::Index in_col = dx->col(b, i + u, j + v);
              for (int c = 0; c < in_c; ++c) {
                dx->m(c, in_col) +=
                    dcols((static_cast<Eigen::Index>(c) * kh + u) * kw + v, out_col);
              }
            }
          }
        }
      }
    }
  }

  void zero_grad() {
    dweight.setZero();
    dbias.setZero();
  }
};

// ---------------------------------------------------------------------------
// Per-channel batch normalization over (batch, h, w).

template <typename T>
struct BatchNorm2d {
  int channels = 0;
  T momentum = T(0.1);
  T eps = T(1e-5);
  Vec<T> gamma, beta, running_mean, running_var;
  Vec<T> dgamma, dbeta;

  struct Cache {
    Vec<T> invstd;
    Mat<T> xc;  // centered input; normalized values are xc scaled by invstd
  };

  BatchNorm2d() = default;
  explicit BatchNorm2d(int c) : channels(c) {
    gamma = Vec<T>::Ones(c);
    beta = Vec<T>::Zero(c);
    running_mean = Vec<T>::Zero(c);
    running_var = Vec<T>::Ones(c);
    dgamma = Vec<T>::Zero(c);
    dbeta = Vec<T>::Zero(c);
  }

  void forward_train(const BatchAct<T>& x, BatchAct<T>& y, Cache& cache,
                     bool update_running) {
    const auto n = static_cast<T>(x.m.cols());
    Vec<T> mean = x.m.rowwise().mean();
    cache.xc = x.m.colwise() - mean;
    Vec<T> var = cache.xc.array().square().rowwise().mean();
    cache.invstd = (var.array() + eps).rsqrt();
    y.resize(x.n, x.c, x.h, x.w);
    y.m = (cache.xc.array().colwise() * (cache.invstd.array() * gamma.array()))
              .colwise() +
          beta.array();
    if (update_running) {
      const T unbias = x.m.cols() > 1 ? n / (n - T(1)) : T(1);
      running_mean = (T(1) - momentum) * running_mean + momentum * mean;
      running_var = (T(1) - momentum) * running_var + momentum * unbias * var;
    }
  }

  void forward_eval(const BatchAct<T>& x, BatchAct<T>& y) const {
    Vec<T> scale = gamma.array() * (running_var.array() + eps).rsqrt();
    Vec<T> shift = beta.array() - running_mean.array() * scale.array();
    y.resize(x.n, x.c, x.h, x.w);
    y.m = (x.m.array().colwise() * scale.array()).colwise() + shift.array();
  }

  void backward(const Cache& cache, const BatchAct<T>& dy, BatchAct<T>& dx) {
    const auto n = static_cast<T>(dy.m.cols());
    // With xhat = xc * invstd and dxhat = gamma * dy, the per-channel gamma
    // factors out of every sum, so no dxhat matrix is materialized.
    Vec<T> s1 = dy.m.rowwise().sum();
    Vec<T> s2 = (dy.m.array() * cache.xc.array()).rowwise().sum() ;
    s2.array() *= cache.invstd.array();
    dbeta += s1;
    dgamma += s2;
    dx.resize(dy.n, dy.c, dy.h, dy.w);
    dx.m = (((dy.m.array() * n).colwise() - s1.array()) -
            (cache.xc.array().colwise() * (cache.invstd.array() * s2.array())))
               .colwise() *
           (gamma.array() * cache.invstd.array() / n);
  }

  void zero_grad() {
    dgamma.setZero();
    dbeta.setZero();
  }
};

// ---------------------------------------------------------------------------
// Max pooling, kernel == stride, floor output sizes; ties keep the first.

template <typename T>
struct MaxPool2d {
  int ph = 0, pw = 0;

  MaxPool2d() = default;
  MaxPool2d(int ph_, int pw_) : ph(ph_), pw(pw_) {}

  void forward(const BatchAct<T>& x, BatchAct<T>& y, MatI* argmax) const {
    const int oh = x.h / ph;
    const int ow = x.w / pw;
    require(oh > 0 && ow > 0, "maxpool: input smaller than kernel");
    y.resize(x.n, x.c, oh, ow);
    if (argmax) argmax->resize(x.c, y.m.cols());
    for (int b = 0; b < x.n; ++b) {
      for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) {
          const Eigen::Index out_col = y.col(b, i, j);
          for (int c = 0; c < x.c; ++c) {
            T best = x.m(c, x.col(b, i * ph, j * pw));
            Eigen::Index best_col = x.col(b, i * ph, j * pw);
            for (int u = 0; u < ph; ++u) {
              for (int v = 0; v < pw; ++v) {
                const Eigen::Index in_col = x.col(b, i * ph + u, j * pw + v);
                const T val = x.m(c, in_col);
                if (val > best) {
                  best = val;
                  best_col = in_col;
                }
              }
            }
            y.m(c, out_col) = best;
            if (argmax) (*argmax)(c, out_col) = static_cast<int>(best_col);
          }
        }
      }
    }
  }

  void backward(const MatI& argmax, const BatchAct<T>& dy, int in_n, int in_c, int in_h,
                int in_w, BatchAct<T>& dx) const {
    dx.resize_zero(in_n, in_c, in_h, in_w);
    for (Eigen::Index col = 0; col < dy.m.cols(); ++col) {
      for (int c = 0; c < in_c; ++c) {
        dx.m(c, argmax(c, col)) += dy.m(c, col);
      }
    }
  }
};

template <typename T>
inline void relu_forward(const BatchAct<T>& x, BatchAct<T>& y) {
  y.resize(x.n, x.c, x.h, x.w);
  y.m = x.m.cwiseMax(T(0));
}

template <typename T>
inline void relu_backward(const BatchAct<T>& y, const BatchAct<T>& dy, BatchAct<T>& dx) {
  dx.resize(dy.n, dy.c, dy.h, dy.w);
  dx.m = (y.m.array() > T(0)).template cast<T>() * dy.m.array();
}

// ---------------------------------------------------------------------------
// Fully connected layer on single vectors.

template <typename T>
struct Linear {
  Mat<T> weight;  // out x in
  Vec<T> bias;
  Mat<T> dweight;
  Vec<T> dbias;

  Linear() = default;
  Linear(int in, int out) {
    weight.setZero(out, in);
    bias.setZero(out);
    dweight.setZero(out, in);
    dbias.setZero(out);
  }

  void init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(weight.cols()));
    for (Eigen::Index j = 0; j < weight.cols(); ++j) {
      for (Eigen::Index i = 0; i < weight.rows(); ++i) {
        weight(i, j) = static_cast<T>(rng.uniform(-bound, bound));
      }
    }
    bias.setZero();
  }

  Vec<T> forward(const Vec<T>& x) const { return weight * x + bias; }

  Vec<T> backward(const Vec<T>& x, const Vec<T>& dout) {
    dweight.noalias() += dout * x.transpose();
    dbias.noalias() += dout;
    return weight.transpose() * dout;
  }

  void zero_grad() {
    dweight.setZero();
    dbias.setZero();
  }
};

// ---------------------------------------------------------------------------
// Single-layer LSTM cell. Gate blocks are stacked [input; forget; candidate;
// output] in the 4H dimension.

template <typename T>
struct LstmCell {
  int input_dim = 0, hidden_dim = 0;
  Mat<T> wx;  // 4H x D
  Mat<T> wh;  // 4H x H
  Vec<T> b;   // 4H
  Mat<T> dwx, dwh;
  Vec<T> db;

  LstmCell() = default;
  LstmCell(int input_dim_, int hidden_dim_)
      : input_dim(input_dim_), hidden_dim(hidden_dim_) {
    wx.setZero(4 * hidden_dim, input_dim);
    wh.setZero(4 * hidden_dim, hidden_dim);
    b.setZero(4 * hidden_dim);
    dwx.setZero(wx.rows(), wx.cols());
    dwh.setZero(wh.rows(), wh.cols());
    db.setZero(b.size());
  }

  void init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    auto fill = [&](Mat<T>& m) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
          m(i, j) = static_cast<T>(rng.uniform(-bound, bound));
        }
      }
    };
    fill(wx);
    fill(wh);
    b.setZero();
    // forget-gate bias 1 so the cell starts with a usable memory horizon
    b.segment(hidden_dim, hidden_dim).setOnes();
  }

  void zero_grad() {
    dwx.setZero();
    dwh.setZero();
    db.setZero();
  }
};

template <typename T>
struct LstmTrace {
  Mat<T> x;       // D x T
  Mat<T> gates;   // 4H x T, post-activation
  Mat<T> c;       // H x T
  Mat<T> h;       // H x T
  Mat<T> tanh_c;  // H x T
};

template <typename T>
inline Vec<T> sigmoid(const Vec<T>& z) {
  return ((-z.array()).exp() + T(1)).inverse();
}

// Forward over a D x T sequence. Fills all hidden states into h_all (H x T);
// records the full trace only when one is supplied.
template <typename T>
inline void lstm_forward(const LstmCell<T>& cell, const Mat<T>& x, Mat<T>& h_all,
                         LstmTrace<T>* trace) {
  const int hd = cell.hidden_dim;
  const Eigen::Index steps = x.cols();
  require(x.rows() == cell.input_dim, "lstm: input dimension mismatch");
  require(steps > 0, "lstm: empty sequence");

  h_all.resize(hd, steps);
  if (trace) {
    trace->x = x;
    trace->gates.resize(4 * hd, steps);
    trace->c.resize(hd, steps);
    trace->h.resize(hd, steps);
    trace->tanh_c.resize(hd, steps);
  }

  Vec<T> h_prev = Vec<T>::Zero(hd);
  Vec<T> c_prev = Vec<T>::Zero(hd);
  Vec<T> z(4 * hd);
  for (Eigen::Index t = 0; t < steps; ++t) {
    z.noalias() = cell.wx * x.col(t);
    z.noalias() += cell.wh * h_prev;
    z += cell.b;
    Vec<T> i = sigmoid<T>(z.head(hd));
    Vec<T> f = sigmoid<T>(z.segment(hd, hd));
    Vec<T> g = z.segment(2 * hd, hd).array().tanh();
    Vec<T> o = sigmoid<T>(z.tail(hd));
    Vec<T> c = f.array() * c_prev.array() + i.array() * g.array();
    Vec<T> tc = c.array().tanh();
    Vec<T> h = o.array() * tc.array();
    h_all.col(t) = h;
    if (trace) {
      trace->gates.col(t) << i, f, g, o;
      trace->c.col(t) = c;
      trace->h.col(t) = h;
      trace->tanh_c.col(t) = tc;
    }
    h_prev.swap(h);
    c_prev.swap(c);
  }
}

// BPTT. dh_upstream holds d(loss)/d(h_t) for every step (zero where unused).
template <typename T>
inline void lstm_backward(LstmCell<T>& cell, const LstmTrace<T>& trace,
                          const Mat<T>& dh_upstream, Mat<T>* dx) {
  const int hd = cell.hidden_dim;
  const Eigen::Index steps = trace.x.cols();
  if (dx) dx->resize(cell.input_dim, steps);

  Vec<T> dh_next = Vec<T>::Zero(hd);
  Vec<T> dc_next = Vec<T>::Zero(hd);
  Vec<T> dz(4 * hd);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto i = trace.gates.col(t).head(hd).array();
    const auto f = trace.gates.col(t).segment(hd, hd).array();
    const auto g = trace.gates.col(t).segment(2 * hd, hd).array();
    const auto o = trace.gates.col(t).tail(hd).array();
    const auto tc = trace.tanh_c.col(t).array();

    Vec<T> dh = dh_upstream.col(t) + dh_next;
    Vec<T> dc = dc_next.array() + dh.array() * o * (T(1) - tc.square());
    Vec<T> c_prev = t > 0 ? Vec<T>(trace.c.col(t - 1)) : Vec<T>(Vec<T>::Zero(hd));

    dz.head(hd) = dc.array() * g * i * (T(1) - i);                       // input gate
    dz.segment(hd, hd) = dc.array() * c_prev.array() * f * (T(1) - f);   // forget gate
    dz.segment(2 * hd, hd) = dc.array() * i * (T(1) - g.square());       // candidate
    dz.tail(hd) = dh.array() * tc * o * (T(1) - o);                      // output gate

    cell.dwx.noalias() += dz * trace.x.col(t).transpose();
    if (t > 0) cell.dwh.noalias() += dz * trace.h.col(t - 1).transpose();
    cell.db.noalias() += dz;
    if (dx) dx->col(t).noalias() = cell.wx.transpose() * dz;

    dh_next.noalias() = cell.wh.transpose() * dz;
    dc_next = dc.array() * f;
  }
}

// ---------------------------------------------------------------------------
// Adam over raw parameter/gradient spans. The l2 penalty lambda*sum(w^2) on
// decaying parameters enters as 2*lambda*w added to the gradient.

template <typename T>
struct ParamRef {
  T* w = nullptr;
  T* g = nullptr;
  Eigen::Index n = 0;
  bool decay = false;
};

template <typename T>
class Adam {
 public:
  explicit Adam(std::vector<ParamRef<T>> refs) : refs_(std::move(refs)) {
    for (const auto& r : refs_) {
      m_.push_back(Vec<T>::Zero(r.n));
      v_.push_back(Vec<T>::Zero(r.n));
    }
  }

  void step(double lr, double l2) {
    ++t_;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, t_);
    const double c2 = 1.0 - std::pow(b2, t_);
    for (size_t k = 0; k < refs_.size(); ++k) {
      auto& r = refs_[k];
      for (Eigen::Index i = 0; i < r.n; ++i) {
        double g = static_cast<double>(r.g[i]);
        if (r.decay) g += 2.0 * l2 * static_cast<double>(r.w[i]);
        const double m = b1 * static_cast<double>(m_[k][i]) + (1.0 - b1) * g;
        const double v = b2 * static_cast<double>(v_[k][i]) + (1.0 - b2) * g * g;
        m_[k][i] = static_cast<T>(m);
        v_[k][i] = static_cast<T>(v);
        r.w[i] -= static_cast<T>(lr * (m / c1) / (std::sqrt(v / c2) + eps));
      }
    }
  }

  static void zero(std::vector<ParamRef<T>>& refs) {
    for (auto& r : refs) {
      for (Eigen::Index i = 0; i < r.n; ++i) r.g[i] = T(0);
    }
  }

 private:
  std::vector<ParamRef<T>> refs_;
  std::vector<Vec<T>> m_, v_;
  long t_ = 0;
};

}  // namespace vdep::nn
