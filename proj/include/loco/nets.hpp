// Copyright 2026 The loco Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "loco/common.hpp"

// Minimal dense-net core: MLPs and a stacked LSTM with exact reverse-mode
// gradients, Adam, and a versioned float32 checkpoint format. Batches are
// stored one sample per column so layer application is a single GEMM.

namespace loco::nets {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

enum class Activation { Identity, Elu, Tanh };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Elu: return "elu";
    case Activation::Tanh: return "tanh";
  }
  return "?";
}

namespace detail {

template <class S>
inline void apply_activation(Activation act, const Mat<S>& z, Mat<S>& out) {
  switch (act) {
    case Activation::Identity: out = z; return;
    case Activation::Elu:
      out = z.unaryExpr([](S v) { return v > S(0) ? v : S(std::expm1(double(v))); });
      return;
    case Activation::Tanh:
      out = z.array().tanh().matrix();
      return;
  }
}

/// act'(z), computed from z and act(z).
template <class S>
inline Mat<S> activation_derivative(Activation act, const Mat<S>& z, const Mat<S>& a) {
  switch (act) {
    case Activation::Identity: return Mat<S>::Ones(z.rows(), z.cols());
    case Activation::Elu:
      return z.binaryExpr(a, [](S zv, S av) { return zv > S(0) ? S(1) : av + S(1); });
    case Activation::Tanh: return (S(1) - a.array().square()).matrix();
  }
  return Mat<S>();
}

/// act''(z); needed for the discriminator gradient penalty.
template <class S>
inline Mat<S> activation_second_derivative(Activation act, const Mat<S>& z, const Mat<S>& a) {
  switch (act) {
    case Activation::Identity: return Mat<S>::Zero(z.rows(), z.cols());
    case Activation::Elu:
      return z.binaryExpr(a, [](S zv, S av) { return zv > S(0) ? S(0) : av + S(1); });
    case Activation::Tanh: {
      Mat<S> d(z.rows(), z.cols());
      d.array() = S(-2) * a.array() * (S(1) - a.array().square());
      return d;
    }
  }
  return Mat<S>();
}

template <class S>
inline S sigmoid(S x) {
  return S(1) / (S(1) + S(std::exp(double(-x))));
}

}  // namespace detail

/// A named view of one parameter tensor, used by Adam and checkpoints.
template <class S>
struct ParamBlock {
  std::string name;
  S* data = nullptr;
  long rows = 0, cols = 0;
  long size() const { return rows * cols; }
};

/// Orthogonal matrix (QR of a Gaussian sample, sign-fixed), times `gain`.
template <class S>
inline Mat<S> orthogonal(long rows, long cols, double gain, Rng& rng) {
  const long big = std::max(rows, cols), small = std::min(rows, cols);
  MatX a(big, small);
  for (long i = 0; i < big; ++i)
    for (long j = 0; j < small; ++j) a(i, j) = rng.normal();
  Eigen::HouseholderQR<MatX> qr(a);
  MatX q = qr.householderQ() * MatX::Identity(big, small);
  MatX r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (long j = 0; j < small; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  MatX result = (rows >= cols) ? q : MatX(q.transpose());
  return (gain * result).template cast<S>();
}

// ---------------------------------------------------------------------------
// MLP

struct MlpSpec {
  int input_dim = 0;
  std::vector<int> hidden;
  int output_dim = 0;
  Activation hidden_act = Activation::Elu;
  Activation output_act = Activation::Identity;

  int layer_count() const { return int(hidden.size()) + 1; }

  std::vector<int> dims() const {
    std::vector<int> d;
    d.push_back(input_dim);
    for (int h : hidden) d.push_back(h);
    d.push_back(output_dim);
    return d;
  }

  std::string signature() const {
    std::ostringstream os;
    os << "mlp in=" << input_dim << " hidden=";
    for (size_t i = 0; i < hidden.size(); ++i) os << (i ? "," : "") << hidden[i];
    os << " out=" << output_dim << " act=" << activation_name(hidden_act)
       << " out_act=" << activation_name(output_act);
    return os.str();
  }

  void validate() const {
    if (input_dim <= 0 || output_dim <= 0) throw ConfigError("mlp spec: bad dims");
    for (int h : hidden)
      if (h <= 0) throw ConfigError("mlp spec: hidden width must be positive");
  }
};

template <class S>
struct Mlp {
  MlpSpec spec;
  std::vector<Mat<S>> W;  // W[l]: dims[l+1] x dims[l]
  std::vector<Vec<S>> b;

  struct Cache {
    Mat<S> input;
    std::vector<Mat<S>> z;  // pre-activation per layer
    std::vector<Mat<S>> a;  // post-activation per layer (a.back() = output)
  };

  struct Grads {
    std::vector<Mat<S>> dW;
    std::vector<Vec<S>> db;
    void zero() {
      for (auto& m : dW) m.setZero();
      for (auto& v : db) v.setZero();
    }
  };

  void init(Rng& rng, double final_gain = 1.0) {
    spec.validate();
    const auto d = spec.dims();
    const int L = spec.layer_count();
    W.resize(L);
    b.resize(L);
    const double hidden_gain = std::sqrt(2.0);  // ELU-friendly
    for (int l = 0; l < L; ++l) {
      const double gain = (l == L - 1) ? final_gain : hidden_gain;
      W[l] = orthogonal<S>(d[l + 1], d[l], gain, rng);
      b[l] = Vec<S>::Zero(d[l + 1]);
    }
  }

  Grads make_grads() const {
    Grads g;
    g.dW.resize(W.size());
    g.db.resize(b.size());
    for (size_t l = 0; l < W.size(); ++l) {
      g.dW[l] = Mat<S>::Zero(W[l].rows(), W[l].cols());
      g.db[l] = Vec<S>::Zero(b[l].size());
    }
    return g;
  }

  /// x: input_dim x batch. Returns output_dim x batch.
  Mat<S> forward(const Mat<S>& x, Cache* cache = nullptr) const {
    if (x.rows() != spec.input_dim)
      throw ConfigError("mlp forward: input has " + std::to_string(x.rows()) +
                        " rows, spec wants " + std::to_string(spec.input_dim));
    const int L = spec.layer_count();
    if (cache) {
      cache->input = x;
      cache->z.resize(L);
      cache->a.resize(L);
    }
    Mat<S> cur = x;
    for (int l = 0; l < L; ++l) {
      Mat<S> z = (W[l] * cur).colwise() + b[l];
      Mat<S> a;
      detail::apply_activation(l == L - 1 ? spec.output_act : spec.hidden_act, z, a);
      if (cache) {
        cache->z[l] = std::move(z);
        cache->a[l] = a;
      }
      cur = std::move(a);
    }
    return cur;
  }

  /// Reverse pass. Accumulates into `grads`, returns dL/dinput.
  Mat<S> backward(const Cache& cache, const Mat<S>& dy, Grads& grads) const {
    const int L = spec.layer_count();
    if (int(cache.z.size()) != L || dy.rows() != spec.output_dim ||
        dy.cols() != cache.input.cols())
      throw ConfigError("mlp backward: stale or mismatched cache (dy " +
                        std::to_string(dy.rows()) + "x" + std::to_string(dy.cols()) + ")");
    Mat<S> dz = dy.cwiseProduct(
        detail::activation_derivative(spec.output_act, cache.z[L - 1], cache.a[L - 1]));
    for (int l = L - 1; l >= 0; --l) {
      const Mat<S>& below = (l == 0) ? cache.input : cache.a[l - 1];
      grads.dW[l].noalias() += dz * below.transpose();
      grads.db[l] += dz.rowwise().sum();
      if (l == 0) return W[0].transpose() * dz;
      Mat<S> dx = W[l].transpose() * dz;
      dz = dx.cwiseProduct(
          detail::activation_derivative(spec.hidden_act, cache.z[l - 1], cache.a[l - 1]));
    }
    return Mat<S>();
  }

  /// Per-sample input gradient for a scalar, linear-output head:
  /// column b of the result is d D(x_b) / d x_b.
  Mat<S> input_gradient(const Cache& cache) const {
    if (spec.output_dim != 1 || spec.output_act != Activation::Identity)
      throw ConfigError("input_gradient needs a scalar linear output");
    const int L = spec.layer_count();
    Mat<S> t = Mat<S>::Ones(1, cache.input.cols());
    for (int l = L - 1; l >= 0; --l) {
      Mat<S> t2 = W[l].transpose() * t;
      if (l == 0) return t2;
      t = t2.cwiseProduct(
          detail::activation_derivative(spec.hidden_act, cache.z[l - 1], cache.a[l - 1]));
    }
    return Mat<S>();
  }

  /// Adds d/dtheta [ (coef / B) * sum_b ||grad_x D(x_b)||^2 ] to `grads` and
  /// returns that penalty value. `g` must be input_gradient(cache).
  ///
  /// Derivation: with v = g held constant, ||g_b||^2 = v_b . g_b is the
  /// directional derivative of D along v_b, computable by a forward tangent
  /// sweep (t_l); backpropagating the summed tangent output through the
  /// combined primal/tangent graph yields the parameter gradient. The
  /// activation second derivative enters where the tangent crosses a layer.
  S gradient_penalty(const Cache& cache, const Mat<S>& g, S coef, Grads& grads) const {
    const int L = spec.layer_count();
    const long B = cache.input.cols();
    // forward tangent sweep
    std::vector<Mat<S>> t(L + 1), p(L);
    t[0] = g;
    for (int l = 0; l < L; ++l) {
      p[l].noalias() = W[l] * t[l];
      if (l < L - 1)
        t[l + 1] = p[l].cwiseProduct(
            detail::activation_derivative(spec.hidden_act, cache.z[l], cache.a[l]));
    }
    const S penalty = coef * p[L - 1].sum() / S(B);

    // reverse sweep, seeded with d(penalty)/ds_b = 2*coef/B
    const S seed = S(2) * coef / S(B);
    Mat<S> pbar = Mat<S>::Constant(1, B, seed);
    grads.dW[L - 1].noalias() += pbar * t[L - 1].transpose();
    Mat<S> tbar = W[L - 1].transpose() * pbar;
    Mat<S> abar;  // adjoint of a[l], empty means zero
    for (int l = L - 2; l >= 0; --l) {
      const Mat<S> d1 = detail::activation_derivative(spec.hidden_act, cache.z[l], cache.a[l]);
      const Mat<S> d2 =
          detail::activation_second_derivative(spec.hidden_act, cache.z[l], cache.a[l]);
      Mat<S> pbar_l = d1.cwiseProduct(tbar);
      Mat<S> zbar = d2.cwiseProduct(p[l]).cwiseProduct(tbar);
      if (abar.size()) zbar += d1.cwiseProduct(abar);
      const Mat<S>& below = (l == 0) ? cache.input : cache.a[l - 1];
      grads.dW[l].noalias() += pbar_l * t[l].transpose();
      grads.dW[l].noalias() += zbar * below.transpose();
      grads.db[l] += zbar.rowwise().sum();
      if (l > 0) {
        tbar = W[l].transpose() * pbar_l;
        abar = W[l].transpose() * zbar;
      }
    }
    return penalty;
  }

  std::vector<ParamBlock<S>> param_blocks(const std::string& prefix) {
    std::vector<ParamBlock<S>> blocks;
    for (size_t l = 0; l < W.size(); ++l) {
      blocks.push_back({prefix + ".W" + std::to_string(l), W[l].data(), W[l].rows(), W[l].cols()});
      blocks.push_back({prefix + ".b" + std::to_string(l), b[l].data(), b[l].size(), 1});
    }
    return blocks;
  }

  std::vector<ParamBlock<S>> grad_blocks(Grads& g, const std::string& prefix) const {
    std::vector<ParamBlock<S>> blocks;
    for (size_t l = 0; l < g.dW.size(); ++l) {
      blocks.push_back(
          {prefix + ".W" + std::to_string(l), g.dW[l].data(), g.dW[l].rows(), g.dW[l].cols()});
      blocks.push_back({prefix + ".b" + std::to_string(l), g.db[l].data(), g.db[l].size(), 1});
    }
    return blocks;
  }
};

// ---------------------------------------------------------------------------
// Stacked LSTM

struct LstmSpec {
  int input_dim = 0;
  std::vector<int> hidden;  // e.g. {256, 256, 256}

  std::string signature() const {
    std::ostringstream os;
    os << "lstm in=" << input_dim << " hidden=";
    for (size_t i = 0; i < hidden.size(); ++i) os << (i ? "," : "") << hidden[i];
    return os.str();
  }

  void validate() const {
    if (input_dim <= 0 || hidden.empty()) throw ConfigError("lstm spec: bad dims");
    for (int h : hidden)
      if (h <= 0) throw ConfigError("lstm spec: hidden width must be positive");
  }
};

/// Gate row order inside the stacked 4H blocks: input, forget, cell, output.
template <class S>
struct Lstm {
  LstmSpec spec;
  std::vector<Mat<S>> W_ih, W_hh;  // per layer: 4H x in, 4H x H
  std::vector<Vec<S>> bias;        // per layer: 4H

  struct State {
    std::vector<Mat<S>> h, c;  // per layer, H x batch
  };

  struct StepCache {
    Mat<S> x;  // layer-0 input
    std::vector<Mat<S>> h_prev, c_prev, gate_i, gate_f, gate_g, gate_o, c_new, tanh_c, layer_in;
  };

  struct Grads {
    std::vector<Mat<S>> dW_ih, dW_hh;
    std::vector<Vec<S>> dbias;
    void zero() {
      for (auto& m : dW_ih) m.setZero();
      for (auto& m : dW_hh) m.setZero();
      for (auto& v : dbias) v.setZero();
    }
  };

  int layer_count() const { return int(spec.hidden.size()); }
  int output_dim() const { return spec.hidden.back(); }

  void init(Rng& rng) {
    spec.validate();
    const int L = layer_count();
    W_ih.resize(L);
    W_hh.resize(L);
    bias.resize(L);
    int in = spec.input_dim;
    for (int l = 0; l < L; ++l) {
      const int H = spec.hidden[l];
      W_ih[l] = orthogonal<S>(4 * H, in, 1.0, rng);
      W_hh[l] = orthogonal<S>(4 * H, H, 1.0, rng);
      bias[l] = Vec<S>::Zero(4 * H);
      bias[l].segment(H, H).setConstant(S(1));  // forget gate bias
      in = H;
    }
  }

  Grads make_grads() const {
    Grads g;
    g.dW_ih.resize(W_ih.size());
    g.dW_hh.resize(W_hh.size());
    g.dbias.resize(bias.size());
    for (size_t l = 0; l < W_ih.size(); ++l) {
      g.dW_ih[l] = Mat<S>::Zero(W_ih[l].rows(), W_ih[l].cols());
      g.dW_hh[l] = Mat<S>::Zero(W_hh[l].rows(), W_hh[l].cols());
      g.dbias[l] = Vec<S>::Zero(bias[l].size());
    }
    return g;
  }

  State zero_state(long batch) const {
    State s;
    for (int h : spec.hidden) {
      s.h.push_back(Mat<S>::Zero(h, batch));
      s.c.push_back(Mat<S>::Zero(h, batch));
    }
    return s;
  }

  /// Zeroes h and c in the columns where `done` is set (episode boundaries).
  static void reset_columns(State& s, const std::vector<uint8_t>& done) {
    for (size_t l = 0; l < s.h.size(); ++l)
      for (long b = 0; b < s.h[l].cols(); ++b)
        if (done[size_t(b)]) {
          s.h[l].col(b).setZero();
          s.c[l].col(b).setZero();
        }
  }

  /// One time step. Updates `state` in place, returns the top-layer h (m_t).
  Mat<S> step(const Mat<S>& x, State& state, StepCache* cache = nullptr) const {
    if (x.rows() != spec.input_dim)
      throw ConfigError("lstm step: input has " + std::to_string(x.rows()) + " rows, spec wants " +
                        std::to_string(spec.input_dim));
    const int L = layer_count();
    if (cache) {
      cache->x = x;
      cache->h_prev.resize(L);
      cache->c_prev.resize(L);
      cache->gate_i.resize(L);
      cache->gate_f.resize(L);
      cache->gate_g.resize(L);
      cache->gate_o.resize(L);
      cache->c_new.resize(L);
      cache->tanh_c.resize(L);
      cache->layer_in.resize(L);
    }
    Mat<S> cur = x;
    for (int l = 0; l < L; ++l) {
      const int H = spec.hidden[l];
      Mat<S> z = (W_ih[l] * cur + W_hh[l] * state.h[l]).colwise() + bias[l];
      Mat<S> i = z.topRows(H).unaryExpr([](S v) { return detail::sigmoid(v); });
      Mat<S> f = z.middleRows(H, H).unaryExpr([](S v) { return detail::sigmoid(v); });
      Mat<S> g = z.middleRows(2 * H, H).array().tanh().matrix();
      Mat<S> o = z.bottomRows(H).unaryExpr([](S v) { return detail::sigmoid(v); });
      Mat<S> c = f.cwiseProduct(state.c[l]) + i.cwiseProduct(g);
      Mat<S> tc = c.array().tanh().matrix();
      Mat<S> h = o.cwiseProduct(tc);
      if (cache) {
        cache->layer_in[l] = cur;
        cache->h_prev[l] = state.h[l];
        cache->c_prev[l] = state.c[l];
        cache->gate_i[l] = i;
        cache->gate_f[l] = f;
        cache->gate_g[l] = g;
        cache->gate_o[l] = o;
        cache->c_new[l] = c;
        cache->tanh_c[l] = tc;
      }
      state.c[l] = std::move(c);
      state.h[l] = h;
      cur = std::move(h);
    }
    return state.h[L - 1];
  }

  /// Truncated BPTT over a window. `dtop[t]` is dL/d(top h at step t).
  /// Gradients accumulate into `grads`; dL/dx per step is returned when the
  /// caller needs it (empty request -> skipped).
  void backward_window(const std::vector<StepCache>& caches, const std::vector<Mat<S>>& dtop,
                       Grads& grads, std::vector<Mat<S>>* dx_out = nullptr) const {
    const int L = layer_count();
    const int T = int(caches.size());
    if (int(dtop.size()) != T) throw ConfigError("lstm backward: window length mismatch");
    if (dx_out) dx_out->assign(T, Mat<S>());
    std::vector<Mat<S>> dh(L), dc(L);
    const long B = T ? caches[0].x.cols() : 0;
    for (int l = 0; l < L; ++l) {
      dh[l] = Mat<S>::Zero(spec.hidden[l], B);
      dc[l] = Mat<S>::Zero(spec.hidden[l], B);
    }
    for (int t = T - 1; t >= 0; --t) {
      const StepCache& cc = caches[t];
      Mat<S> from_above;  // dL/d(layer input) propagated down the stack
      for (int l = L - 1; l >= 0; --l) {
        const int H = spec.hidden[l];
        Mat<S> dh_l = dh[l];
        if (l == L - 1) dh_l += dtop[t];
        if (l < L - 1) dh_l += from_above;
        const Mat<S>& i = cc.gate_i[l];
        const Mat<S>& f = cc.gate_f[l];
        const Mat<S>& g = cc.gate_g[l];
        const Mat<S>& o = cc.gate_o[l];
        const Mat<S>& tc = cc.tanh_c[l];
        Mat<S> dc_l =
            dc[l] + dh_l.cwiseProduct(o).cwiseProduct((S(1) - tc.array().square()).matrix());
        Mat<S> dz(4 * H, dh_l.cols());
        dz.topRows(H) = dc_l.cwiseProduct(g).cwiseProduct(i).cwiseProduct(
            (S(1) - i.array()).matrix());
        dz.middleRows(H, H) = dc_l.cwiseProduct(cc.c_prev[l]).cwiseProduct(f).cwiseProduct(
            (S(1) - f.array()).matrix());
        dz.middleRows(2 * H, H) =
            dc_l.cwiseProduct(i).cwiseProduct((S(1) - g.array().square()).matrix());
        dz.bottomRows(H) = dh_l.cwiseProduct(tc).cwiseProduct(o).cwiseProduct(
            (S(1) - o.array()).matrix());
        grads.dW_ih[l].noalias() += dz * cc.layer_in[l].transpose();
        grads.dW_hh[l].noalias() += dz * cc.h_prev[l].transpose();
        grads.dbias[l] += dz.rowwise().sum();
        dh[l] = W_hh[l].transpose() * dz;
        dc[l] = dc_l.cwiseProduct(f);
        Mat<S> dx = W_ih[l].transpose() * dz;
        if (l > 0)
          from_above = std::move(dx);
        else if (dx_out)
          (*dx_out)[t] = std::move(dx);
      }
    }
  }

  std::vector<ParamBlock<S>> param_blocks(const std::string& prefix) {
    std::vector<ParamBlock<S>> blocks;
    for (size_t l = 0; l < W_ih.size(); ++l) {
      const std::string p = prefix + ".l" + std::to_string(l);
      blocks.push_back({p + ".W_ih", W_ih[l].data(), W_ih[l].rows(), W_ih[l].cols()});
      blocks.push_back({p + ".W_hh", W_hh[l].data(), W_hh[l].rows(), W_hh[l].cols()});
      blocks.push_back({p + ".b", bias[l].data(), bias[l].size(), 1});
    }
    return blocks;
  }

  std::vector<ParamBlock<S>> grad_blocks(Grads& g, const std::string& prefix) const {
    std::vector<ParamBlock<S>> blocks;
    for (size_t l = 0; l < g.dW_ih.size(); ++l) {
      const std::string p = prefix + ".l" + std::to_string(l);
      blocks.push_back({p + ".W_ih", g.dW_ih[l].data(), g.dW_ih[l].rows(), g.dW_ih[l].cols()});
      blocks.push_back({p + ".W_hh", g.dW_hh[l].data(), g.dW_hh[l].rows(), g.dW_hh[l].cols()});
      blocks.push_back({p + ".b", g.dbias[l].data(), g.dbias[l].size(), 1});
    }
    return blocks;
  }
};

// ---------------------------------------------------------------------------
// Adam

template <class S>
class Adam {
 public:
  explicit Adam(double lr = 3e-4, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void attach(const std::vector<ParamBlock<S>>& params) {
    m_.clear();
    v_.clear();
    for (const auto& p : params) {
      m_.emplace_back(Vec<S>::Zero(p.size()));
      v_.emplace_back(Vec<S>::Zero(p.size()));
    }
  }

  /// Bias-corrected update. A non-finite gradient anywhere skips the whole
  /// update and bumps the skip counter.
  bool step(const std::vector<ParamBlock<S>>& params, const std::vector<ParamBlock<S>>& grads) {
    if (params.size() != grads.size() || params.size() != m_.size())
      throw ConfigError("adam: parameter/gradient block mismatch");
    for (size_t i = 0; i < grads.size(); ++i) {
      if (params[i].size() != grads[i].size())
        throw ConfigError("adam: block size mismatch at " + params[i].name);
      if (!Eigen::Map<const Vec<S>>(grads[i].data, grads[i].size()).allFinite()) {
        ++skipped_;
        return false;
      }
    }
    ++t_;
    const S bc1 = S(1.0 - std::pow(beta1_, double(t_)));
    const S bc2 = S(1.0 - std::pow(beta2_, double(t_)));
    for (size_t i = 0; i < params.size(); ++i) {
      auto p = Eigen::Map<Vec<S>>(params[i].data, params[i].size());
      auto g = Eigen::Map<const Vec<S>>(grads[i].data, grads[i].size());
      m_[i] = S(beta1_) * m_[i] + S(1.0 - beta1_) * g;
      v_[i].array() = S(beta2_) * v_[i].array() + S(1.0 - beta2_) * g.array().square();
      p.array() -=
          S(lr_) * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + S(eps_));
    }
    return true;
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  long step_count() const { return t_; }
  long skipped() const { return skipped_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  long skipped_ = 0;
  std::vector<Vec<S>> m_, v_;
};

// ---------------------------------------------------------------------------
// Checkpoints: magic, version, spec description, named float32 blocks.

inline constexpr uint32_t kCheckpointMagic = 0x4F434F4CU;  // "LOCO"
inline constexpr uint32_t kCheckpointVersion = 1;

namespace detail {
inline void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}
inline uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw IoError("checkpoint: truncated header");
  return v;
}
inline void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, uint32_t(s.size()));
  out.write(s.data(), long(s.size()));
}
inline std::string read_string(std::istream& in) {
  const uint32_t n = read_u32(in);
  if (n > (1u << 20)) throw IoError("checkpoint: implausible string length");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw IoError("checkpoint: truncated string");
  return s;
}
}  // namespace detail

template <class S>
inline void save_checkpoint(const std::string& path, const std::string& description,
                            const std::vector<ParamBlock<S>>& blocks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  detail::write_u32(out, kCheckpointMagic);
  detail::write_u32(out, kCheckpointVersion);
  detail::write_string(out, description);
  detail::write_u32(out, uint32_t(blocks.size()));
  std::vector<float> buf;
  for (const auto& blk : blocks) {
    detail::write_string(out, blk.name);
    detail::write_u32(out, uint32_t(blk.rows));
    detail::write_u32(out, uint32_t(blk.cols));
    buf.resize(size_t(blk.size()));
    for (long i = 0; i < blk.size(); ++i) buf[size_t(i)] = float(blk.data[i]);
    out.write(reinterpret_cast<const char*>(buf.data()), long(buf.size() * 4));
  }
  if (!out) throw IoError("checkpoint write failed: " + path);
}

/// Loads into pre-shaped blocks; the stored description and every block
/// name/shape must match exactly.
template <class S>
inline void load_checkpoint(const std::string& path, const std::string& expected_description,
                            const std::vector<ParamBlock<S>>& blocks) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  if (detail::read_u32(in) != kCheckpointMagic) throw IoError("checkpoint: bad magic");
  if (detail::read_u32(in) != kCheckpointVersion) throw IoError("checkpoint: unsupported version");
  const std::string desc = detail::read_string(in);
  if (desc != expected_description)
    throw IoError("checkpoint: spec mismatch\n  stored:   " + desc +
                  "\n  expected: " + expected_description);
  const uint32_t count = detail::read_u32(in);
  if (count != blocks.size()) throw IoError("checkpoint: block count mismatch");
  std::vector<float> buf;
  for (const auto& blk : blocks) {
    const std::string name = detail::read_string(in);
    const uint32_t rows = detail::read_u32(in);
    const uint32_t cols = detail::read_u32(in);
    if (name != blk.name || long(rows) != blk.rows || long(cols) != blk.cols)
      throw IoError("checkpoint: block mismatch at " + name + " (expected " + blk.name + ")");
    buf.resize(size_t(blk.size()));
    in.read(reinterpret_cast<char*>(buf.data()), long(buf.size() * 4));
    if (!in) throw IoError("checkpoint: truncated block " + name);
    for (long i = 0; i < blk.size(); ++i) blk.data[i] = S(buf[size_t(i)]);
  }
}

inline std::string checkpoint_description(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  if (detail::read_u32(in) != kCheckpointMagic) throw IoError("checkpoint: bad magic");
  if (detail::read_u32(in) != kCheckpointVersion) throw IoError("checkpoint: unsupported version");
  return detail::read_string(in);
}

/// Column gather used by minibatching.
template <class S>
inline Mat<S> gather_cols(const Mat<S>& m, const std::vector<int>& idx) {
  Mat<S> out(m.rows(), long(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) out.col(long(k)) = m.col(idx[k]);
  return out;
}

}  // namespace loco::nets
