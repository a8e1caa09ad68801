// Copyright 2026 The CMR Authors. All Rights Reserved.
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

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmr/error.hpp"

namespace cmr::embed {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Named trainable tensor with its gradient accumulator.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  bool frozen = false;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Mat::Zero(rows, cols)), grad(Mat::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

using ParamList = std::vector<Param*>;

inline void glorot_init(Param& p, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
  std::uniform_real_distribution<double> u(-limit, limit);
  for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = u(rng);
}

struct Linear {
  Param weight;  // out x in
  Param bias;    // out x 1

  Linear() = default;
  Linear(const std::string& name, Eigen::Index in, Eigen::Index out, std::mt19937_64& rng)
      : weight(name + ".weight", out, in), bias(name + ".bias", out, 1) {
    glorot_init(weight, rng);
  }

  Eigen::Index in_dim() const { return weight.value.cols(); }
  Eigen::Index out_dim() const { return weight.value.rows(); }

  Vec forward(const Vec& x) const {
    if (x.size() != in_dim()) fail(ErrorCode::kDimMismatch, weight.name + ": expected input of size " + std::to_string(in_dim()));
    return weight.value * x + bias.value.col(0);
  }

  /// Accumulates parameter gradients and returns the input gradient.
  Vec backward(const Vec& x, const Vec& dy) {
    weight.grad.noalias() += dy * x.transpose();
    bias.grad.col(0) += dy;
    return weight.value.transpose() * dy;
  }

  void collect(ParamList& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

/// Two-layer perceptron: affine, tanh, affine.
struct Mlp {
  Linear hidden;
  Linear output;

  struct Cache {
    Vec x;
    Vec h;
  };

  Mlp() = default;
  Mlp(const std::string& name, Eigen::Index in, Eigen::Index width, Eigen::Index out, std::mt19937_64& rng)
      : hidden(name + ".hidden", in, width, rng), output(name + ".output", width, out, rng) {}

  Vec forward(const Vec& x, Cache* cache = nullptr) const {
    Vec h = hidden.forward(x).array().tanh().matrix();
    Vec y = output.forward(h);
    if (cache) *cache = {x, std::move(h)};
    return y;
  }

  Vec backward(const Cache& c, const Vec& dy) {
    const Vec dh = output.backward(c.h, dy);
    const Vec dpre = dh.array() * (1.0 - c.h.array().square());
    return hidden.backward(c.x, dpre);
  }

  void collect(ParamList& out) {
    hidden.collect(out);
    output.collect(out);
  }
};

/// Layer normalization without affine parameters.
struct LayerNormCache {
  Vec y;
  double inv_std = 0;
};

inline Vec layer_norm(const Vec& x, double eps, LayerNormCache* cache = nullptr) {
  const double mean = x.mean();
  const Vec centered = x.array() - mean;
  const double var = centered.squaredNorm() / static_cast<double>(x.size());
  const double inv_std = 1.0 / std::sqrt(var + eps);
  Vec y = centered * inv_std;
  if (cache) *cache = {y, inv_std};
  return y;
}

inline Vec layer_norm_backward(const LayerNormCache& c, const Vec& dy) {
  const double n = static_cast<double>(dy.size());
  const double sum_dy = dy.sum();
  const double sum_dy_y = dy.dot(c.y);
  return (c.inv_std / n) * (n * dy.array() - sum_dy - c.y.array() * sum_dy_y).matrix();
}

/// Inverted dropout mask: kept units scaled by 1/(1-p), dropped units zero.
inline Vec dropout_mask(Eigen::Index n, double p, std::mt19937_64& rng) {
  Vec mask(n);
  std::bernoulli_distribution keep(1.0 - p);
  const double scale = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < n; ++i) mask[i] = keep(rng) ? scale : 0.0;
  return mask;
}

struct NormalizeCache {
  Vec y;
  double norm = 0;
};

inline Vec l2_normalize(const Vec& x, NormalizeCache* cache = nullptr) {
  const double n = x.norm();
  if (!(n > 0) || !std::isfinite(n)) fail(ErrorCode::kZeroVector, "cannot l2-normalize a zero or non-finite vector");
  Vec y = x / n;
  if (cache) *cache = {y, n};
  return y;
}

inline Vec l2_normalize_backward(const NormalizeCache& c, const Vec& dy) {
  return (dy - c.y * c.y.dot(dy)) / c.norm;
}

/// Multi-head self-attention over a short token sequence (one token per row).
struct MultiHeadSelfAttention {
  Linear query, key, value, out;
  int heads = 1;

  struct Cache {
    RowMat x, q, k, v, o;
    std::vector<RowMat> attn;  // per head, tokens x tokens
  };

  MultiHeadSelfAttention() = default;
  MultiHeadSelfAttention(const std::string& name, Eigen::Index dim, int num_heads, std::mt19937_64& rng)
      : query(name + ".query", dim, dim, rng),
        key(name + ".key", dim, dim, rng),
        value(name + ".value", dim, dim, rng),
        out(name + ".out", dim, dim, rng),
        heads(num_heads) {
    if (num_heads <= 0 || dim % num_heads != 0)
      fail(ErrorCode::kInvalidConfig, "attention heads must divide the embedding dimension");
  }

  static RowMat affine_rows(const Linear& l, const RowMat& x) {
    RowMat y = x * l.weight.value.transpose();
    y.rowwise() += l.bias.value.col(0).transpose();
    return y;
  }

  static RowMat affine_rows_backward(Linear& l, const RowMat& x, const RowMat& dy) {
    l.weight.grad.noalias() += dy.transpose() * x;
    l.bias.grad.col(0) += dy.colwise().sum().transpose();
    return dy * l.weight.value;
  }

  RowMat forward(const RowMat& x, Cache* cache = nullptr) const {
    const Eigen::Index d = x.cols();
    const Eigen::Index dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    Cache c;
    c.x = x;
    c.q = affine_rows(query, x);
    c.k = affine_rows(key, x);
    c.v = affine_rows(value, x);
    c.o = RowMat::Zero(x.rows(), d);
    for (int h = 0; h < heads; ++h) {
      RowMat s = c.q.middleCols(h * dh, dh) * c.k.middleCols(h * dh, dh).transpose() * scale;
      for (Eigen::Index r = 0; r < s.rows(); ++r) {
        const double m = s.row(r).maxCoeff();
        s.row(r) = (s.row(r).array() - m).exp();
        s.row(r) /= s.row(r).sum();
      }
      c.o.middleCols(h * dh, dh) = s * c.v.middleCols(h * dh, dh);
      c.attn.push_back(std::move(s));
    }
    RowMat y = affine_rows(out, c.o);
    if (cache) *cache = std::move(c);
    return y;
  }

  RowMat backward(const Cache& c, const RowMat& dy) {
    const Eigen::Index d = c.x.cols();
    const Eigen::Index dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const RowMat d_o = affine_rows_backward(out, c.o, dy);
    RowMat dq = RowMat::Zero(c.q.rows(), d), dk = dq, dv = dq;
    for (int h = 0; h < heads; ++h) {
      const RowMat& a = c.attn[h];
      const RowMat d_oh = d_o.middleCols(h * dh, dh);
      const RowMat da = d_oh * c.v.middleCols(h * dh, dh).transpose();
      dv.middleCols(h * dh, dh) = a.transpose() * d_oh;
      RowMat ds = a.array() * (da.colwise() - (da.array() * a.array()).rowwise().sum().matrix()).array();
      ds *= scale;
      dq.middleCols(h * dh, dh) = ds * c.k.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh) = ds.transpose() * c.q.middleCols(h * dh, dh);
    }
    RowMat dx = affine_rows_backward(query, c.x, dq);
    dx += affine_rows_backward(key, c.x, dk);
    dx += affine_rows_backward(value, c.x, dv);
    return dx;
  }

  void collect(ParamList& out_params) {
    query.collect(out_params);
    key.collect(out_params);
    value.collect(out_params);
    out.collect(out_params);
  }
};

}  // namespace cmr::embed
