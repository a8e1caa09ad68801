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
#include <string>

#include "cmr/embed/layers.hpp"
#include "cmr/error.hpp"

namespace cmr::embed {

enum class LossKind { kCosine, kSoftCe, kInfoNce };

inline std::string loss_name(LossKind k) {
  switch (k) {
    case LossKind::kCosine: return "cosine";
    case LossKind::kSoftCe: return "soft_ce";
    case LossKind::kInfoNce: return "infonce";
  }
  return "cosine";
}

inline LossKind parse_loss(const std::string& s) {
  if (s == "cosine") return LossKind::kCosine;
  if (s == "soft_ce") return LossKind::kSoftCe;
  if (s == "infonce") return LossKind::kInfoNce;
  fail(ErrorCode::kInvalidConfig, "unknown loss '" + s + "'");
}

struct LossConfig {
  LossKind kind = LossKind::kCosine;
  double tau = 0.5;

  void validate() const {
    if (!(tau > 0) || !std::isfinite(tau)) fail(ErrorCode::kInvalidConfig, "temperature must be positive");
  }
};

/// Loss value with gradients w.r.t. both arguments.
struct PairLoss {
  double value = 0;
  Vec dz, dt;
};

/// Batch loss; row i of Z and T form the i-th positive pair.
struct BatchLoss {
  double value = 0;
  RowMat dz, dt;
};

/// 1 - cos(z, t).
inline PairLoss loss_cosine(const Vec& z, const Vec& t) {
  if (z.size() != t.size()) fail(ErrorCode::kDimMismatch, "cosine loss arguments differ in size");
  const double nz = z.norm(), nt = t.norm();
  if (!(nz > 0) || !(nt > 0)) fail(ErrorCode::kZeroVector, "cosine loss of a zero vector");
  const double c = z.dot(t) / (nz * nt);
  PairLoss out;
  out.value = 1.0 - c;
  out.dz = -(t / (nz * nt) - c * z / (nz * nz));
  out.dt = -(z / (nz * nt) - c * t / (nt * nt));
  return out;
}

inline Vec softmax(const Vec& x) {
  const Vec e = (x.array() - x.maxCoeff()).exp();
  return e / e.sum();
}

inline Vec log_softmax(const Vec& x) {
  const double m = x.maxCoeff();
  const double lse = m + std::log((x.array() - m).exp().sum());
  return x.array() - lse;
}

inline double entropy(const Vec& p) {
  double h = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0) h -= p[i] * std::log(p[i]);
  return h;
}

/// -sum softmax(t) * log_softmax(z).
inline PairLoss loss_soft_ce(const Vec& z, const Vec& t) {
  if (z.size() != t.size()) fail(ErrorCode::kDimMismatch, "soft cross-entropy arguments differ in size");
  const Vec p = softmax(t);
  const Vec lq = log_softmax(z);
  PairLoss out;
  out.value = -p.dot(lq);
  out.dz = softmax(z) - p;
  out.dt = p.array() * (-lq.array() - out.value);
  return out;
}

/// Symmetric InfoNCE over the similarity matrix S = Z T^T / tau.
inline BatchLoss loss_infonce(const RowMat& z, const RowMat& t, double tau) {
  if (z.rows() != t.rows() || z.cols() != t.cols()) fail(ErrorCode::kDimMismatch, "InfoNCE batches differ in shape");
  if (z.rows() < 1) fail(ErrorCode::kEmptyInput, "InfoNCE needs at least one pair");
  if (!(tau > 0)) fail(ErrorCode::kInvalidConfig, "temperature must be positive");
  const Eigen::Index n = z.rows();
  const RowMat s = z * t.transpose() / tau;
  RowMat prow(n, n), pcol(n, n);
  double sum = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec r = s.row(i).transpose();
    const Vec lr = log_softmax(r);
    prow.row(i) = lr.array().exp().transpose();
    sum += lr[i];
    const Vec col = s.col(i);
    const Vec lc = log_softmax(col);
    pcol.col(i) = lc.array().exp();
    sum += lc[i];
  }
  BatchLoss out;
  out.value = -sum / (2.0 * static_cast<double>(n));
  const RowMat eye = RowMat::Identity(n, n);
  const RowMat ds = -((eye - prow) + (eye - pcol)) / (2.0 * static_cast<double>(n));
  out.dz = ds * t / tau;
  out.dt = ds.transpose() * z / tau;
  return out;
}

}  // namespace cmr::embed
