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

#include <random>
#include <string>
#include <utility>

#include "cmr/embed/layers.hpp"
#include "cmr/error.hpp"

namespace cmr::embed {

enum class FusionStrategy { kConcat, kBilinear, kAttention };

inline std::string fusion_name(FusionStrategy s) {
  switch (s) {
    case FusionStrategy::kConcat: return "concat";
    case FusionStrategy::kBilinear: return "bilinear";
    case FusionStrategy::kAttention: return "attention";
  }
  return "concat";
}

inline FusionStrategy parse_fusion(const std::string& s) {
  if (s == "concat") return FusionStrategy::kConcat;
  if (s == "bilinear") return FusionStrategy::kBilinear;
  if (s == "attention") return FusionStrategy::kAttention;
  fail(ErrorCode::kInvalidConfig, "unknown fusion strategy '" + s + "'");
}

struct FusionConfig {
  FusionStrategy strategy = FusionStrategy::kConcat;
  double dropout_p = 0.5;
  int heads = 4;
  int projection_hidden = 512;

  void validate(int dim) const {
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) fail(ErrorCode::kInvalidConfig, "dropout must lie in [0, 1)");
    if (strategy == FusionStrategy::kAttention && (heads <= 0 || dim % heads != 0))
      fail(ErrorCode::kInvalidConfig, "attention heads must divide the embedding dimension");
    if (projection_hidden <= 0) fail(ErrorCode::kInvalidConfig, "projection width must be positive");
  }
};

inline Eigen::Index fused_dim(FusionStrategy s, Eigen::Index d) {
  switch (s) {
    case FusionStrategy::kConcat: return 2 * d;
    case FusionStrategy::kBilinear: return d * d;
    case FusionStrategy::kAttention: return d;
  }
  return 2 * d;
}

/// Combines the motion and video embeddings into f_k:
/// concat [f_m; f_v], row-major outer product f_m f_v^T, or the mean of the
/// two output tokens of one multi-head self-attention layer.
struct Fusion {
  FusionStrategy strategy = FusionStrategy::kConcat;
  Eigen::Index dim = 0;
  MultiHeadSelfAttention attention;

  struct Cache {
    Vec fm, fv;
    MultiHeadSelfAttention::Cache attn;
  };

  Fusion() = default;
  Fusion(const FusionConfig& cfg, Eigen::Index d, std::mt19937_64& rng) : strategy(cfg.strategy), dim(d) {
    cfg.validate(static_cast<int>(d));
    if (strategy == FusionStrategy::kAttention) attention = MultiHeadSelfAttention("fusion.attention", d, cfg.heads, rng);
  }

  Eigen::Index output_dim() const { return fused_dim(strategy, dim); }

  Vec forward(const Vec& fm, const Vec& fv, Cache* cache = nullptr) const {
    if (fm.size() != dim || fv.size() != dim) fail(ErrorCode::kDimMismatch, "fusion inputs must both have dimension D");
    Vec fk;
    Cache c{fm, fv, {}};
    switch (strategy) {
      case FusionStrategy::kConcat:
        fk.resize(2 * dim);
        fk << fm, fv;
        break;
      case FusionStrategy::kBilinear: {
        // Row-major flattening: fk[i * D + j] = fm[i] * fv[j].
        const RowMat outer = fm * fv.transpose();
        fk = Eigen::Map<const Vec>(outer.data(), dim * dim);
        break;
      }
      case FusionStrategy::kAttention: {
        RowMat tokens(2, dim);
        tokens.row(0) = fm.transpose();
        tokens.row(1) = fv.transpose();
        const RowMat y = attention.forward(tokens, &c.attn);
        fk = y.colwise().mean().transpose();
        break;
      }
    }
    if (cache) *cache = std::move(c);
    return fk;
  }

  std::pair<Vec, Vec> backward(const Cache& c, const Vec& dfk) {
    switch (strategy) {
      case FusionStrategy::kConcat: return {dfk.head(dim), dfk.tail(dim)};
      case FusionStrategy::kBilinear: {
        const Eigen::Map<const RowMat> g(dfk.data(), dim, dim);
        return {g * c.fv, g.transpose() * c.fm};
      }
      case FusionStrategy::kAttention: {
        RowMat dy(2, dim);
        dy.row(0) = 0.5 * dfk.transpose();
        dy.row(1) = 0.5 * dfk.transpose();
        const RowMat dx = attention.backward(c.attn, dy);
        return {dx.row(0).transpose(), dx.row(1).transpose()};
      }
    }
    return {};
  }

  void collect(ParamList& out) {
    if (strategy == FusionStrategy::kAttention) attention.collect(out);
  }
};

/// f_z = MLP(dropout(layernorm(f_k))) with a single hidden layer.
struct Projection {
  Mlp mlp;
  double dropout_p = 0.5;
  double ln_eps = 1e-9;

  struct Cache {
    LayerNormCache ln;
    Vec mask;  // empty in eval mode
    Mlp::Cache mlp;
  };

  Projection() = default;
  Projection(Eigen::Index in, int hidden, Eigen::Index dim, double p, std::mt19937_64& rng)
      : mlp("projection.mlp", in, hidden, dim, rng), dropout_p(p) {}

  /// `dropout_rng` selects train mode; null means eval mode (no dropout).
  Vec forward(const Vec& fk, std::mt19937_64* dropout_rng, Cache* cache = nullptr) const {
    if (fk.size() != mlp.hidden.in_dim()) fail(ErrorCode::kDimMismatch, "projection input has the wrong dimension");
    Cache c;
    Vec x = layer_norm(fk, ln_eps, &c.ln);
    if (dropout_rng && dropout_p > 0) {
      c.mask = dropout_mask(x.size(), dropout_p, *dropout_rng);
      x = x.cwiseProduct(c.mask);
    }
    Vec y = mlp.forward(x, &c.mlp);
    if (cache) *cache = std::move(c);
    return y;
  }

  Vec backward(const Cache& c, const Vec& dy) {
    Vec dx = mlp.backward(c.mlp, dy);
    if (c.mask.size()) dx = dx.cwiseProduct(c.mask);
    return layer_norm_backward(c.ln, dx);
  }

  void collect(ParamList& out) { mlp.collect(out); }
};

}  // namespace cmr::embed
