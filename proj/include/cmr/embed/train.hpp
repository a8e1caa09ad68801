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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cmr/embed/layers.hpp"
#include "cmr/embed/losses.hpp"
#include "cmr/embed/model.hpp"
#include "cmr/error.hpp"

namespace cmr::embed {

struct TrainConfig {
  int batch_size = 6;
  double lr_start = 1e-5;
  double lr_end = 1e-6;
  int epochs = 50;
  double weight_decay = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  bool freeze_text = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (batch_size < 1) fail(ErrorCode::kInvalidConfig, "batch size must be at least 1");
    if (!(lr_start > 0) || !(lr_end > 0) || !(lr_end < lr_start))
      fail(ErrorCode::kInvalidConfig, "learning rates must satisfy 0 < lr_end < lr_start");
    if (epochs < 1) fail(ErrorCode::kInvalidConfig, "epochs must be at least 1");
    if (weight_decay < 0) fail(ErrorCode::kInvalidConfig, "weight decay must be non-negative");
  }
};

/// lr(e) = lr_start * (lr_end / lr_start)^(e / epochs).
inline double lr_schedule(double epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch > cfg.epochs) fail(ErrorCode::kOutOfBounds, "epoch outside [0, epochs]");
  return cfg.lr_start * std::pow(cfg.lr_end / cfg.lr_start, epoch / cfg.epochs);
}

/// Adam with decoupled weight decay.
class AdamW {
 public:
  AdamW(ParamList params, const TrainConfig& cfg) : params_(std::move(params)), cfg_(cfg) {
    for (Param* p : params_) {
      m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void step(double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
      Param& p = *params_[i];
      if (p.frozen) continue;
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * p.grad;
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * p.grad.cwiseProduct(p.grad);
      p.value *= 1.0 - lr * cfg_.weight_decay;
      p.value.array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + cfg_.adam_eps);
    }
  }

  long steps() const { return t_; }

 private:
  ParamList params_;
  TrainConfig cfg_;
  std::vector<Mat> m_, v_;
  long t_ = 0;
};

struct TrainExample {
  ModelInput input;
  std::string text;  // first annotation
};

struct TrainHistory {
  std::vector<double> epoch_loss;
  long steps = 0;
};

/// Mean loss over one batch; accumulates gradients into the model.
inline double batch_step(Model& model, std::span<const TrainExample* const> batch, const LossConfig& loss,
                         bool freeze_text, std::mt19937_64* dropout_rng,
                         const std::map<std::string, Vec>* frozen_targets = nullptr) {
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index d = model.dim();
  std::vector<Model::Cache> caches(batch.size());
  std::vector<NormalizeCache> zc(batch.size()), tc(batch.size());
  std::vector<Mlp::Cache> text_caches(batch.size());
  RowMat z(n, d), t(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const TrainExample& ex = *batch[i];
    const Vec raw = model.forward(ex.input, dropout_rng, &caches[i]);
    if (!raw.allFinite()) return std::numeric_limits<double>::quiet_NaN();
    z.row(i) = l2_normalize(raw, &zc[i]).transpose();
    if (freeze_text && frozen_targets) {
      t.row(i) = frozen_targets->at(ex.text).transpose();
    } else {
      const Vec text = model.encode_text_raw(ex.text, &text_caches[i]);
      if (!text.allFinite()) return std::numeric_limits<double>::quiet_NaN();
      t.row(i) = l2_normalize(text, &tc[i]).transpose();
    }
  }
  RowMat dz(n, d), dt(n, d);
  double value = 0;
  if (loss.kind == LossKind::kInfoNce) {
    BatchLoss b = loss_infonce(z, t, loss.tau);
    value = b.value;
    dz = std::move(b.dz);
    dt = std::move(b.dt);
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const PairLoss p = loss.kind == LossKind::kCosine ? loss_cosine(z.row(i).transpose(), t.row(i).transpose())
                                                        : loss_soft_ce(z.row(i).transpose(), t.row(i).transpose());
      value += p.value / static_cast<double>(n);
      dz.row(i) = p.dz.transpose() / static_cast<double>(n);
      dt.row(i) = p.dt.transpose() / static_cast<double>(n);
    }
  }
  if (!std::isfinite(value)) return value;
  for (Eigen::Index i = 0; i < n; ++i) {
    model.backward(caches[i], l2_normalize_backward(zc[i], dz.row(i).transpose()));
    if (!freeze_text) model.text_backward(batch[i]->text, text_caches[i], l2_normalize_backward(tc[i], dt.row(i).transpose()));
  }
  return value;
}

/// Mini-batch AdamW over seed-shuffled epochs. The text encoder stays frozen
/// unless `freeze_text` is false.
inline TrainHistory train(Model& model, std::span<const TrainExample> data, const LossConfig& loss, const TrainConfig& cfg) {
  cfg.validate();
  loss.validate();
  if (data.empty()) fail(ErrorCode::kEmptyInput, "training set is empty");
  for (Param* p : model.text_params()) p->frozen = cfg.freeze_text;
  ParamList params = cfg.freeze_text ? model.scene_params() : model.all_params();
  AdamW opt(params, cfg);

  std::map<std::string, Vec> targets;
  if (cfg.freeze_text)
    for (const auto& ex : data)
      if (!targets.count(ex.text)) targets.emplace(ex.text, model.encode_text(ex.text));

  std::mt19937_64 shuffle_rng(cfg.seed);
  std::mt19937_64 dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  TrainHistory history;
  for (int e = 0; e < cfg.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const double lr = lr_schedule(e, cfg);
    double total = 0;
    size_t batches = 0;
    for (size_t b = 0; b < order.size(); b += static_cast<size_t>(cfg.batch_size)) {
      std::vector<const TrainExample*> batch;
      for (size_t i = b; i < std::min(order.size(), b + static_cast<size_t>(cfg.batch_size)); ++i) batch.push_back(&data[order[i]]);
      model.zero_grad();
      const double value = batch_step(model, batch, loss, cfg.freeze_text, &dropout_rng, &targets);
      if (!std::isfinite(value))
        fail(ErrorCode::kNonFiniteLoss, "non-finite " + loss_name(loss.kind) + " loss at epoch " + std::to_string(e) +
                                            ", batch " + std::to_string(batches) + " (lr " + std::to_string(lr) + ")");
      opt.step(lr);
      total += value;
      ++batches;
    }
    history.epoch_loss.push_back(total / static_cast<double>(batches));
  }
  history.steps = opt.steps();
  return history;
}

}  // namespace cmr::embed
