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
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "cmr/embed/layers.hpp"
#include "cmr/embed/losses.hpp"
#include "cmr/embed/model.hpp"
#include "cmr/embed/train.hpp"

namespace cmr::embed {

struct GradCheckOptions {
  double h = 1e-5;
  double floor = 1e-6;
  /// Entries sampled per tensor; 0 checks every entry.
  size_t max_entries = 48;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0;
  size_t checked = 0;
  std::string worst;

  void merge(const GradCheckResult& o) {
    if (o.max_rel_error > max_rel_error) {
      max_rel_error = o.max_rel_error;
      worst = o.worst;
    }
    checked += o.checked;
  }
};

inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline std::vector<Eigen::Index> sample_entries(Eigen::Index size, const GradCheckOptions& opt, std::mt19937_64& rng) {
  std::vector<Eigen::Index> idx(static_cast<size_t>(size));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (opt.max_entries == 0 || idx.size() <= opt.max_entries) return idx;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(opt.max_entries);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Central differences of `f` over the entries of `x` (perturbed in place and
/// restored) against the analytic gradient `grad`.
inline GradCheckResult check_buffer(const std::function<double()>& f, double* x, const double* grad, Eigen::Index size,
                                    const std::string& label, const GradCheckOptions& opt, std::mt19937_64& rng) {
  GradCheckResult r;
  for (Eigen::Index i : sample_entries(size, opt, rng)) {
    const double orig = x[i];
    x[i] = orig + opt.h;
    const double up = f();
    x[i] = orig - opt.h;
    const double down = f();
    x[i] = orig;
    const double numeric = (up - down) / (2 * opt.h);
    const double err = relative_error(grad[i], numeric, opt.floor);
    ++r.checked;
    if (err > r.max_rel_error) {
      r.max_rel_error = err;
      r.worst = label + "[" + std::to_string(i) + "]";
    }
  }
  return r;
}

inline GradCheckResult check_vector(const std::function<double()>& f, Vec& x, const Vec& grad, const std::string& label,
                                    const GradCheckOptions& opt = {}) {
  std::mt19937_64 rng(opt.seed);
  return check_buffer(f, x.data(), grad.data(), x.size(), label, opt, rng);
}

/// Checks the gradients already accumulated in `params` against `f`.
inline GradCheckResult check_params(const std::function<double()>& f, const ParamList& params, const GradCheckOptions& opt = {}) {
  std::mt19937_64 rng(opt.seed);
  GradCheckResult r;
  for (Param* p : params) {
    const Mat grad = p->grad;
    r.merge(check_buffer(f, p->value.data(), grad.data(), p->value.size(), p->name, opt, rng));
  }
  return r;
}

/// Full encode -> fuse -> project -> normalize -> loss check over every
/// parameter tensor (text encoder included) and both model inputs. Dropout
/// is active with a mask replayed from `dropout_seed` on every evaluation.
inline GradCheckResult pipeline_grad_check(Model& model, std::vector<TrainExample> batch, const LossConfig& loss,
                                           std::uint64_t dropout_seed, const GradCheckOptions& opt = {}) {
  std::vector<const TrainExample*> ptrs;
  for (const auto& ex : batch) ptrs.push_back(&ex);
  auto eval = [&](bool accumulate) {
    std::mt19937_64 rng(dropout_seed);
    if (accumulate) return batch_step(model, ptrs, loss, false, &rng);
    // Finite-difference evaluations must not disturb the analytic gradients.
    std::vector<Mat> saved;
    const ParamList all = model.all_params();
    for (Param* p : all) saved.push_back(p->grad);
    const double v = batch_step(model, ptrs, loss, false, &rng);
    for (size_t i = 0; i < all.size(); ++i) all[i]->grad = saved[i];
    return v;
  };
  model.zero_grad();
  eval(true);
  const std::function<double()> f = [&] { return eval(false); };
  GradCheckResult r = check_params(f, model.all_params(), opt);

  // Input gradients from a separate backward pass.
  for (size_t i = 0; i < batch.size(); ++i) {
    std::mt19937_64 rng(dropout_seed);
    std::vector<Model::Cache> caches(batch.size());
    std::vector<NormalizeCache> zc(batch.size());
    RowMat z(static_cast<Eigen::Index>(batch.size()), model.dim()), t = z;
    for (size_t j = 0; j < batch.size(); ++j) {
      z.row(static_cast<Eigen::Index>(j)) = l2_normalize(model.forward(batch[j].input, &rng, &caches[j]), &zc[j]).transpose();
      t.row(static_cast<Eigen::Index>(j)) = model.encode_text(batch[j].text).transpose();
    }
    Vec dzi;
    const auto n = static_cast<double>(batch.size());
    const auto row = static_cast<Eigen::Index>(i);
    if (loss.kind == LossKind::kInfoNce) {
      dzi = loss_infonce(z, t, loss.tau).dz.row(row).transpose();
    } else if (loss.kind == LossKind::kCosine) {
      dzi = loss_cosine(z.row(row).transpose(), t.row(row).transpose()).dz / n;
    } else {
      dzi = loss_soft_ce(z.row(row).transpose(), t.row(row).transpose()).dz / n;
    }
    std::vector<Mat> saved;
    const ParamList all = model.all_params();
    for (Param* p : all) saved.push_back(p->grad);
    const ModelInput din = model.backward(caches[i], l2_normalize_backward(zc[i], dzi));
    for (size_t k = 0; k < all.size(); ++k) all[k]->grad = saved[k];
    GradCheckOptions o = opt;
    o.seed = opt.seed + i + 1;
    r.merge(check_vector(f, batch[i].input.motion, din.motion, "input.motion", o));
    r.merge(check_vector(f, batch[i].input.video, din.video, "input.video", o));
  }
  return r;
}

}  // namespace cmr::embed
