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
#include <complex>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "cmr/core/types.hpp"
#include "cmr/error.hpp"
#include "cmr/motion/families.hpp"

namespace cmr::motion {

struct VocabularyEntry {
  std::string word;    // base label, e.g. "walk"
  std::string gerund;  // form used in annotations, e.g. "walking"
  std::vector<double> embedding;
};

class MotionVocabulary {
 public:
  static inline const std::vector<std::string> kDefaultExcluded = {"play instrument", "turn"};
  static constexpr double kDefaultThreshold = 0.2;

  /// Drops excluded words and l2-normalizes every embedding.
  MotionVocabulary(std::vector<VocabularyEntry> entries, std::vector<std::string> excluded = kDefaultExcluded,
                   double threshold = kDefaultThreshold)
      : excluded_(std::move(excluded)), threshold_(threshold) {
    const std::set<std::string> skip(excluded_.begin(), excluded_.end());
    for (auto& e : entries) {
      if (skip.count(e.word) || skip.count(e.gerund)) continue;
      double n = 0;
      for (double v : e.embedding) n += v * v;
      n = std::sqrt(n);
      if (n == 0) fail(ErrorCode::kZeroVector, "vocabulary embedding for '" + e.word + "' is zero");
      if (!entries_.empty() && e.embedding.size() != entries_.front().embedding.size())
        fail(ErrorCode::kDimMismatch, "vocabulary embeddings differ in dimension");
      for (double& v : e.embedding) v /= n;
      entries_.push_back(std::move(e));
    }
  }

  const std::vector<VocabularyEntry>& entries() const { return entries_; }
  const std::vector<std::string>& excluded() const { return excluded_; }
  double threshold() const { return threshold_; }
  bool empty() const { return entries_.empty(); }

  std::string gerund(const std::string& word) const {
    for (const auto& e : entries_)
      if (e.word == word) return e.gerund;
    fail(ErrorCode::kNotFound, "word '" + word + "' not in vocabulary");
  }

 private:
  std::vector<VocabularyEntry> entries_;
  std::vector<std::string> excluded_;
  double threshold_;
};

struct MotionMatch {
  std::string word;
  double similarity = 0;
};

/// Ranks vocabulary words for one motion embedding: the best match always
/// comes first, followed by every other word whose cosine similarity exceeds
/// the vocabulary threshold, in descending similarity (vocabulary order on ties).
inline std::vector<MotionMatch> rank_motions(const std::vector<double>& embedding, const MotionVocabulary& vocab) {
  if (vocab.empty()) fail(ErrorCode::kEmptyVocabulary, "motion vocabulary has no entries");
  double n = 0;
  for (double v : embedding) n += v * v;
  n = std::sqrt(n);
  if (n == 0) fail(ErrorCode::kZeroVector, "motion embedding is zero");
  std::vector<MotionMatch> sims;
  for (const auto& e : vocab.entries()) {
    if (e.embedding.size() != embedding.size()) fail(ErrorCode::kDimMismatch, "embedding/vocabulary dimension mismatch");
    double d = 0;
    for (size_t i = 0; i < embedding.size(); ++i) d += e.embedding[i] * embedding[i];
    sims.push_back({e.word, d / n});
  }
  std::stable_sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) { return a.similarity > b.similarity; });
  std::vector<MotionMatch> out{sims.front()};
  for (size_t i = 1; i < sims.size(); ++i)
    if (sims[i].similarity > vocab.threshold()) out.push_back(sims[i]);
  return out;
}

inline std::vector<std::string> label_motion(const std::vector<double>& embedding, const MotionVocabulary& vocab) {
  std::vector<std::string> words;
  for (auto& m : rank_motions(embedding, vocab)) words.push_back(std::move(m.word));
  return words;
}

/// Fixed spectral motion descriptor used for automatic labeling:
/// [stillness, slow leg swing, fast leg swing, arm oscillation].
///
/// Band amplitudes come from the DFT of pelvis-relative signals over the
/// window (leg: left minus right ankle depth; arm: both wrists' lateral and
/// vertical offsets). Stillness decays with total band amplitude so static
/// poses point away from all moving families.
struct SpectralMotionDescriptor {
  static constexpr int kDim = 4;
  static constexpr double kStillnessScale = 0.02;

  static double band_amplitude(const std::vector<double>& signal, int k_lo, int k_hi) {
    const size_t n = signal.size();
    double energy = 0;
    for (int k = k_lo; k <= k_hi; ++k) {
      std::complex<double> acc = 0;
      for (size_t t = 0; t < n; ++t)
        acc += signal[t] * std::polar(1.0, -2 * std::numbers::pi * k * static_cast<double>(t) / static_cast<double>(n));
      energy += std::norm(acc);
    }
    return 2.0 / static_cast<double>(n) * std::sqrt(energy);
  }

  std::vector<double> operator()(const MotionSequence& seq) const {
    seq.validate();
    const int n = kSequenceLength;
    const int nyquist_below = n / 2 - 1;
    std::vector<double> leg(n);
    std::array<std::vector<double>, 4> arm;
    for (auto& a : arm) a.resize(n);
    for (int t = 0; t < n; ++t) {
      const Pose& p = seq.frames[t];
      const Vec3& root = p[joint::kPelvis];
      leg[t] = (p[joint::kLeftAnkle].z - root.z) - (p[joint::kRightAnkle].z - root.z);
      arm[0][t] = p[joint::kLeftWrist].x - root.x;
      arm[1][t] = p[joint::kRightWrist].x - root.x;
      arm[2][t] = p[joint::kLeftWrist].y - root.y;
      arm[3][t] = p[joint::kRightWrist].y - root.y;
    }
    const double slow = band_amplitude(leg, 1, 3);
    const double fast = band_amplitude(leg, 4, nyquist_below);
    double arm_energy = 0;
    for (const auto& a : arm) arm_energy += std::pow(band_amplitude(a, 1, nyquist_below), 2);
    const double armp = std::sqrt(arm_energy);
    const double total = std::sqrt(slow * slow + fast * fast + armp * armp);
    return {std::exp(-total / kStillnessScale), slow, fast, armp};
  }
};

/// Vocabulary of the four synthetic families with prototypes taken from
/// their canonical noise-free motion.
inline MotionVocabulary default_motion_vocabulary(std::vector<std::string> excluded = MotionVocabulary::kDefaultExcluded,
                                                  double threshold = MotionVocabulary::kDefaultThreshold) {
  std::vector<VocabularyEntry> entries;
  std::mt19937_64 rng(0);
  SpectralMotionDescriptor descriptor;
  for (MotionFamily f : kAllFamilies) {
    auto seq = generate_family_motion(f, canonical_params(f), rng);
    seq.boxes.assign(kSequenceLength, BBox{0, 0, 1, 1});
    entries.push_back({family_word(f), family_gerund(f), descriptor(seq)});
  }
  return MotionVocabulary(std::move(entries), std::move(excluded), threshold);
}

}  // namespace cmr::motion
