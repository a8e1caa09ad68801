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

#include <array>
#include <vector>

#include "cmr/core/types.hpp"
#include "cmr/motion/lowess.hpp"

namespace cmr::motion {

struct SmoothingResult {
  MotionSequence sequence;
  /// Frame indices where at least one quaternion component hit a degenerate window.
  std::vector<size_t> degenerate_frames;
};

/// Flips each quaternion onto the hemisphere of its predecessor so the
/// component series are continuous.
inline std::vector<Quat> sign_align(const std::vector<Quat>& qs) {
  std::vector<Quat> out = qs;
  for (size_t i = 1; i < out.size(); ++i)
    if (out[i].dot(out[i - 1]) < 0) out[i] = -out[i];
  return out;
}

/// LOWESS over the sign-aligned w/x/y/z component series of the root
/// orientation, renormalized afterwards. Joint positions are left untouched.
inline SmoothingResult smooth_root_orientation(const MotionSequence& seq, const LowessConfig& cfg) {
  const auto aligned = sign_align(seq.root_orientation);
  const size_t n = aligned.size();
  std::array<std::vector<double>, 4> comps;
  for (auto& c : comps) c.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const auto q = aligned[i].components();
    for (size_t k = 0; k < 4; ++k) comps[k][i] = q[k];
  }

  SmoothingResult out{seq, {}};
  std::vector<bool> flagged(n, false);
  std::array<std::vector<double>, 4> smooth;
  for (size_t k = 0; k < 4; ++k) {
    auto res = lowess_smooth(comps[k], cfg);
    for (size_t i : res.degenerate) flagged[i] = true;
    smooth[k] = std::move(res.values);
  }
  for (size_t i = 0; i < n; ++i) {
    out.sequence.root_orientation[i] = Quat{smooth[0][i], smooth[1][i], smooth[2][i], smooth[3][i]}.normalized();
    if (flagged[i]) out.degenerate_frames.push_back(i);
  }
  return out;
}

}  // namespace cmr::motion
