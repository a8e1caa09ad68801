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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmr/core/types.hpp"
#include "cmr/error.hpp"

namespace cmr::motion {

struct ValidityConfig {
  int min_box_w = 35;
  int min_box_h = 90;
  int seq_len = kSequenceLength;
  int max_gap = 2;

  void validate() const {
    if (min_box_w <= 0 || min_box_h <= 0 || seq_len <= 0 || max_gap < 0 || max_gap >= seq_len)
      fail(ErrorCode::kInvalidConfig, "validity config requires positive sizes and max_gap < seq_len");
  }
};

/// Half-open index range [begin, begin + length) into a dense track.
struct Segment {
  size_t begin = 0;
  size_t length = 0;

  size_t end() const { return begin + length; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// A frame is usable when it carries a detection and pose and the box meets
/// the minimum size required for reliable pose fitting.
inline bool frame_usable(const TrackFrame& f, const ValidityConfig& cfg) {
  return f.present() && f.box->width() >= cfg.min_box_w && f.box->height() >= cfg.min_box_h;
}

/// Inserts missing-detection entries so frame indices become contiguous.
inline std::vector<TrackFrame> densify_track(std::span<const TrackFrame> frames) {
  std::vector<TrackFrame> dense;
  for (const TrackFrame& f : frames) {
    if (!dense.empty()) {
      if (f.frame_index <= dense.back().frame_index)
        fail(ErrorCode::kParseError, "track frames must be strictly increasing in frame_index");
      for (int idx = dense.back().frame_index + 1; idx < f.frame_index; ++idx) dense.push_back({idx, {}, {}, {}});
    }
    dense.push_back(f);
  }
  return dense;
}

/// Splits a dense track into non-overlapping fixed-length segments.
///
/// Leading and trailing unusable frames are dropped. Any run of more than
/// `max_gap` consecutive unusable frames splits the track; shorter runs stay
/// inside a piece and are filled later. Each piece contributes
/// floor(len / seq_len) segments tiled from its first frame.
inline std::vector<Segment> extract_valid_segments(std::span<const TrackFrame> track, const ValidityConfig& cfg) {
  cfg.validate();
  std::vector<Segment> out;
  const size_t n = track.size();
  size_t i = 0;
  while (i < n) {
    while (i < n && !frame_usable(track[i], cfg)) ++i;
    if (i == n) break;
    const size_t piece_begin = i;
    size_t last_usable = i;
    size_t gap = 0;
    for (++i; i < n; ++i) {
      if (frame_usable(track[i], cfg)) {
        last_usable = i;
        gap = 0;
      } else if (++gap > static_cast<size_t>(cfg.max_gap)) {
        break;
      }
    }
    const size_t piece_len = last_usable + 1 - piece_begin;
    const size_t seq = static_cast<size_t>(cfg.seq_len);
    for (size_t k = 0; k + seq <= piece_len; k += seq) out.push_back({piece_begin + k, seq});
    i = last_usable + 1;
  }
  return out;
}

namespace detail {

inline Vec3 lerp(const Vec3& a, const Vec3& b, double t) {
  return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t, a.z + (b.z - a.z) * t};
}

/// Normalized linear interpolation along the shorter arc.
inline Quat nlerp(const Quat& a, Quat b, double t) {
  if (a.dot(b) < 0) b = -b;
  return Quat{a.w + (b.w - a.w) * t, a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t, a.z + (b.z - a.z) * t}
      .normalized();
}

inline BBox lerp_box(const BBox& a, const BBox& b, double t) {
  auto mix = [t](int u, int v) { return static_cast<int>(std::lround(u + (v - u) * t)); };
  return {mix(a.x0, b.x0), mix(a.y0, b.y0), mix(a.x1, b.x1), mix(a.y1, b.y1)};
}

}  // namespace detail

/// Builds a complete motion sequence for `segment`, interpolating unusable
/// frames between the nearest usable neighbours (which may lie just outside
/// the segment). Observed boxes of undersized frames are kept; missing boxes
/// are interpolated.
inline MotionSequence fill_gaps(std::span<const TrackFrame> track, const Segment& segment,
                                const std::string& track_id, const ValidityConfig& cfg) {
  if (segment.end() > track.size() || segment.length == 0) fail(ErrorCode::kOutOfBounds, "segment outside track");
  MotionSequence seq;
  seq.track_id = track_id;
  seq.frame_rate_hz = kFrameRateHz;
  for (size_t i = segment.begin; i < segment.end(); ++i) {
    const TrackFrame& f = track[i];
    if (frame_usable(f, cfg)) {
      seq.frames.push_back(*f.pose);
      seq.root_orientation.push_back(f.root_orientation->normalized());
      seq.boxes.push_back(*f.box);
      continue;
    }
    std::optional<size_t> prev, next;
    for (size_t p = i; p-- > 0;)
      if (frame_usable(track[p], cfg)) {
        prev = p;
        break;
      }
    for (size_t q = i + 1; q < track.size(); ++q)
      if (frame_usable(track[q], cfg)) {
        next = q;
        break;
      }
    if (!prev || !next || *next - *prev - 1 > static_cast<size_t>(cfg.max_gap))
      fail(ErrorCode::kGapTooLarge, "frame " + std::to_string(track[i].frame_index) + " of track '" + track_id +
                                        "' lies in a gap longer than " + std::to_string(cfg.max_gap));
    const TrackFrame& a = track[*prev];
    const TrackFrame& b = track[*next];
    const double t = static_cast<double>(i - *prev) / static_cast<double>(*next - *prev);
    Pose pose;
    for (int j = 0; j < kNumJoints; ++j) pose[j] = detail::lerp((*a.pose)[j], (*b.pose)[j], t);
    seq.frames.push_back(pose);
    seq.root_orientation.push_back(detail::nlerp(*a.root_orientation, *b.root_orientation, t));
    seq.boxes.push_back(f.box ? *f.box : detail::lerp_box(*a.box, *b.box, t));
  }
  return seq;
}

}  // namespace cmr::motion
