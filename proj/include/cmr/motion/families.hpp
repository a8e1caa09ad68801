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
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "cmr/core/types.hpp"
#include "cmr/error.hpp"

namespace cmr::motion {

/// Parametric motion families used by the synthetic generator.
enum class MotionFamily { kStand, kWalk, kRun, kWave };

inline constexpr std::array<MotionFamily, 4> kAllFamilies = {MotionFamily::kStand, MotionFamily::kWalk,
                                                            MotionFamily::kRun, MotionFamily::kWave};

inline std::string family_word(MotionFamily f) {
  switch (f) {
    case MotionFamily::kStand: return "stand";
    case MotionFamily::kWalk: return "walk";
    case MotionFamily::kRun: return "run";
    case MotionFamily::kWave: return "wave";
  }
  return "stand";
}

inline std::string family_gerund(MotionFamily f) {
  switch (f) {
    case MotionFamily::kStand: return "standing";
    case MotionFamily::kWalk: return "walking";
    case MotionFamily::kRun: return "running";
    case MotionFamily::kWave: return "waving";
  }
  return "standing";
}

inline MotionFamily parse_family(const std::string& s) {
  for (MotionFamily f : kAllFamilies)
    if (s == family_word(f) || s == family_gerund(f)) return f;
  fail(ErrorCode::kParseError, "unknown motion family '" + s + "'");
}

/// SMPL joint indices used by the generator and the motion descriptor.
namespace joint {
inline constexpr int kPelvis = 0, kLeftHip = 1, kRightHip = 2, kSpine1 = 3, kLeftKnee = 4, kRightKnee = 5,
                     kSpine2 = 6, kLeftAnkle = 7, kRightAnkle = 8, kSpine3 = 9, kLeftFoot = 10, kRightFoot = 11,
                     kNeck = 12, kLeftCollar = 13, kRightCollar = 14, kHead = 15, kLeftShoulder = 16,
                     kRightShoulder = 17, kLeftElbow = 18, kRightElbow = 19, kLeftWrist = 20, kRightWrist = 21,
                     kLeftHand = 22, kRightHand = 23;
}

/// Approximate neutral SMPL rest pose: meters, y up, z forward, x to the left.
inline Pose rest_pose() {
  return Pose{{{0.0, 0.95, 0.0},    {0.09, 0.87, 0.0},  {-0.09, 0.87, 0.0}, {0.0, 1.05, 0.0},
               {0.10, 0.50, 0.0},   {-0.10, 0.50, 0.0}, {0.0, 1.18, 0.0},   {0.10, 0.08, 0.0},
               {-0.10, 0.08, 0.0},  {0.0, 1.25, 0.0},   {0.10, 0.02, 0.12}, {-0.10, 0.02, 0.12},
               {0.0, 1.45, 0.0},    {0.07, 1.38, 0.0},  {-0.07, 1.38, 0.0}, {0.0, 1.60, 0.03},
               {0.18, 1.38, 0.0},   {-0.18, 1.38, 0.0}, {0.22, 1.12, 0.0},  {-0.22, 1.12, 0.0},
               {0.24, 0.88, 0.0},   {-0.24, 0.88, 0.0}, {0.25, 0.80, 0.0},  {-0.25, 0.80, 0.0}}};
}

struct FamilyParams {
  double amplitude = 0.0;  // leg swing or arm oscillation amplitude (m)
  double speed = 0.0;      // forward root speed (m/s)
  double phase = 0.0;
  double heading = 0.0;    // yaw of the root orientation (rad)
  double noise = 0.0;      // per-coordinate Gaussian noise (m)
  double orientation_noise = 0.0;
};

/// Whole cycles per 20-frame window for each family.
inline int family_cycles(MotionFamily f) {
  switch (f) {
    case MotionFamily::kStand: return 0;
    case MotionFamily::kWalk: return 2;
    case MotionFamily::kRun: return 5;
    case MotionFamily::kWave: return 3;
  }
  return 0;
}

/// Canonical noise-free parameters (the family prototype).
inline FamilyParams canonical_params(MotionFamily f) {
  switch (f) {
    case MotionFamily::kStand: return {};
    case MotionFamily::kWalk: return {0.2, 1.25, 0.0, 0.0, 0.0, 0.0};
    case MotionFamily::kRun: return {0.35, 3.0, 0.0, 0.0, 0.0, 0.0};
    case MotionFamily::kWave: return {0.15, 0.0, 0.0, 0.0, 0.0, 0.0};
  }
  return {};
}

inline FamilyParams sample_params(MotionFamily f, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  FamilyParams p;
  switch (f) {
    case MotionFamily::kStand: break;
    case MotionFamily::kWalk: p.amplitude = uni(0.15, 0.25); p.speed = uni(1.0, 1.5); break;
    case MotionFamily::kRun: p.amplitude = uni(0.30, 0.40); p.speed = uni(2.5, 3.5); break;
    case MotionFamily::kWave: p.amplitude = uni(0.10, 0.20); break;
  }
  p.phase = uni(0.0, 2 * std::numbers::pi);
  p.heading = uni(-std::numbers::pi, std::numbers::pi);
  p.noise = 0.005;
  p.orientation_noise = 0.01;
  return p;
}

/// Joint trajectories and root orientations for one 20-frame window. Boxes
/// are left empty for the caller to fill.
inline MotionSequence generate_family_motion(MotionFamily f, const FamilyParams& p, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  const Pose rest = rest_pose();
  const double cycles = family_cycles(f);
  MotionSequence seq;
  seq.frame_rate_hz = kFrameRateHz;
  for (int t = 0; t < kSequenceLength; ++t) {
    const double time = static_cast<double>(t) / kFrameRateHz;
    const double ang = p.phase + 2 * std::numbers::pi * cycles * t / kSequenceLength;
    const double osc = std::sin(ang);
    Pose pose = rest;
    if (f == MotionFamily::kWalk || f == MotionFamily::kRun) {
      const double lift = f == MotionFamily::kRun ? 0.1 : 0.04;
      for (auto [j, w] : {std::pair{joint::kLeftKnee, 0.5}, {joint::kLeftAnkle, 1.0}, {joint::kLeftFoot, 1.0}}) {
        pose[j].z += w * p.amplitude * osc;
        pose[j].y += w * lift * std::max(0.0, osc);
      }
      for (auto [j, w] : {std::pair{joint::kRightKnee, 0.5}, {joint::kRightAnkle, 1.0}, {joint::kRightFoot, 1.0}}) {
        pose[j].z -= w * p.amplitude * osc;
        pose[j].y += w * lift * std::max(0.0, -osc);
      }
    } else if (f == MotionFamily::kWave) {
      // Raised right forearm swinging side to side.
      for (auto [j, w] : {std::pair{joint::kRightElbow, 0.4}, {joint::kRightWrist, 1.0}, {joint::kRightHand, 1.0}}) {
        pose[j].y += 0.5 * w + 0.2;
        pose[j].x += w * p.amplitude * osc;
      }
    }
    for (Vec3& v : pose) {
      v.z += p.speed * time;
      v.x += p.noise * noise(rng);
      v.y += p.noise * noise(rng);
      v.z += p.noise * noise(rng);
    }
    seq.frames.push_back(pose);
    const double yaw = p.heading + p.orientation_noise * noise(rng);
    seq.root_orientation.push_back(Quat::from_axis_angle({0, 1, 0}, yaw));
  }
  return seq;
}

}  // namespace cmr::motion
