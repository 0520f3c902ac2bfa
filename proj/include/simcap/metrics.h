// Copyright 2026 The Simcap Authors
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

#ifndef SIMCAP_METRICS_H_
#define SIMCAP_METRICS_H_

#include <vector>

#include "simcap/skeleton.h"

namespace simcap {

// per-frame world positions of the tracked joints; joint 0 is the root
using JointFrames = std::vector<std::vector<Vec3>>;

// tracked-point trajectories of a pose sequence
JointFrames keypoint_frames(const CharacterModel& model,
                            const std::vector<VecX>& poses);

// mean per-joint position error in millimeters, root-aligned per frame
// (joint 0 subtracted). Throws std::invalid_argument on shape mismatch.
double mpjpe_mm(const JointFrames& pred, const JointFrames& gt);

// mpjpe after per-frame similarity (rotation, translation, scale) Procrustes
// alignment of the prediction onto the ground truth. A frame whose joints are
// collinear or coincident sets *alignment_failed.
double pa_mpjpe_mm(const JointFrames& pred, const JointFrames& gt,
                   bool* alignment_failed = nullptr);

// mean and standard deviation of the per-sample difference in joint speed
// magnitude vs ground truth, in millimeters per frame. Throws
// std::invalid_argument on fewer than 2 frames.
struct Smoothness {
  double e_s = 0;
  double sigma_s = 0;
};
Smoothness smoothness_error_mm(const JointFrames& pred, const JointFrames& gt);

// mean absolute z error over the given joints, millimeters
double foot_z_error_mm(const JointFrames& pred, const JointFrames& gt,
                       const std::vector<int>& foot_joints);

// keypoint indices of the two ankles (ankle joint index + 1 for the root slot)
std::vector<int> foot_keypoint_indices(const CharacterModel& model);

struct MetricsReport {
  double mpjpe = 0;        // mm
  double pa_mpjpe = 0;     // mm
  double e_s = 0;          // mm/frame
  double sigma_s = 0;      // mm/frame
  double e_fz = 0;         // mm
  double success_rate = 0;  // fraction, filled by experiment drivers
};

MetricsReport compute_metrics(const JointFrames& pred, const JointFrames& gt,
                              const std::vector<int>& foot_joints);

// Wilson score interval for a binomial proportion
struct WilsonInterval {
  double lo = 0;
  double hi = 0;
};
WilsonInterval wilson_interval(int successes, int trials, double z = 1.96);

}  // namespace simcap

#endif  // SIMCAP_METRICS_H_
