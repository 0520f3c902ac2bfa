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

#ifndef SIMCAP_KINOPT_H_
#define SIMCAP_KINOPT_H_

#include <array>
#include <string>
#include <vector>

#include "simcap/camera.h"
#include "simcap/scene.h"
#include "simcap/sdf.h"
#include "simcap/skeleton.h"

namespace simcap {

// Variables of the kinematic fit: one pose vector per frame (root translation,
// root rotation, 51 joint coordinates) plus the shared bone-scale multipliers.
struct OptVariables {
  std::vector<VecX> q;
  SkeletonScale scale;

  int frame_count() const { return static_cast<int>(q.size()); }
};

// Gradient container mirroring OptVariables.
struct VarGrad {
  std::vector<VecX> q;
  VecX scale = VecX::Zero(SkeletonScale::kGroups);

  void resize_like(const OptVariables& vars);
  void set_zero();
};

// Per-stage loss weights: data term, pose-magnitude prior, shape prior,
// second-difference smoothness prior, scene-interaction term.
struct StageWeights {
  double data = 1;
  double latent = 0;
  double shape = 0;
  double kinetic = 0;
  double interaction = 0;
};

// The published four-stage schedule, coarse to fine; only the last stage
// turns the scene-interaction term on.
std::array<StageWeights, 4> default_stage_weights();

// Confidence-weighted squared reprojection error of the 20 tracked points
// summed over frames; keypoints behind the camera contribute nothing.
double loss_data(const OptVariables& vars, const ObservationSequence& obs,
                 VarGrad* grad = nullptr, int threads = 1);

// Unweighted prior sub-terms: latent = sum_t |z_t|^2 over the 51 joint
// coordinates, shape = |scale - 1|^2, kinetic = sum of squared second
// differences of z (omitted when fewer than 3 frames).
struct PriorTerms {
  double latent = 0;
  double shape = 0;
  double kinetic = 0;
};

PriorTerms prior_terms(const OptVariables& vars);

// Sum of the three unweighted prior sub-terms.
double loss_prior(const OptVariables& vars);

// Accumulates the weighted prior gradient into grad.
void prior_backward(const OptVariables& vars, double latent_weight,
                    double shape_weight, double kinetic_weight, VarGrad* grad);

// Robustified scene penetration/flotation penalty: Geman-McClure of the
// sampled signed distance at the 8 foot contact points per frame.
double loss_scene(const OptVariables& vars, const SdfGrid& grid,
                  double gm_scale = 0.1, VarGrad* grad = nullptr,
                  int threads = 1);

struct KinOptOptions {
  std::array<StageWeights, 4> stages = default_stage_weights();
  int iterations_per_stage = 300;
  double learning_rate = 0.02;
  double gm_scale = 0.1;  // meters, robustifier scale of the scene term
  int threads = 1;
};

struct KinOptReport {
  OptVariables best;
  std::array<std::vector<double>, 4> best_loss_curve;  // best-so-far per iter
  double final_loss = 0;
  bool warning = false;  // still descending at budget exhaustion, or non-finite
};

// Four-stage first-order optimization of the per-frame poses and the shared
// scale against 2D observations, priors, and the baked scene distance field.
// Deterministic; returns the best iterate with finite-difference velocities.
ReferenceMotion optimize_reference(const ObservationSequence& obs,
                                   const SdfGrid& scene_grid,
                                   const OptVariables& init,
                                   const KinOptOptions& options = {},
                                   KinOptReport* report = nullptr);

// Projects the motion's tracked keypoints into the camera with confidence 1
// for visible points and 0 for points occluded by scene geometry (segment
// test against the analytic scene); optional Gaussian pixel noise on visible
// points. Deterministic for a given seed.
ObservationSequence synthesize_observations(const CharacterModel& model,
                                            const ReferenceMotion& motion,
                                            const Camera& camera,
                                            const SceneGeometry& scene,
                                            double noise_px,
                                            std::uint64_t seed);

// Model joint indices of the two ankle links carrying the foot points.
std::array<int, 2> ankle_joints(const CharacterModel& model);

}  // namespace simcap

#endif  // SIMCAP_KINOPT_H_
