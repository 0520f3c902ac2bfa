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

#ifndef SIMCAP_SAMCON_H_
#define SIMCAP_SAMCON_H_

#include <memory>
#include <vector>

#include "simcap/camera.h"
#include "simcap/cmaes.h"
#include "simcap/common.h"
#include "simcap/dynamics.h"
#include "simcap/skeleton.h"

namespace simcap {

enum class SampleMode {
  kNeuralPrior,
  kCmaBaseline,
  kUniformBaseline,
  kGaussianFixed,
};

struct LossWeights {
  double tra = 1.0;
  double dyn = 1.0;
  double ban = 1.0;
  double reproj = 1.0;
};

struct SamplerConfig {
  int samples_per_frame = 1000;  // N, split evenly across the saved states
  int saved_samples = 20;        // K, beam width
  LossWeights weights;
  double fall_root_height = 0.3;  // meters
  SampleMode mode = SampleMode::kNeuralPrior;
  // fixed-distribution provider parameters, radians around the reference
  double uniform_halfwidth = 0.2;
  double gaussian_sigma = 0.1;
  CmaConfig cma;  // cma-baseline evolution settings
  int threads = 1;
};

struct LossBreakdown {
  double tra = 0;
  double dyn = 0;
  double ban = 0;
  double reproj = 0;
  double total = 0;
  bool failed = false;
};

// Pose consistency: squared tangent-space pose difference plus squared
// distance over the tracked keypoints of both configurations.
double loss_tra(const CharacterModel& model, const CharacterState& sim,
                const VecX& ref_pose);

// Velocity consistency: squared generalized-velocity difference plus squared
// keypoint linear-velocity difference (velocities through the kinematic map).
double loss_dyn(const CharacterModel& model, const CharacterState& sim,
                const VecX& ref_pose, const VecX& ref_vel);

// Balance: planar (z zeroed) CoM-to-end-effector vectors compared to the
// reference, plus the CoM linear-velocity difference.
double loss_ban(const CharacterModel& model, const CharacterState& sim,
                const VecX& ref_pose, const VecX& ref_vel);

// Confidence-weighted squared pixel error of the projected keypoints.
// Keypoints behind the camera are dropped from the sum and flagged.
double loss_reproj(const CharacterModel& model, const CharacterState& sim,
                   const FrameObservation& obs, const Camera& camera,
                   bool* dropped_behind = nullptr);

// Weighted sum of the component losses; a failed sample is +infinity.
double loss_total(const LossBreakdown& components, const LossWeights& weights);

// True when the state has fallen (root below the threshold), the simulation
// diverged, or the loss is non-finite.
bool detect_failure(const SimWorld& world, double loss,
                    double fall_root_height = 0.3);

// One simulated candidate: where it started (parent beam slot), what target
// it tracked, where it ended, and how it scored.
struct SampleRecord {
  int parent = -1;
  VecX target;  // 51
  CharacterState end_state;
  LossBreakdown loss;
};

struct CaptureResult {
  ReferenceMotion trajectory;           // frame 0 = initialization state
  std::vector<VecX> targets;            // chosen target per captured frame
  std::vector<LossBreakdown> frame_losses;  // of the chosen path
  bool success = false;
  int frames_completed = 0;  // trajectory frames actually produced
};

// Draws target poses for the beam search. begin_frame sees the best saved
// state once per frame (the cma baseline evolves its distribution there);
// draw produces one 51-dim target for a rollout starting at `start`.
class SampleProvider {
 public:
  virtual ~SampleProvider() = default;
  virtual void begin_frame(const SimWorld& best_world, const PoseSample& ref,
                           int frame) {}
  virtual VecX draw(const CharacterState& start, const VecX& ref_movable,
                    Rng* rng) = 0;
};

// Uniform box of halfwidth around the reference movable pose, intersected
// with the bounds table.
std::unique_ptr<SampleProvider> make_uniform_provider(const CmaBounds& bounds,
                                                      double halfwidth);
// Fixed diagonal Gaussian centered on the reference movable pose.
std::unique_ptr<SampleProvider> make_gaussian_provider(const CmaBounds& bounds,
                                                       double sigma);
// Evolves a distribution with cma_track_frame from the best saved state once
// per frame, then draws all samples from it.
std::unique_ptr<SampleProvider> make_cma_provider(const CmaBounds& bounds,
                                                  const CmaConfig& config,
                                                  uint64_t seed);

// Advances the beam by one frame: splits N samples evenly across the K saved
// states, rolls each drawn target for one 30 Hz frame, and keeps the K
// lowest-loss records (sorted ascending, parent links into `beam`). An empty
// result means every sample failed. Observations are optional.
std::vector<SampleRecord> capture_frame(
    const std::vector<SampleRecord>& beam, const PoseSample& ref,
    const FrameObservation* obs, const Camera* camera,
    SampleProvider& provider, const SimWorld& world_template,
    const SamplerConfig& config, uint64_t master_seed, int frame_index);

// Tracks the reference motion from its first frame: initializes the character
// on frame 0, beam-searches each subsequent 30 Hz frame, and backtracks the
// lowest-loss path into one continuous trajectory. A frame where every sample
// fails ends the capture early with success=false and the partial result.
CaptureResult capture_motion(const ReferenceMotion& ref,
                             const ObservationSequence* obs,
                             const SceneGeometry& scene,
                             SampleProvider& provider,
                             const SamplerConfig& config, uint64_t seed);

}  // namespace simcap

#endif  // SIMCAP_SAMCON_H_
