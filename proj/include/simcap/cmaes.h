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

#ifndef SIMCAP_CMAES_H_
#define SIMCAP_CMAES_H_

#include <functional>
#include <string>
#include <vector>

#include "simcap/common.h"
#include "simcap/dynamics.h"
#include "simcap/skeleton.h"

namespace simcap {

// Diagonal Gaussian over target poses (or generic vectors of the same
// dimension); sigma is the per-dimension standard deviation.
struct PoseDistribution {
  VecX mean;
  VecX sigma;
};

// Per-dimension sampling box. Dimensions with min == max are pinned: samples
// take that exact value and the dimension is excluded from rejection counting
// and from covariance adaptation.
struct CmaBounds {
  VecX min;
  VecX max;
  int dim() const { return static_cast<int>(min.size()); }
  static CmaBounds uniform(int n, double lo, double hi);
};

// Joint-rotation sampling limits for the 51 movable dofs, keyed off the
// movable-joint order of the character.
CmaBounds default_cma_bounds(const CharacterModel& model);

// Text table: one line per joint, "name -x +x -y +y -z +z" in radians.
void save_cma_bounds(const std::string& path, const CharacterModel& model,
                     const CmaBounds& bounds);
CmaBounds load_cma_bounds(const std::string& path, const CharacterModel& model);

struct CmaConfig {
  int population = 6;       // lambda
  int generations = 30;
  int max_resample = 100;   // bounded-rejection budget per sample
  double initial_sigma = 0.1;  // radians, per dimension
  int threads = 1;
};

// One draw from the diagonal Gaussian with rejection against the bounds:
// redraws the whole vector until every free dimension is inside, up to
// max_resample times, then clamps componentwise. Pinned dimensions always
// take their pinned value.
VecX resample_bounded(const PoseDistribution& dist, const CmaBounds& bounds,
                      int max_resample, Rng* rng);

struct CmaResult {
  PoseDistribution dist;            // final search distribution
  VecX best;                        // best sample ever evaluated
  double best_value = 0;
  std::vector<double> best_curve;   // best-so-far per generation
  std::vector<VecX> mean_trace;     // mean after each generation
  std::vector<VecX> sigma_trace;    // per-dim sigma after each generation
};

// (mu_W, lambda) evolution strategy with separable (diagonal) covariance
// adaptation and cumulative step-size control. Samples are drawn with
// resample_bounded; objectives returning non-finite values rank worst.
// Deterministic for a given rng state, independent of threads.
CmaResult cma_optimize(const std::function<double(const VecX&)>& objective,
                       const PoseDistribution& init, const CmaBounds& bounds,
                       const CmaConfig& config, Rng* rng);

// Evolves a target-pose distribution that tracks one reference frame from the
// world's current state: the objective rolls out each candidate target for one
// 30 Hz frame and scores it with the unweighted tracking loss (pose, dynamics
// and balance terms; no observations are involved). Initial mean is the
// movable part of the reference pose. Divergence ranks the sample worst.
PoseDistribution cma_track_frame(const SimWorld& world, const PoseSample& ref,
                                 const CmaConfig& config, Rng* rng);

}  // namespace simcap

#endif  // SIMCAP_CMAES_H_
