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

#ifndef SIMCAP_DYNAMICS_H_
#define SIMCAP_DYNAMICS_H_

#include <memory>
#include <vector>

#include "simcap/common.h"
#include "simcap/scene.h"
#include "simcap/skeleton.h"

namespace simcap {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct SimConfig {
  double dt = 1.0 / 240.0;
  int substeps = 2;
  int solver_iterations = 10;
  double gravity = 9.81;  // magnitude, acting along -z
  double lateral_friction = 0.9;
  double rolling_friction = 0.3;
  double restitution = 0.0;
  // engineering constants, not part of the published configuration
  double contact_slop = 0.002;      // tolerated penetration, meters
  double baumgarte = 0.2;           // positional stabilization factor
  double max_joint_speed = 100.0;   // rad/s, divergence threshold
  double max_root_speed = 50.0;     // m/s, divergence threshold
};

// Immutable derived structure: the reduced-coordinate body tree with fixed
// joints welded into their parents and contact candidates precomputed.
struct DynModel {
  struct Candidate {
    Vec3 local;     // body frame
    double radius;  // 0 for box corners
  };
  struct Body {
    int parent;  // dyn body index, -1 = none (base is body 0)
    int joint;   // index into model.joints, -1 for the base
    int qpos;    // offset into q for this body's spherical joint, -1 for base
    Vec3 offset; // joint origin in the parent body frame
    double mass;
    Vec3 com;       // merged center of mass, body frame
    Mat3 inertia_com;
    Mat6 inertia;   // spatial inertia about the body origin
    double kd;      // joint damping gain (0 for the base)
    std::vector<Candidate> candidates;
  };
  CharacterModel model;
  std::vector<Body> bodies;        // base first, then movable joints in order
  std::vector<int> body_of_joint;  // model joint index -> dyn body index
};

std::shared_ptr<const DynModel> make_dyn_model(const CharacterModel& model);

struct ExternalForce {
  int joint = -1;  // model joint index, -1 for the base link
  Vec3 point_world = Vec3::Zero();
  Vec3 force_world = Vec3::Zero();
};

struct ContactInfo {
  int joint = -1;  // model joint index of the contacting body, -1 base
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
  double penetration = 0;
  double impulse_n = 0;        // accumulated normal impulse, N*s
  Vec3 impulse_t = Vec3::Zero();  // accumulated friction impulse, world
};

struct SimWorld {
  std::shared_ptr<const DynModel> dyn;
  std::shared_ptr<const SceneGeometry> scene;
  SimConfig config;
  CharacterState state;
  std::uint64_t rng_seed = 0;
  double time = 0;
  bool diverged = false;
  std::vector<ExternalForce> external_forces;  // applied every substep
  std::vector<ContactInfo> last_contacts;      // from the most recent substep

  const CharacterModel& model() const { return dyn->model; }
};

SimWorld make_sim_world(const CharacterModel& model, const SceneGeometry& scene,
                        const SimConfig& config = SimConfig(),
                        std::uint64_t seed = 0);

// Joint-space inertia matrix in the mixed velocity coordinates
// [v_world, omega_body, joint omegas], via the composite-rigid-body pass.
MatX mass_matrix(const CharacterModel& model, const VecX& q);

// h(q, qdot): gravity, Coriolis and gyroscopic generalized forces such that
// M qddot = tau - h. Recursive Newton-Euler with zero acceleration.
VecX bias_forces(const CharacterModel& model, const CharacterState& state);

// Articulated-body forward dynamics. Torques use the generalized coordinate
// layout; the 6 root entries must be zero (the root is unactuated).
VecX forward_dynamics(const CharacterModel& model, const CharacterState& state,
                      const VecX& torques,
                      const std::vector<ExternalForce>& external = {},
                      double gravity = 9.81);

// Explicit PD control torques: per movable joint kp * (target - q) - kd * qdot
// with the 3-vector clamped to the joint torque limit; root entries zero.
VecX pd_torques(const CharacterModel& model, const CharacterState& state,
                const VecX& target_movable);

// One simulation step of config.dt split into substeps: applied torques,
// gravity, sequential-impulse contacts, semi-implicit Euler with
// exponential-map rotation updates. Sets world.diverged instead of throwing
// when velocities pass the divergence thresholds.
void step(SimWorld& world, const VecX& torques);

// One 240 Hz control step driving toward the 51-dim movable-joint target with
// the position torque clamped per joint and joint damping integrated
// implicitly (stable at high derivative gains).
void control_step(SimWorld& world, const VecX& target_movable);

// Executes 8 control steps (30 Hz sampling against 240 Hz control),
// recomputing torques before each; optionally records the per-step states.
void rollout_target(SimWorld& world, const VecX& target_movable,
                    std::vector<CharacterState>* trace = nullptr);

inline constexpr int kControlStepsPerTarget = 8;

double kinetic_energy(const SimWorld& world);
double potential_energy(const SimWorld& world);
// Linear momentum and angular momentum about the world origin.
void momentum(const SimWorld& world, Vec3* linear, Vec3* angular);

}  // namespace simcap

#endif  // SIMCAP_DYNAMICS_H_
