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

#include "simcap/tasks.h"

#include <cmath>
#include <stdexcept>

#include "simcap/dynamics.h"

namespace simcap {

namespace {

constexpr double kFrameRate = 30.0;
constexpr double kSettleEnergy = 0.02;   // joules, at-rest threshold
constexpr int kSettleFrames = 8;         // consecutive quiet frames required
constexpr double kMaxSettleSeconds = 3.0;
constexpr double kFallRootHeight = 0.3;  // meters

// smooth 0 -> 1 ramp over [t0, t1]
double ramp(double t, double t0, double t1) {
  const double r = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
  return r * r * (3.0 - 2.0 * r);
}

struct TargetWriter {
  const CharacterModel& model;
  VecX* target;

  void set(const std::string& joint, int axis, double value) const {
    const int qpos = model.qpos[model.joint_index(joint)];
    (*target)[qpos - 6 + axis] = value;
  }
};

void leg_fold(const TargetWriter& w, const std::string& side, double hip,
              double knee, double ankle) {
  w.set(side + "_hip", 0, hip);
  w.set(side + "_knee", 0, knee);
  w.set(side + "_ankle", 0, ankle);
}

VecX squat_target(const CharacterModel& model, double t) {
  VecX target = VecX::Zero(kMovableDof);
  const TargetWriter w{model, &target};
  const double theta = 0.35 * 0.5 * (1.0 - std::cos(2.0 * M_PI * t / 2.0));
  leg_fold(w, "left", -theta, 2.0 * theta, -theta);
  leg_fold(w, "right", -theta, 2.0 * theta, -theta);
  return target;
}

VecX walk_in_place_target(const CharacterModel& model, double t) {
  VecX target = VecX::Zero(kMovableDof);
  const TargetWriter w{model, &target};
  const double ease = ramp(t, 0.0, 0.8);
  const double phase = 2.0 * M_PI * t / 2.4;
  // march in place with gentle alternating heel raises; both feet keep
  // ground contact because a single ankle cannot stabilize the body
  // (ankle kp is below the inverted-pendulum gravity stiffness)
  const double up = std::sin(phase);
  const double lift_l = ease * (up > 0 ? up * up : 0.0);
  const double lift_r = ease * (up < 0 ? up * up : 0.0);
  // lean slightly forward; the foot extends much further ahead of the ankle
  // than behind it, so the forward balance margin is far larger
  leg_fold(w, "left", -0.1 * lift_l, 0.2 * lift_l, -0.03 * ease);
  leg_fold(w, "right", -0.1 * lift_r, 0.2 * lift_r, -0.03 * ease);
  w.set("left_shoulder", 0, 0.25 * ease * std::sin(phase));
  w.set("right_shoulder", 0, -0.25 * ease * std::sin(phase));
  return target;
}

VecX lift_leg_target(const CharacterModel& model, double t) {
  VecX target = VecX::Zero(kMovableDof);
  const TargetWriter w{model, &target};
  // shift weight over the right foot, then raise the left leg and hold
  const double shift = ramp(t, 0.0, 0.5);
  const double lift = ramp(t, 0.5, 1.1);
  w.set("right_hip", 1, -0.12 * shift);
  w.set("lower_back", 1, -0.10 * shift);
  leg_fold(w, "left", -0.7 * lift, 1.1 * lift, 0.0);
  return target;
}

VecX stair_step_target(const CharacterModel& model, double t) {
  VecX target = VecX::Zero(kMovableDof);
  const TargetWriter w{model, &target};
  // weight onto the right foot, then a three-phase left-leg swing: tuck the
  // knee high so the foot rises behind the body, carry it forward above the
  // tread, and lower it pressing onto the step for firm contact (the toe must
  // stay above the riser whenever it crosses the step's front plane)
  const double shift = ramp(t, 0.0, 0.5);
  const double tuck = ramp(t, 0.5, 0.85);
  const double reach = ramp(t, 0.85, 1.3);
  const double place = ramp(t, 1.3, 1.7);
  w.set("right_hip", 1, -0.12 * shift);
  w.set("lower_back", 1, -0.10 * shift);
  const double hip = -0.55 * tuck - 0.80 * reach + 0.44 * place;
  const double knee = 1.90 * tuck - 0.30 * reach - 0.89 * place;
  leg_fold(w, "left", hip, knee, 0.0);
  return target;
}

}  // namespace

TaskName task_from_string(const std::string& name) {
  if (name == "stand") return TaskName::kStand;
  if (name == "squat") return TaskName::kSquat;
  if (name == "walk-in-place") return TaskName::kWalkInPlace;
  if (name == "lift-leg") return TaskName::kLiftLeg;
  if (name == "stair-step") return TaskName::kStairStep;
  throw std::invalid_argument("unknown task: " + name);
}

std::string to_string(TaskName name) {
  switch (name) {
    case TaskName::kStand: return "stand";
    case TaskName::kSquat: return "squat";
    case TaskName::kWalkInPlace: return "walk-in-place";
    case TaskName::kLiftLeg: return "lift-leg";
    case TaskName::kStairStep: return "stair-step";
  }
  throw std::invalid_argument("unknown task enum");
}

VecX SyntheticTask::target_pose(double t) const {
  static const CharacterModel model = build_character();
  switch (name) {
    case TaskName::kStand: return VecX::Zero(kMovableDof);
    case TaskName::kSquat: return squat_target(model, t);
    case TaskName::kWalkInPlace: return walk_in_place_target(model, t);
    case TaskName::kLiftLeg: return lift_leg_target(model, t);
    case TaskName::kStairStep: return stair_step_target(model, t);
  }
  throw std::invalid_argument("unknown task enum");
}

SyntheticTask make_task(TaskName name, double duration) {
  if (duration <= 0) throw std::invalid_argument("duration must be positive");
  SyntheticTask task;
  task.name = name;
  task.duration = duration;
  task.terrain = name == TaskName::kStairStep
                     ? staircase_scene(3, 0.2, 0.3, 2.0)
                     : flat_ground_scene();
  return task;
}

Camera default_task_camera(TaskName name) {
  if (name == TaskName::kStairStep) {
    // behind the character so the staircase does not occlude the feet
    return look_at_camera(Vec3(0, 3.0, 1.4), Vec3(0, 0, 0.8), Vec3(0, 0, 1),
                          1000, 640, 360);
  }
  return look_at_camera(Vec3(0, -2.5, 1.0), Vec3(0, 0, 0.9), Vec3(0, 0, 1),
                        1000, 640, 360);
}

TaskResult synthesize_task(const SyntheticTask& task, const Camera& camera,
                           double noise_px, std::uint64_t seed) {
  const CharacterModel model = build_character();
  SimWorld world = make_sim_world(model, task.terrain);
  world.state.q[2] = 0.95;  // feet resting exactly on the ground plane

  const auto failed = [&world]() {
    return world.diverged || world.state.q[2] < kFallRootHeight ||
           !world.state.q.allFinite();
  };

  // hold the initial target until the character comes to rest
  const VecX initial = task.target_pose(0.0);
  int quiet = 0;
  bool stable = false;
  const int max_settle = static_cast<int>(kMaxSettleSeconds * kFrameRate);
  for (int f = 0; f < max_settle; ++f) {
    rollout_target(world, initial);
    if (failed()) break;
    quiet = kinetic_energy(world) < kSettleEnergy ? quiet + 1 : 0;
    if (quiet >= kSettleFrames) {
      stable = true;
      break;
    }
  }
  if (!stable) {
    throw std::runtime_error("task '" + to_string(task.name) +
                             "' failed to stabilize");
  }

  TaskResult result;
  result.gt.frame_rate = kFrameRate;
  const int frames = static_cast<int>(std::lround(task.duration * kFrameRate));
  for (int i = 0; i < frames; ++i) {
    result.gt.poses.push_back(world.state.q);
    result.gt.timestamps.push_back(i / kFrameRate);
    rollout_target(world, task.target_pose(i / kFrameRate));
    if (failed()) {
      throw std::runtime_error("task '" + to_string(task.name) +
                               "' fell during recording");
    }
  }
  result.gt.compute_velocities();

  result.obs = synthesize_observations(model, result.gt, camera, task.terrain,
                                       noise_px, seed);
  return result;
}

}  // namespace simcap
