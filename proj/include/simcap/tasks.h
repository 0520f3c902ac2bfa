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

#ifndef SIMCAP_TASKS_H_
#define SIMCAP_TASKS_H_

#include <string>

#include "simcap/camera.h"
#include "simcap/kinopt.h"
#include "simcap/scene.h"

namespace simcap {

enum class TaskName { kStand, kSquat, kWalkInPlace, kLiftLeg, kStairStep };

// throws std::invalid_argument for unknown names
TaskName task_from_string(const std::string& name);
std::string to_string(TaskName name);

// A scripted synthetic motion: a target-pose program tracked by the
// simulated character over its terrain. The recorded rollout serves as
// physically consistent ground truth.
struct SyntheticTask {
  TaskName name = TaskName::kStand;
  double duration = 2.0;  // seconds of recorded ground truth
  SceneGeometry terrain;

  // movable-joint pd target at time t since the start of the recording
  VecX target_pose(double t) const;
};

SyntheticTask make_task(TaskName name, double duration = 2.0);

// camera with an unoccluded view of the task (behind the character for
// stair work, in front otherwise)
Camera default_task_camera(TaskName name);

struct TaskResult {
  ReferenceMotion gt;
  ObservationSequence obs;
};

// Simulates the task's target program until the character is stable, then
// records duration seconds at 30 Hz as ground truth and projects it to 2D
// observations with the given pixel noise. Throws std::runtime_error if the
// character never stabilizes, falls, or the simulation diverges.
TaskResult synthesize_task(const SyntheticTask& task, const Camera& camera,
                           double noise_px, std::uint64_t seed);

}  // namespace simcap

#endif  // SIMCAP_TASKS_H_
