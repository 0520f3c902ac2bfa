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

#ifndef SIMCAP_SCENE_H_
#define SIMCAP_SCENE_H_

#include <string>
#include <variant>
#include <vector>

#include "simcap/common.h"

namespace simcap {

// Half-space: points with dot(normal, p) - offset < 0 are inside.
struct PlanePrim {
  Vec3 normal = Vec3(0, 0, 1);
  double offset = 0;
};

// Axis-aligned box.
struct BoxPrim {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
};

// Height samples over a regular xy grid; terrain fills z <= height(x, y).
struct HeightfieldPrim {
  Vec3 origin = Vec3::Zero();  // corner of the grid, z ignored for extent
  double spacing = 0.1;
  int nx = 0;
  int ny = 0;
  std::vector<double> heights;  // nx * ny, x-fastest
  double height_at(double x, double y) const;  // bilinear, clamped
};

using ScenePrim = std::variant<PlanePrim, BoxPrim, HeightfieldPrim>;

// Union of primitives; the scene SDF is the min over primitive SDFs.
struct SceneGeometry {
  std::vector<ScenePrim> prims;
};

// Exact signed distance to one primitive / the scene union (negative inside).
// The heightfield distance is the vertical gap to the surface, a documented
// approximation that is exact for flat terrain.
double primitive_sdf(const ScenePrim& prim, const Vec3& p);
double analytic_sdf(const SceneGeometry& scene, const Vec3& p);
Vec3 analytic_sdf_gradient(const SceneGeometry& scene, const Vec3& p);

SceneGeometry flat_ground_scene();
// Stairs climbing toward -y (the character's facing direction), first step
// front edge at y = y_front.
SceneGeometry staircase_scene(int steps, double rise, double run,
                              double width, double y_front = -0.3);

void save_scene(const std::string& path, const SceneGeometry& scene);
SceneGeometry load_scene(const std::string& path);

}  // namespace simcap

#endif  // SIMCAP_SCENE_H_
