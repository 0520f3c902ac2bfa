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

#ifndef SIMCAP_SDF_H_
#define SIMCAP_SDF_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "simcap/common.h"
#include "simcap/scene.h"

namespace simcap {

// Uniform voxel signed-distance grid; negative values are inside geometry.
struct SdfGrid {
  std::array<std::uint32_t, 3> resolution = {0, 0, 0};
  Vec3 origin = Vec3::Zero();
  double spacing = 0;
  std::vector<float> values;  // x-fastest order

  float at(int ix, int iy, int iz) const {
    return values[(static_cast<std::size_t>(iz) * resolution[1] + iy) *
                      resolution[0] +
                  ix];
  }
};

struct SdfSample {
  double value = 0;
  Vec3 gradient = Vec3::Zero();
  bool out_of_bounds = false;
};

// Evaluates analytic_sdf at every grid node. Throws std::invalid_argument on
// degenerate bounds or resolution < 2 per axis.
SdfGrid bake_sdf(const SceneGeometry& scene, const Vec3& bounds_min,
                 const Vec3& bounds_max,
                 const std::array<std::uint32_t, 3>& resolution = {256, 256,
                                                                   256});

// Trilinear interpolation with the analytic gradient of the trilinear form.
// Out-of-bounds queries clamp to the boundary and set the flag.
SdfSample sample_sdf(const SdfGrid& grid, const Vec3& point);

// rho(r) = r^2 c^2 / (r^2 + c^2): bounded robust cost for scene residuals.
double geman_mcclure(double residual, double c);
double geman_mcclure_derivative(double residual, double c);

void save_sdf(const std::string& path, const SdfGrid& grid);
SdfGrid load_sdf(const std::string& path);

}  // namespace simcap

#endif  // SIMCAP_SDF_H_
