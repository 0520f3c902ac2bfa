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

#include "simcap/sdf.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "simcap/textio.h"

namespace simcap {

SdfGrid bake_sdf(const SceneGeometry& scene, const Vec3& bounds_min,
                 const Vec3& bounds_max,
                 const std::array<std::uint32_t, 3>& resolution) {
  for (int k = 0; k < 3; ++k) {
    if (!(bounds_max[k] > bounds_min[k])) {
      throw std::invalid_argument("degenerate sdf bounds");
    }
    if (resolution[k] < 2) throw std::invalid_argument("resolution too small");
  }
  SdfGrid grid;
  grid.resolution = resolution;
  grid.origin = bounds_min;
  // one spacing for all axes: take the largest required, nodes may overshoot
  // bounds_max slightly on shorter axes but never undershoot
  double spacing = 0;
  for (int k = 0; k < 3; ++k) {
    spacing = std::max(spacing,
                       (bounds_max[k] - bounds_min[k]) / (resolution[k] - 1));
  }
  grid.spacing = spacing;
  grid.values.resize(static_cast<std::size_t>(resolution[0]) * resolution[1] *
                     resolution[2]);
  std::size_t idx = 0;
  for (std::uint32_t iz = 0; iz < resolution[2]; ++iz) {
    for (std::uint32_t iy = 0; iy < resolution[1]; ++iy) {
      for (std::uint32_t ix = 0; ix < resolution[0]; ++ix) {
        const Vec3 p = grid.origin + spacing * Vec3(ix, iy, iz);
        grid.values[idx++] = static_cast<float>(analytic_sdf(scene, p));
      }
    }
  }
  return grid;
}

SdfSample sample_sdf(const SdfGrid& grid, const Vec3& point) {
  SdfSample out;
  Vec3 f;
  for (int k = 0; k < 3; ++k) {
    const double raw = (point[k] - grid.origin[k]) / grid.spacing;
    const double hi = static_cast<double>(grid.resolution[k] - 1);
    if (raw < 0 || raw > hi) out.out_of_bounds = true;
    f[k] = std::clamp(raw, 0.0, hi);
  }
  int ix = std::min(static_cast<int>(f.x()),
                    static_cast<int>(grid.resolution[0]) - 2);
  int iy = std::min(static_cast<int>(f.y()),
                    static_cast<int>(grid.resolution[1]) - 2);
  int iz = std::min(static_cast<int>(f.z()),
                    static_cast<int>(grid.resolution[2]) - 2);
  const double ux = f.x() - ix;
  const double uy = f.y() - iy;
  const double uz = f.z() - iz;
  const double v000 = grid.at(ix, iy, iz);
  const double v100 = grid.at(ix + 1, iy, iz);
  const double v010 = grid.at(ix, iy + 1, iz);
  const double v110 = grid.at(ix + 1, iy + 1, iz);
  const double v001 = grid.at(ix, iy, iz + 1);
  const double v101 = grid.at(ix + 1, iy, iz + 1);
  const double v011 = grid.at(ix, iy + 1, iz + 1);
  const double v111 = grid.at(ix + 1, iy + 1, iz + 1);
  const double c00 = v000 + ux * (v100 - v000);
  const double c10 = v010 + ux * (v110 - v010);
  const double c01 = v001 + ux * (v101 - v001);
  const double c11 = v011 + ux * (v111 - v011);
  const double c0 = c00 + uy * (c10 - c00);
  const double c1 = c01 + uy * (c11 - c01);
  out.value = c0 + uz * (c1 - c0);
  // analytic partial derivatives of the trilinear form
  const double dx = ((v100 - v000) * (1 - uy) + (v110 - v010) * uy) * (1 - uz) +
                    ((v101 - v001) * (1 - uy) + (v111 - v011) * uy) * uz;
  const double dy = (c10 - c00) * (1 - uz) + (c11 - c01) * uz;
  const double dz = c1 - c0;
  out.gradient = Vec3(dx, dy, dz) / grid.spacing;
  return out;
}

double geman_mcclure(double residual, double c) {
  if (!(c > 0)) throw std::invalid_argument("gm scale must be positive");
  const double r2 = residual * residual;
  const double c2 = c * c;
  return r2 * c2 / (r2 + c2);
}

double geman_mcclure_derivative(double residual, double c) {
  if (!(c > 0)) throw std::invalid_argument("gm scale must be positive");
  const double r2 = residual * residual;
  const double c2 = c * c;
  const double denom = r2 + c2;
  return 2.0 * residual * c2 * c2 / (denom * denom);
}

void save_sdf(const std::string& path, const SdfGrid& grid) {
  std::vector<std::uint8_t> buf;
  buf.resize(3 * 4 + 3 * 8 + 8 + grid.values.size() * 4);
  std::uint8_t* p = buf.data();
  std::memcpy(p, grid.resolution.data(), 12);
  p += 12;
  double origin[3] = {grid.origin.x(), grid.origin.y(), grid.origin.z()};
  std::memcpy(p, origin, 24);
  p += 24;
  std::memcpy(p, &grid.spacing, 8);
  p += 8;
  std::memcpy(p, grid.values.data(), grid.values.size() * 4);
  write_binary(path, buf.data(), buf.size());
}

SdfGrid load_sdf(const std::string& path) {
  const std::vector<std::uint8_t> buf = read_binary(path);
  if (buf.size() < 44) throw std::runtime_error("truncated sdf file " + path);
  SdfGrid grid;
  const std::uint8_t* p = buf.data();
  std::memcpy(grid.resolution.data(), p, 12);
  p += 12;
  double origin[3];
  std::memcpy(origin, p, 24);
  p += 24;
  grid.origin = Vec3(origin[0], origin[1], origin[2]);
  std::memcpy(&grid.spacing, p, 8);
  p += 8;
  const std::size_t count = static_cast<std::size_t>(grid.resolution[0]) *
                            grid.resolution[1] * grid.resolution[2];
  if (buf.size() != 44 + count * 4) {
    throw std::runtime_error("sdf value block size mismatch in " + path);
  }
  grid.values.resize(count);
  std::memcpy(grid.values.data(), p, count * 4);
  return grid;
}

}  // namespace simcap
