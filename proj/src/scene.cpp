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

#include "simcap/scene.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "simcap/textio.h"

namespace simcap {

double HeightfieldPrim::height_at(double x, double y) const {
  const double fx = std::clamp((x - origin.x()) / spacing, 0.0,
                               static_cast<double>(nx - 1));
  const double fy = std::clamp((y - origin.y()) / spacing, 0.0,
                               static_cast<double>(ny - 1));
  const int ix = std::min(static_cast<int>(fx), nx - 2);
  const int iy = std::min(static_cast<int>(fy), ny - 2);
  const double ux = fx - ix;
  const double uy = fy - iy;
  auto h = [&](int i, int j) { return heights[j * nx + i]; };
  return (1 - ux) * (1 - uy) * h(ix, iy) + ux * (1 - uy) * h(ix + 1, iy) +
         (1 - ux) * uy * h(ix, iy + 1) + ux * uy * h(ix + 1, iy + 1);
}

namespace {

double box_sdf(const BoxPrim& box, const Vec3& p) {
  const Vec3 center = 0.5 * (box.min + box.max);
  const Vec3 half = 0.5 * (box.max - box.min);
  const Vec3 d = (p - center).cwiseAbs() - half;
  const Vec3 outside = d.cwiseMax(0.0);
  const double inside = std::min(d.maxCoeff(), 0.0);
  return outside.norm() + inside;
}

}  // namespace

double primitive_sdf(const ScenePrim& prim, const Vec3& p) {
  if (const auto* plane = std::get_if<PlanePrim>(&prim)) {
    return plane->normal.dot(p) - plane->offset;
  }
  if (const auto* box = std::get_if<BoxPrim>(&prim)) {
    return box_sdf(*box, p);
  }
  const auto& hf = std::get<HeightfieldPrim>(prim);
  return p.z() - hf.height_at(p.x(), p.y());
}

double analytic_sdf(const SceneGeometry& scene, const Vec3& p) {
  if (scene.prims.empty()) throw std::invalid_argument("empty scene");
  double d = primitive_sdf(scene.prims[0], p);
  for (std::size_t i = 1; i < scene.prims.size(); ++i) {
    d = std::min(d, primitive_sdf(scene.prims[i], p));
  }
  return d;
}

Vec3 analytic_sdf_gradient(const SceneGeometry& scene, const Vec3& p) {
  const double h = 1e-6;
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    Vec3 pp = p;
    Vec3 pm = p;
    pp[k] += h;
    pm[k] -= h;
    g[k] = (analytic_sdf(scene, pp) - analytic_sdf(scene, pm)) / (2 * h);
  }
  return g;
}

SceneGeometry flat_ground_scene() {
  SceneGeometry scene;
  scene.prims.push_back(PlanePrim{Vec3(0, 0, 1), 0.0});
  return scene;
}

SceneGeometry staircase_scene(int steps, double rise, double run, double width,
                              double y_front) {
  SceneGeometry scene;
  scene.prims.push_back(PlanePrim{Vec3(0, 0, 1), 0.0});
  for (int i = 0; i < steps; ++i) {
    BoxPrim box;
    // step i spans [y_front - (i+1)*run, y_front - i*run] going toward -y,
    // with its top at (i+1)*rise; boxes extend down to the ground
    box.min = Vec3(-width / 2, y_front - (i + 1) * run, -0.01);
    box.max = Vec3(width / 2, y_front - i * run, (i + 1) * rise);
    scene.prims.push_back(box);
  }
  return scene;
}

void save_scene(const std::string& path, const SceneGeometry& scene) {
  std::string out;
  for (const ScenePrim& prim : scene.prims) {
    if (const auto* plane = std::get_if<PlanePrim>(&prim)) {
      out += "plane " + format_double(plane->normal.x()) + ' ' +
             format_double(plane->normal.y()) + ' ' +
             format_double(plane->normal.z()) + ' ' +
             format_double(plane->offset) + '\n';
    } else if (const auto* box = std::get_if<BoxPrim>(&prim)) {
      out += "box";
      for (int k = 0; k < 3; ++k) out += ' ' + format_double(box->min[k]);
      for (int k = 0; k < 3; ++k) out += ' ' + format_double(box->max[k]);
      out += '\n';
    } else {
      const auto& hf = std::get<HeightfieldPrim>(prim);
      out += "heightfield";
      for (int k = 0; k < 3; ++k) out += ' ' + format_double(hf.origin[k]);
      out += ' ' + format_double(hf.spacing) + ' ' + std::to_string(hf.nx) +
             ' ' + std::to_string(hf.ny) + '\n';
      for (int j = 0; j < hf.ny; ++j) {
        for (int i = 0; i < hf.nx; ++i) {
          if (i) out += ' ';
          out += format_double(hf.heights[j * hf.nx + i]);
        }
        out += '\n';
      }
    }
  }
  write_file(path, out);
}

SceneGeometry load_scene(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  SceneGeometry scene;
  while (std::getline(in, line)) {
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "plane") {
      PlanePrim plane;
      for (int k = 0; k < 3; ++k) plane.normal[k] = parse_double(tokens.at(1 + k));
      plane.offset = parse_double(tokens.at(4));
      scene.prims.push_back(plane);
    } else if (tokens[0] == "box") {
      BoxPrim box;
      for (int k = 0; k < 3; ++k) box.min[k] = parse_double(tokens.at(1 + k));
      for (int k = 0; k < 3; ++k) box.max[k] = parse_double(tokens.at(4 + k));
      scene.prims.push_back(box);
    } else if (tokens[0] == "heightfield") {
      HeightfieldPrim hf;
      for (int k = 0; k < 3; ++k) hf.origin[k] = parse_double(tokens.at(1 + k));
      hf.spacing = parse_double(tokens.at(4));
      hf.nx = std::stoi(tokens.at(5));
      hf.ny = std::stoi(tokens.at(6));
      hf.heights.reserve(static_cast<std::size_t>(hf.nx) * hf.ny);
      while (static_cast<int>(hf.heights.size()) < hf.nx * hf.ny &&
             std::getline(in, line)) {
        for (const std::string& tok : split_ws(line)) {
          hf.heights.push_back(parse_double(tok));
        }
      }
      if (static_cast<int>(hf.heights.size()) != hf.nx * hf.ny) {
        throw std::runtime_error("truncated heightfield in " + path);
      }
      scene.prims.push_back(std::move(hf));
    } else {
      throw std::runtime_error("unknown primitive '" + tokens[0] + "'");
    }
  }
  if (scene.prims.empty()) throw std::runtime_error("empty scene " + path);
  return scene;
}

}  // namespace simcap
