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

#include "simcap/camera.h"

#include <sstream>
#include <stdexcept>

#include "simcap/textio.h"

namespace simcap {

Camera look_at_camera(const Vec3& eye, const Vec3& target, const Vec3& up,
                      double focal, double cx, double cy) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-9)
    throw std::invalid_argument("view direction parallel to up");
  right.normalize();
  const Vec3 down = forward.cross(right);
  Camera cam;
  cam.fx = cam.fy = focal;
  cam.cx = cx;
  cam.cy = cy;
  cam.rot.row(0) = right;
  cam.rot.row(1) = down;
  cam.rot.row(2) = forward;
  cam.trans = -cam.rot * eye;
  return cam;
}

Vec2 reproject(const Camera& camera, const Vec3& point_world, bool* behind) {
  const Vec3 pc = camera.rot * point_world + camera.trans;
  if (pc.z() <= 1e-9) {
    if (behind == nullptr)
      throw std::domain_error("point at or behind the camera plane");
    *behind = true;
    return Vec2(camera.cx, camera.cy);
  }
  if (behind) *behind = false;
  return Vec2(camera.fx * pc.x() / pc.z() + camera.cx,
              camera.fy * pc.y() / pc.z() + camera.cy);
}

Eigen::Matrix<double, 2, 3> reproject_jacobian(const Camera& camera,
                                               const Vec3& point_world) {
  const Vec3 pc = camera.rot * point_world + camera.trans;
  if (pc.z() <= 1e-9)
    throw std::domain_error("point at or behind the camera plane");
  Eigen::Matrix<double, 2, 3> d_pix;
  const double inv_z = 1.0 / pc.z();
  d_pix << camera.fx * inv_z, 0, -camera.fx * pc.x() * inv_z * inv_z,
      0, camera.fy * inv_z, -camera.fy * pc.y() * inv_z * inv_z;
  return d_pix * camera.rot;
}

void save_camera(const std::string& path, const Camera& camera) {
  std::ostringstream out;
  out << "intrinsics " << format_double(camera.fx) << ' '
      << format_double(camera.fy) << ' ' << format_double(camera.cx) << ' '
      << format_double(camera.cy) << '\n';
  for (int r = 0; r < 3; ++r) {
    out << "extrinsics";
    for (int c = 0; c < 3; ++c) out << ' ' << format_double(camera.rot(r, c));
    out << ' ' << format_double(camera.trans[r]) << '\n';
  }
  write_file(path, out.str());
}

Camera load_camera(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty camera file");
  auto tok = split_ws(line);
  if (tok.size() != 5 || tok[0] != "intrinsics")
    throw std::runtime_error("malformed camera intrinsics");
  Camera cam;
  cam.fx = parse_double(tok[1]);
  cam.fy = parse_double(tok[2]);
  cam.cx = parse_double(tok[3]);
  cam.cy = parse_double(tok[4]);
  if (cam.fx <= 0 || cam.fy <= 0)
    throw std::runtime_error("focal lengths must be positive");
  for (int r = 0; r < 3; ++r) {
    if (!std::getline(in, line))
      throw std::runtime_error("truncated camera extrinsics");
    tok = split_ws(line);
    if (tok.size() != 5 || tok[0] != "extrinsics")
      throw std::runtime_error("malformed camera extrinsics");
    for (int c = 0; c < 3; ++c) cam.rot(r, c) = parse_double(tok[1 + c]);
    cam.trans[r] = parse_double(tok[4]);
  }
  const Mat3 rrt = cam.rot * cam.rot.transpose();
  if ((rrt - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6)
    throw std::runtime_error("camera rotation is not orthonormal");
  return cam;
}

void save_observations(const std::string& path,
                       const ObservationSequence& obs) {
  std::ostringstream out;
  out << "frame_rate " << format_double(obs.frame_rate) << '\n';
  out << "keypoints " << obs.keypoint_count() << '\n';
  out << "frames " << obs.frame_count() << '\n';
  for (int t = 0; t < obs.frame_count(); ++t) {
    out << "frame " << t << '\n';
    const FrameObservation& f = obs.frames[t];
    for (size_t k = 0; k < f.pixels.size(); ++k) {
      out << k << ' ' << format_double(f.pixels[k].x()) << ' '
          << format_double(f.pixels[k].y()) << ' '
          << format_double(f.confidence[k]) << '\n';
    }
  }
  write_file(path, out.str());
}

ObservationSequence load_observations(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  auto read_kv = [&](const std::string& key) {
    if (!std::getline(in, line))
      throw std::runtime_error("truncated observation file");
    auto tok = split_ws(line);
    if (tok.size() != 2 || tok[0] != key)
      throw std::runtime_error("expected '" + key + "' in observation file");
    return tok[1];
  };
  ObservationSequence obs;
  obs.frame_rate = parse_double(read_kv("frame_rate"));
  const int keypoints = static_cast<int>(parse_double(read_kv("keypoints")));
  const int frames = static_cast<int>(parse_double(read_kv("frames")));
  if (obs.frame_rate <= 0 || keypoints < 0 || frames < 0)
    throw std::runtime_error("invalid observation header");
  obs.frames.resize(frames);
  for (int t = 0; t < frames; ++t) {
    if (!std::getline(in, line) || split_ws(line) !=
                                       std::vector<std::string>{
                                           "frame", std::to_string(t)})
      throw std::runtime_error("missing frame marker");
    FrameObservation& f = obs.frames[t];
    f.pixels.resize(keypoints);
    f.confidence.resize(keypoints);
    for (int k = 0; k < keypoints; ++k) {
      if (!std::getline(in, line))
        throw std::runtime_error("truncated observation frame");
      auto tok = split_ws(line);
      if (tok.size() != 4 || tok[0] != std::to_string(k))
        throw std::runtime_error("malformed keypoint row");
      f.pixels[k] = Vec2(parse_double(tok[1]), parse_double(tok[2]));
      f.confidence[k] = parse_double(tok[3]);
      if (f.confidence[k] < 0 || f.confidence[k] > 1)
        throw std::runtime_error("confidence outside [0, 1]");
    }
  }
  return obs;
}

}  // namespace simcap
