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

#ifndef SIMCAP_CAMERA_H_
#define SIMCAP_CAMERA_H_

#include <string>
#include <vector>

#include "simcap/common.h"

namespace simcap {

// Pinhole camera. Camera frame: x right, y down, z forward (optical axis);
// p_cam = rot * p_world + trans.
struct Camera {
  double fx = 1000;
  double fy = 1000;
  double cx = 640;
  double cy = 360;
  Mat3 rot = Mat3::Identity();
  Vec3 trans = Vec3::Zero();

  Vec3 position() const { return -rot.transpose() * trans; }
};

// Camera at eye with the optical axis through target; up fixes the roll.
Camera look_at_camera(const Vec3& eye, const Vec3& target, const Vec3& up,
                      double focal, double cx, double cy);

// Pinhole projection to pixels. A point at or behind the camera plane sets
// *behind (throws std::domain_error when behind is null).
Vec2 reproject(const Camera& camera, const Vec3& point_world,
               bool* behind = nullptr);

// d(pixel)/d(world point) of reproject at the given point.
Eigen::Matrix<double, 2, 3> reproject_jacobian(const Camera& camera,
                                               const Vec3& point_world);

void save_camera(const std::string& path, const Camera& camera);
Camera load_camera(const std::string& path);

struct FrameObservation {
  std::vector<Vec2> pixels;        // one per tracked keypoint
  std::vector<double> confidence;  // in [0, 1]
};

struct ObservationSequence {
  Camera camera;
  double frame_rate = 30.0;
  std::vector<FrameObservation> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
  int keypoint_count() const {
    return frames.empty() ? 0 : static_cast<int>(frames[0].pixels.size());
  }
};

// Text round trip for the per-frame keypoint rows (the camera is stored in
// its own file via save_camera/load_camera).
void save_observations(const std::string& path,
                       const ObservationSequence& obs);
ObservationSequence load_observations(const std::string& path);

}  // namespace simcap

#endif  // SIMCAP_CAMERA_H_
