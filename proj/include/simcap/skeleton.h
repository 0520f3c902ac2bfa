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

#ifndef SIMCAP_SKELETON_H_
#define SIMCAP_SKELETON_H_

#include <array>
#include <string>
#include <vector>

#include "simcap/common.h"

namespace simcap {

// Axis convention: z up, ground plane z = 0, the character faces -y,
// +x is the character's left. All lengths in meters, angles in radians.

enum class JointType { kSpherical, kFixed };
enum class GeomType { kSphere, kCapsule, kBox };

struct Geometry {
  GeomType type = GeomType::kSphere;
  // sphere: dims.x = radius.
  // capsule: dims.x = radius, dims.y = half cylinder length, axis = local z
  //          unless axis_x is set (then local x).
  // box: dims = half extents.
  Vec3 dims = Vec3::Zero();
  Vec3 center = Vec3::Zero();  // link-frame offset of the geometry center
  bool axis_x = false;
};

struct JointSpec {
  std::string name;
  JointType type = JointType::kSpherical;
  Geometry geometry;
  double mass = 0;          // kg
  double kp = 0;            // N*m/rad
  double kd = 0;            // N*m*s/rad
  double torque_limit = 0;  // N*m
  Mat3 inertia = Mat3::Zero();  // link inertia about its center, link frame
  int parent = -1;              // joint index, or -1 for the pelvis base
  Vec3 local_offset = Vec3::Zero();  // joint origin in the parent frame
  int scale_group = 0;               // SkeletonScale slot for local_offset
};

struct BaseSpec {
  std::string name = "pelvis";
  Geometry geometry;
  double mass = 0;
  Mat3 inertia = Mat3::Zero();
};

// One length multiplier per bone group; left/right pairs share a slot.
// The multiplier scales the offset from the parent to the named joint.
struct SkeletonScale {
  static constexpr int kGroups = 12;
  std::array<double, kGroups> multipliers;
  SkeletonScale() { multipliers.fill(1.0); }
  static const std::array<const char*, kGroups>& group_names();
};

struct CharacterModel {
  BaseSpec base;
  std::vector<JointSpec> joints;   // 19, tree order (parents precede children)
  std::vector<int> movable;        // indices of the 17 spherical joints
  std::vector<int> qpos;           // per joint: offset into q, or -1 if fixed
  double total_mass = 0;
  int dof = 0;

  int movable_count() const { return static_cast<int>(movable.size()); }
  int fixed_count() const {
    return static_cast<int>(joints.size()) - movable_count();
  }
  int joint_index(const std::string& name) const;
};

struct CharacterState {
  VecX q = VecX::Zero(kDof);
  VecX qdot = VecX::Zero(kDof);
};

// Flat 114-vector view of a state: pose stacked on velocity.
inline VecX pack_state(const CharacterState& s) {
  VecX v(kStateDim);
  v.head(kDof) = s.q;
  v.tail(kDof) = s.qdot;
  return v;
}

inline CharacterState unpack_state(const VecX& v) {
  if (v.size() != kStateDim) throw std::invalid_argument("bad state size");
  CharacterState s;
  s.q = v.head(kDof);
  s.qdot = v.tail(kDof);
  return s;
}

struct FkResult {
  Vec3 base_pos;
  Mat3 base_rot;
  std::vector<Vec3> joint_pos;  // world joint origins, one per joint
  std::vector<Mat3> joint_rot;  // world rotation of each joint's child link
  Vec3 com;
};

// Builds the default 19-joint character, offsets scaled per bone group.
// Throws std::invalid_argument on non-positive multipliers.
CharacterModel build_character(const SkeletonScale& scale = SkeletonScale());

FkResult forward_kinematics(const CharacterModel& model, const VecX& q);

// World positions of the 20 tracked points: base origin then 19 joint origins.
std::vector<Vec3> keypoints(const FkResult& fk);

// World velocities of the 20 tracked points for the given state velocity
// (root linear velocity world-frame, root/joint angular velocities body-frame).
std::vector<Vec3> keypoint_velocities(const CharacterModel& model,
                                      const FkResult& fk, const VecX& qdot);

// World velocity of the whole-body center of mass (time derivative of fk.com).
Vec3 com_velocity(const CharacterModel& model, const FkResult& fk,
                  const VecX& qdot);

// Accumulates d(loss)/dq given d(loss)/d(keypoint) for the 20 tracked points.
// Exact reverse-mode derivative of forward_kinematics + keypoints.
VecX fk_backward(const CharacterModel& model, const VecX& q, const FkResult& fk,
                 const std::vector<Vec3>& point_grads);

// d(loss)/d(scale multipliers) for the same point gradients; unit_model must
// be the unit-scale character (provides unscaled bone offsets).
VecX fk_scale_backward(const CharacterModel& unit_model, const FkResult& fk,
                       const std::vector<Vec3>& point_grads);

// d(loss)/dq for a world point rigidly attached to the given joint's link
// (point_world = joint origin + joint rotation * local offset). Unlike the
// keypoint form, the joint's own rotation moves the point, so it enters the
// gradient too. joint = -1 attaches the point to the base link.
VecX fk_point_backward(const CharacterModel& model, const VecX& q,
                       const FkResult& fk, int joint, const Vec3& point_world,
                       const Vec3& point_grad);

// Tangent-space difference: translation subtracted, rotations as the
// axis-angle of R_b^-1 R_a per joint (body-frame relative rotation).
VecX pose_difference(const VecX& a, const VecX& b);

// Inverse of pose_difference: integrates a tangent for time dt onto a pose.
VecX pose_integrate(const VecX& q, const VecX& tangent, double dt);

struct ReferenceMotion {
  double frame_rate = 30.0;
  std::vector<double> timestamps;
  std::vector<VecX> poses;       // 57 each
  std::vector<VecX> velocities;  // 57 each, forward finite differences
  void compute_velocities();
  int frame_count() const { return static_cast<int>(poses.size()); }
};

struct PoseSample {
  VecX pose;
  VecX velocity;
};

// Linear interpolation of translation, relative-rotation scaling for
// rotations; velocity is the bracketing finite difference. Throws
// std::out_of_range when t is outside the covered span.
PoseSample interpolate_reference(const ReferenceMotion& motion, double t);

void save_motion(const std::string& path, const ReferenceMotion& motion);
ReferenceMotion load_motion(const std::string& path);

void save_character(const std::string& path, const CharacterModel& model);
CharacterModel load_character(const std::string& path);

// Contact-relevant foot points in the ankle link frame: heel, toe, and the
// two metatarsal corners of the foot box.
std::array<Vec3, 4> foot_keypoints_local();

inline VecX state_to_vector(const CharacterState& s) {
  VecX v(kStateDim);
  v.head(kDof) = s.q;
  v.tail(kDof) = s.qdot;
  return v;
}

inline CharacterState vector_to_state(const VecX& v) {
  CharacterState s;
  s.q = v.head(kDof);
  s.qdot = v.tail(kDof);
  return s;
}

// Joint indices used where end-effector sets are needed: both wrists, both
// ankles.
std::array<int, 4> end_effector_joints(const CharacterModel& model);

}  // namespace simcap

#endif  // SIMCAP_SKELETON_H_
