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

#include "simcap/skeleton.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "simcap/so3.h"
#include "simcap/textio.h"

namespace simcap {
namespace {

// Scale-group slots.
enum Group {
  kGLowerBack,
  kGUpperBack,
  kGChest,
  kGLowerNeck,
  kGUpperNeck,
  kGClavicle,
  kGShoulder,
  kGElbow,
  kGWrist,
  kGHip,
  kGKnee,
  kGAnkle,
};

Geometry sphere_geom(double r, const Vec3& center) {
  Geometry g;
  g.type = GeomType::kSphere;
  g.dims = Vec3(r, 0, 0);
  g.center = center;
  return g;
}

Geometry capsule_geom(double r, double half_len, const Vec3& center,
                      bool axis_x) {
  Geometry g;
  g.type = GeomType::kCapsule;
  g.dims = Vec3(r, half_len, 0);
  g.center = center;
  g.axis_x = axis_x;
  return g;
}

Geometry box_geom(const Vec3& half, const Vec3& center) {
  Geometry g;
  g.type = GeomType::kBox;
  g.dims = half;
  g.center = center;
  return g;
}

JointSpec make_joint(const std::string& name, JointType type, Geometry geom,
                     double mass, double kp, double kd, double limit,
                     int parent, const Vec3& offset, int group) {
  JointSpec j;
  j.name = name;
  j.type = type;
  j.geometry = geom;
  j.mass = mass;
  j.kp = kp;
  j.kd = kd;
  j.torque_limit = limit;
  j.inertia = 0.001 * Mat3::Identity();
  j.parent = parent;
  j.local_offset = offset;
  j.scale_group = group;
  return j;
}

}  // namespace

const std::array<const char*, SkeletonScale::kGroups>&
SkeletonScale::group_names() {
  static const std::array<const char*, kGroups> names = {
      "lower_back", "upper_back", "chest", "lower_neck",
      "upper_neck", "clavicle",   "shoulder", "elbow",
      "wrist",      "hip",        "knee",  "ankle"};
  return names;
}

int CharacterModel::joint_index(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(joints.size()); ++i) {
    if (joints[i].name == name) return i;
  }
  throw std::invalid_argument("unknown joint " + name);
}

CharacterModel build_character(const SkeletonScale& scale) {
  for (double m : scale.multipliers) {
    if (!(m > 0)) throw std::invalid_argument("scale multipliers must be > 0");
  }
  CharacterModel model;
  model.base.name = "pelvis";
  model.base.mass = 5.0;
  model.base.inertia = 0.02 * Mat3::Identity();
  model.base.geometry = box_geom(Vec3(0.10, 0.07, 0.07), Vec3::Zero());

  const JointType kSph = JointType::kSpherical;
  const JointType kFix = JointType::kFixed;
  auto& j = model.joints;
  j.reserve(kNumJoints);
  // Torso chain.
  j.push_back(make_joint("lower_back", kSph, sphere_geom(0.10, {0, 0, 0.06}),
                         5.0, 500, 50, 300, -1, {0, 0, 0.10}, kGLowerBack));
  j.push_back(make_joint("upper_back", kSph, sphere_geom(0.10, {0, 0, 0.06}),
                         5.0, 500, 50, 300, 0, {0, 0, 0.12}, kGUpperBack));
  j.push_back(make_joint("chest", kSph, sphere_geom(0.11, {0, 0, 0.075}), 8.0,
                         500, 50, 300, 1, {0, 0, 0.12}, kGChest));
  j.push_back(make_joint("lower_neck", kSph,
                         capsule_geom(0.04, 0.05, {0, 0, 0.05}, false), 0.5,
                         200, 20, 100, 2, {0, 0, 0.15}, kGLowerNeck));
  j.push_back(make_joint("upper_neck", kSph,
                         capsule_geom(0.08, 0.03, {0, 0, 0.10}, false), 3.0,
                         200, 20, 100, 3, {0, 0, 0.10}, kGUpperNeck));
  // Left arm.
  j.push_back(make_joint("left_clavicle", kSph,
                         capsule_geom(0.035, 0.05, {0.07, 0, 0}, true), 1.0,
                         400, 40, 200, 2, {0.08, 0, 0.10}, kGClavicle));
  j.push_back(make_joint("left_shoulder", kSph,
                         box_geom({0.14, 0.045, 0.045}, {0.14, 0, 0}), 2.0, 400,
                         40, 200, 5, {0.14, 0, 0}, kGShoulder));
  j.push_back(make_joint("left_elbow", kSph,
                         box_geom({0.125, 0.04, 0.04}, {0.125, 0, 0}), 1.0, 300,
                         30, 150, 6, {0.28, 0, 0}, kGElbow));
  j.push_back(make_joint("left_wrist", kFix, sphere_geom(0.045, {0.06, 0, 0}),
                         0.5, 0, 0, 0, 7, {0.25, 0, 0}, kGWrist));
  // Right arm.
  j.push_back(make_joint("right_clavicle", kSph,
                         capsule_geom(0.035, 0.05, {-0.07, 0, 0}, true), 1.0,
                         400, 40, 200, 2, {-0.08, 0, 0.10}, kGClavicle));
  j.push_back(make_joint("right_shoulder", kSph,
                         box_geom({0.14, 0.045, 0.045}, {-0.14, 0, 0}), 2.0,
                         400, 40, 200, 9, {-0.14, 0, 0}, kGShoulder));
  j.push_back(make_joint("right_elbow", kSph,
                         box_geom({0.125, 0.04, 0.04}, {-0.125, 0, 0}), 1.0,
                         300, 30, 150, 10, {-0.28, 0, 0}, kGElbow));
  j.push_back(make_joint("right_wrist", kFix,
                         sphere_geom(0.045, {-0.06, 0, 0}), 0.5, 0, 0, 0, 11,
                         {-0.25, 0, 0}, kGWrist));
  // Left leg.
  j.push_back(make_joint("left_hip", kSph,
                         capsule_geom(0.07, 0.14, {0, 0, -0.21}, false), 5.0,
                         500, 50, 300, -1, {0.09, 0, -0.06}, kGHip));
  j.push_back(make_joint("left_knee", kSph,
                         capsule_geom(0.05, 0.14, {0, 0, -0.20}, false), 3.0,
                         400, 40, 200, 13, {0, 0, -0.42}, kGKnee));
  j.push_back(make_joint("left_ankle", kSph,
                         box_geom({0.05, 0.09, 0.03}, {0, -0.04, -0.04}), 1.0,
                         300, 30, 100, 14, {0, 0, -0.40}, kGAnkle));
  // Right leg.
  j.push_back(make_joint("right_hip", kSph,
                         capsule_geom(0.07, 0.14, {0, 0, -0.21}, false), 5.0,
                         500, 50, 300, -1, {-0.09, 0, -0.06}, kGHip));
  j.push_back(make_joint("right_knee", kSph,
                         capsule_geom(0.05, 0.14, {0, 0, -0.20}, false), 3.0,
                         400, 40, 200, 16, {0, 0, -0.42}, kGKnee));
  j.push_back(make_joint("right_ankle", kSph,
                         box_geom({0.05, 0.09, 0.03}, {0, -0.04, -0.04}), 1.0,
                         300, 30, 100, 17, {0, 0, -0.40}, kGAnkle));

  model.total_mass = model.base.mass;
  model.qpos.assign(j.size(), -1);
  int next_q = 6;
  for (int i = 0; i < static_cast<int>(j.size()); ++i) {
    j[i].local_offset *= scale.multipliers[j[i].scale_group];
    model.total_mass += j[i].mass;
    if (j[i].type == JointType::kSpherical) {
      model.movable.push_back(i);
      model.qpos[i] = next_q;
      next_q += 3;
    }
  }
  model.dof = next_q;
  return model;
}

FkResult forward_kinematics(const CharacterModel& model, const VecX& q) {
  if (!q.allFinite()) throw std::invalid_argument("non-finite pose");
  FkResult fk;
  fk.base_pos = q.head<3>();
  fk.base_rot = so3_exp(q.segment<3>(3));
  const int n = static_cast<int>(model.joints.size());
  fk.joint_pos.resize(n);
  fk.joint_rot.resize(n);
  Vec3 weighted = model.base.mass *
                  (fk.base_pos + fk.base_rot * model.base.geometry.center);
  for (int i = 0; i < n; ++i) {
    const JointSpec& spec = model.joints[i];
    const Vec3& parent_pos =
        spec.parent < 0 ? fk.base_pos : fk.joint_pos[spec.parent];
    const Mat3& parent_rot =
        spec.parent < 0 ? fk.base_rot : fk.joint_rot[spec.parent];
    fk.joint_pos[i] = parent_pos + parent_rot * spec.local_offset;
    if (model.qpos[i] >= 0) {
      fk.joint_rot[i] = parent_rot * so3_exp(q.segment<3>(model.qpos[i]));
    } else {
      fk.joint_rot[i] = parent_rot;
    }
    weighted += spec.mass *
                (fk.joint_pos[i] + fk.joint_rot[i] * spec.geometry.center);
  }
  fk.com = weighted / model.total_mass;
  return fk;
}

std::vector<Vec3> keypoints(const FkResult& fk) {
  std::vector<Vec3> pts;
  pts.reserve(1 + fk.joint_pos.size());
  pts.push_back(fk.base_pos);
  pts.insert(pts.end(), fk.joint_pos.begin(), fk.joint_pos.end());
  return pts;
}

std::vector<Vec3> keypoint_velocities(const CharacterModel& model,
                                      const FkResult& fk, const VecX& qdot) {
  const int n = static_cast<int>(model.joints.size());
  // World-frame angular velocity of every link, accumulated down the tree.
  const Vec3 base_omega = fk.base_rot * qdot.segment<3>(3);
  std::vector<Vec3> omega(n);
  std::vector<Vec3> vel(n);
  const Vec3 base_vel = qdot.head<3>();
  for (int i = 0; i < n; ++i) {
    const JointSpec& spec = model.joints[i];
    const Vec3& parent_omega =
        spec.parent < 0 ? base_omega : omega[spec.parent];
    const Vec3& parent_vel = spec.parent < 0 ? base_vel : vel[spec.parent];
    const Vec3& parent_pos =
        spec.parent < 0 ? fk.base_pos : fk.joint_pos[spec.parent];
    vel[i] = parent_vel + parent_omega.cross(fk.joint_pos[i] - parent_pos);
    omega[i] = parent_omega;
    if (model.qpos[i] >= 0) {
      omega[i] += fk.joint_rot[i] * qdot.segment<3>(model.qpos[i]);
    }
  }
  std::vector<Vec3> out;
  out.reserve(1 + n);
  out.push_back(base_vel);
  out.insert(out.end(), vel.begin(), vel.end());
  return out;
}

Vec3 com_velocity(const CharacterModel& model, const FkResult& fk,
                  const VecX& qdot) {
  const int n = static_cast<int>(model.joints.size());
  const Vec3 base_omega = fk.base_rot * qdot.segment<3>(3);
  const Vec3 base_vel = qdot.head<3>();
  Vec3 weighted =
      model.base.mass *
      (base_vel + base_omega.cross(fk.base_rot * model.base.geometry.center));
  std::vector<Vec3> omega(n);
  std::vector<Vec3> vel(n);
  for (int i = 0; i < n; ++i) {
    const JointSpec& spec = model.joints[i];
    const Vec3& parent_omega =
        spec.parent < 0 ? base_omega : omega[spec.parent];
    const Vec3& parent_vel = spec.parent < 0 ? base_vel : vel[spec.parent];
    const Vec3& parent_pos =
        spec.parent < 0 ? fk.base_pos : fk.joint_pos[spec.parent];
    vel[i] = parent_vel + parent_omega.cross(fk.joint_pos[i] - parent_pos);
    omega[i] = parent_omega;
    if (model.qpos[i] >= 0) {
      omega[i] += fk.joint_rot[i] * qdot.segment<3>(model.qpos[i]);
    }
    weighted += spec.mass *
                (vel[i] + omega[i].cross(fk.joint_rot[i] * spec.geometry.center));
  }
  return weighted / model.total_mass;
}

VecX fk_backward(const CharacterModel& model, const VecX& q,
                 const FkResult& fk, const std::vector<Vec3>& point_grads) {
  const int n = static_cast<int>(model.joints.size());
  if (static_cast<int>(point_grads.size()) != n + 1) {
    throw std::invalid_argument("point_grads must cover base + joints");
  }
  VecX grad = VecX::Zero(model.dof);
  const Mat3 root_jl = so3_left_jacobian(q.segment<3>(3));
  // Gradient of a world point p w.r.t. a rotation perturbation at joint j:
  // dp = (Jl(theta_j) dtheta, rotated to world by the parent) x (p - o_j).
  for (int k = 0; k <= n; ++k) {
    const Vec3& g = point_grads[k];
    if (g.isZero()) continue;
    const Vec3& p = k == 0 ? fk.base_pos : fk.joint_pos[k - 1];
    // Translation affects every point identically.
    grad.head<3>() += g;
    grad.segment<3>(3) +=
        root_jl.transpose() * ((p - fk.base_pos).cross(g));
    int j = k - 1;
    while (j >= 0) {
      const JointSpec& spec = model.joints[j];
      if (model.qpos[j] >= 0 && k - 1 != j) {
        // Joint j only moves points strictly below it (its own origin is
        // fixed under its rotation).
        const Mat3& parent_rot =
            spec.parent < 0 ? fk.base_rot : fk.joint_rot[spec.parent];
        const Mat3 jl = so3_left_jacobian(q.segment<3>(model.qpos[j]));
        grad.segment<3>(model.qpos[j]) +=
            jl.transpose() *
            (parent_rot.transpose() * ((p - fk.joint_pos[j]).cross(g)));
      }
      j = spec.parent;
    }
  }
  return grad;
}

VecX fk_scale_backward(const CharacterModel& unit_model, const FkResult& fk,
                       const std::vector<Vec3>& point_grads) {
  const int n = static_cast<int>(unit_model.joints.size());
  if (static_cast<int>(point_grads.size()) != n + 1) {
    throw std::invalid_argument("point_grads must cover base + joints");
  }
  VecX grad = VecX::Zero(SkeletonScale::kGroups);
  for (int k = 1; k <= n; ++k) {
    const Vec3& g = point_grads[k];
    if (g.isZero()) continue;
    // p_k = base + sum over chain of R_parent * (s_group * offset_unit).
    int j = k - 1;
    while (j >= 0) {
      const JointSpec& spec = unit_model.joints[j];
      const Mat3& parent_rot =
          spec.parent < 0 ? fk.base_rot : fk.joint_rot[spec.parent];
      grad[spec.scale_group] += g.dot(parent_rot * spec.local_offset);
      j = spec.parent;
    }
  }
  return grad;
}

VecX fk_point_backward(const CharacterModel& model, const VecX& q,
                       const FkResult& fk, int joint, const Vec3& point_world,
                       const Vec3& point_grad) {
  if (joint < -1 || joint >= static_cast<int>(model.joints.size()))
    throw std::invalid_argument("joint index out of range");
  VecX grad = VecX::Zero(model.dof);
  grad.head<3>() = point_grad;
  const Mat3 root_jl = so3_left_jacobian(q.segment<3>(3));
  grad.segment<3>(3) =
      root_jl.transpose() * ((point_world - fk.base_pos).cross(point_grad));
  int j = joint;
  while (j >= 0) {
    const JointSpec& spec = model.joints[j];
    if (model.qpos[j] >= 0) {
      const Mat3& parent_rot =
          spec.parent < 0 ? fk.base_rot : fk.joint_rot[spec.parent];
      const Mat3 jl = so3_left_jacobian(q.segment<3>(model.qpos[j]));
      grad.segment<3>(model.qpos[j]) +=
          jl.transpose() * (parent_rot.transpose() *
                            ((point_world - fk.joint_pos[j]).cross(point_grad)));
    }
    j = spec.parent;
  }
  return grad;
}

VecX pose_difference(const VecX& a, const VecX& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
  VecX d(a.size());
  d.head<3>() = a.head<3>() - b.head<3>();
  for (int off = 3; off + 3 <= static_cast<int>(a.size()); off += 3) {
    const Mat3 ra = so3_exp(a.segment<3>(off));
    const Mat3 rb = so3_exp(b.segment<3>(off));
    d.segment<3>(off) = so3_log(rb.transpose() * ra);
  }
  return d;
}

VecX pose_integrate(const VecX& q, const VecX& tangent, double dt) {
  VecX out(q.size());
  out.head<3>() = q.head<3>() + dt * tangent.head<3>();
  for (int off = 3; off + 3 <= static_cast<int>(q.size()); off += 3) {
    const Mat3 r = so3_exp(q.segment<3>(off)) * so3_exp(dt * tangent.segment<3>(off));
    out.segment<3>(off) = so3_log(r);
  }
  return out;
}

void ReferenceMotion::compute_velocities() {
  const int n = frame_count();
  velocities.assign(n, VecX::Zero(kDof));
  for (int t = 0; t + 1 < n; ++t) {
    const double dt = timestamps[t + 1] - timestamps[t];
    velocities[t] = pose_difference(poses[t + 1], poses[t]) / dt;
  }
  if (n >= 2) velocities[n - 1] = velocities[n - 2];
}

PoseSample interpolate_reference(const ReferenceMotion& motion, double t) {
  const int n = motion.frame_count();
  if (n == 0) throw std::out_of_range("empty motion");
  const double eps = 1e-9;
  if (t < motion.timestamps.front() - eps || t > motion.timestamps.back() + eps) {
    throw std::out_of_range("time outside motion span");
  }
  t = std::clamp(t, motion.timestamps.front(), motion.timestamps.back());
  if (n == 1) return {motion.poses[0], VecX::Zero(kDof)};
  const auto it = std::upper_bound(motion.timestamps.begin(),
                                   motion.timestamps.end(), t);
  int hi = static_cast<int>(it - motion.timestamps.begin());
  hi = std::clamp(hi, 1, n - 1);
  const int lo = hi - 1;
  const double span = motion.timestamps[hi] - motion.timestamps[lo];
  const double u = std::clamp((t - motion.timestamps[lo]) / span, 0.0, 1.0);
  PoseSample out;
  const VecX& a = motion.poses[lo];
  const VecX& b = motion.poses[hi];
  out.velocity = pose_difference(b, a) / span;
  if (u == 0.0) {
    out.pose = a;
    return out;
  }
  if (u == 1.0) {
    out.pose = b;
    return out;
  }
  out.pose = VecX(kDof);
  out.pose.head<3>() = (1 - u) * a.head<3>() + u * b.head<3>();
  for (int off = 3; off + 3 <= kDof; off += 3) {
    const Mat3 ra = so3_exp(a.segment<3>(off));
    const Mat3 rb = so3_exp(b.segment<3>(off));
    const Vec3 rel = so3_log(ra.transpose() * rb);
    out.pose.segment<3>(off) = so3_log(ra * so3_exp(u * rel));
  }
  return out;
}

void save_motion(const std::string& path, const ReferenceMotion& motion) {
  std::string out;
  out += "frame_rate " + format_double(motion.frame_rate) + "\n";
  out += "dof " + std::to_string(kDof) + "\n";
  for (int t = 0; t < motion.frame_count(); ++t) {
    out += format_double(motion.timestamps[t]);
    for (int i = 0; i < kDof; ++i) {
      out += ' ';
      out += format_double(motion.poses[t][i]);
    }
    out += '\n';
  }
  write_file(path, out);
}

ReferenceMotion load_motion(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  ReferenceMotion motion;
  int dof = -1;
  while (std::getline(in, line)) {
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "frame_rate") {
      motion.frame_rate = parse_double(tokens.at(1));
    } else if (tokens[0] == "dof") {
      dof = std::stoi(tokens.at(1));
      if (dof != kDof) throw std::runtime_error("unsupported dof in " + path);
    } else {
      if (static_cast<int>(tokens.size()) != 1 + kDof) {
        throw std::runtime_error("bad frame line in " + path);
      }
      motion.timestamps.push_back(parse_double(tokens[0]));
      VecX pose(kDof);
      for (int i = 0; i < kDof; ++i) pose[i] = parse_double(tokens[1 + i]);
      motion.poses.push_back(std::move(pose));
    }
  }
  if (dof < 0) throw std::runtime_error("missing dof header in " + path);
  motion.compute_velocities();
  return motion;
}

namespace {

nlohmann::json geometry_to_json(const Geometry& g) {
  nlohmann::json out;
  out["type"] = g.type == GeomType::kSphere    ? "sphere"
                : g.type == GeomType::kCapsule ? "capsule"
                                               : "box";
  out["dims"] = {g.dims.x(), g.dims.y(), g.dims.z()};
  out["center"] = {g.center.x(), g.center.y(), g.center.z()};
  out["axis_x"] = g.axis_x;
  return out;
}

Geometry geometry_from_json(const nlohmann::json& in) {
  Geometry g;
  const std::string type = in.at("type");
  g.type = type == "sphere"    ? GeomType::kSphere
           : type == "capsule" ? GeomType::kCapsule
                               : GeomType::kBox;
  for (int i = 0; i < 3; ++i) {
    g.dims[i] = in.at("dims").at(i);
    g.center[i] = in.at("center").at(i);
  }
  g.axis_x = in.at("axis_x");
  return g;
}

nlohmann::json mat3_to_json(const Mat3& m) {
  nlohmann::json out = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out.push_back(m(r, c));
  }
  return out;
}

Mat3 mat3_from_json(const nlohmann::json& in) {
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = in.at(3 * r + c);
  }
  return m;
}

}  // namespace

void save_character(const std::string& path, const CharacterModel& model) {
  nlohmann::json out;
  out["units"] = {{"length", "m"}, {"mass", "kg"}, {"angle", "rad"},
                  {"gain", "N*m/rad"}, {"torque", "N*m"}};
  out["base"] = {{"name", model.base.name},
                 {"mass", model.base.mass},
                 {"inertia", mat3_to_json(model.base.inertia)},
                 {"geometry", geometry_to_json(model.base.geometry)}};
  nlohmann::json joints = nlohmann::json::array();
  for (const JointSpec& j : model.joints) {
    joints.push_back(
        {{"name", j.name},
         {"type", j.type == JointType::kSpherical ? "spherical" : "fixed"},
         {"geometry", geometry_to_json(j.geometry)},
         {"mass", j.mass},
         {"kp", j.kp},
         {"kd", j.kd},
         {"torque_limit", j.torque_limit},
         {"inertia", mat3_to_json(j.inertia)},
         {"parent", j.parent},
         {"local_offset", {j.local_offset.x(), j.local_offset.y(),
                           j.local_offset.z()}},
         {"scale_group", j.scale_group}});
  }
  out["joints"] = std::move(joints);
  write_file(path, out.dump(2) + "\n");
}

CharacterModel load_character(const std::string& path) {
  const nlohmann::json in = nlohmann::json::parse(read_file(path));
  CharacterModel model;
  model.base.name = in.at("base").at("name");
  model.base.mass = in.at("base").at("mass");
  model.base.inertia = mat3_from_json(in.at("base").at("inertia"));
  model.base.geometry = geometry_from_json(in.at("base").at("geometry"));
  model.total_mass = model.base.mass;
  int next_q = 6;
  for (const auto& jj : in.at("joints")) {
    JointSpec j;
    j.name = jj.at("name");
    j.type = jj.at("type") == "spherical" ? JointType::kSpherical
                                          : JointType::kFixed;
    j.geometry = geometry_from_json(jj.at("geometry"));
    j.mass = jj.at("mass");
    j.kp = jj.at("kp");
    j.kd = jj.at("kd");
    j.torque_limit = jj.at("torque_limit");
    j.inertia = mat3_from_json(jj.at("inertia"));
    j.parent = jj.at("parent");
    for (int i = 0; i < 3; ++i) j.local_offset[i] = jj.at("local_offset").at(i);
    j.scale_group = jj.at("scale_group");
    if (!(j.mass > 0)) throw std::runtime_error("joint mass must be > 0");
    const int idx = static_cast<int>(model.joints.size());
    if (j.parent >= idx) throw std::runtime_error("joints must be tree-ordered");
    model.total_mass += j.mass;
    if (j.type == JointType::kSpherical) {
      model.movable.push_back(idx);
      model.qpos.push_back(next_q);
      next_q += 3;
    } else {
      model.qpos.push_back(-1);
    }
    model.joints.push_back(std::move(j));
  }
  model.dof = next_q;
  return model;
}

std::array<Vec3, 4> foot_keypoints_local() {
  // Heel, toe, and the two metatarsal corners of the foot box, expressed in
  // the ankle link frame (box center (0,-0.04,-0.04), half extents
  // (0.05,0.09,0.03); the character faces -y).
  return {Vec3(0, 0.05, -0.07), Vec3(0, -0.13, -0.07),
          Vec3(0.05, -0.09, -0.07), Vec3(-0.05, -0.09, -0.07)};
}

std::array<int, 4> end_effector_joints(const CharacterModel& model) {
  return {model.joint_index("left_wrist"), model.joint_index("right_wrist"),
          model.joint_index("left_ankle"), model.joint_index("right_ankle")};
}

}  // namespace simcap
