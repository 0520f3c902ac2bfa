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

#include "simcap/dynamics.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "simcap/so3.h"

namespace simcap {
namespace {

// spatial vectors are [angular; linear] in body coordinates.

struct BodyKin {
  Mat3 E;  // parent-to-body coordinate rotation (local joint rotation^T)
  Vec3 r;  // joint origin in parent coordinates
  Mat3 R;  // world orientation
  Vec3 o;  // world origin
  Vec6 V = Vec6::Zero();
  Vec6 cbias = Vec6::Zero();  // velocity-product acceleration of the joint
};

Vec6 motion_to_child(const BodyKin& k, const Vec6& v) {
  Vec6 out;
  out.head<3>() = k.E * v.head<3>();
  out.tail<3>() = k.E * (v.tail<3>() - k.r.cross(v.head<3>()));
  return out;
}

Vec6 force_to_parent(const BodyKin& k, const Vec6& f) {
  Vec6 out;
  const Vec3 fp = k.E.transpose() * f.tail<3>();
  out.tail<3>() = fp;
  out.head<3>() = k.E.transpose() * f.head<3>() + k.r.cross(fp);
  return out;
}

Mat6 motion_matrix(const BodyKin& k) {
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = k.E;
  m.bottomRightCorner<3, 3>() = k.E;
  m.bottomLeftCorner<3, 3>() = -k.E * skew(k.r);
  return m;
}

Vec6 cross_motion(const Vec6& a, const Vec6& b) {
  Vec6 out;
  out.head<3>() = a.head<3>().cross(b.head<3>());
  out.tail<3>() = a.head<3>().cross(b.tail<3>()) + a.tail<3>().cross(b.head<3>());
  return out;
}

Vec6 cross_force(const Vec6& v, const Vec6& f) {
  Vec6 out;
  out.head<3>() = v.head<3>().cross(f.head<3>()) + v.tail<3>().cross(f.tail<3>());
  out.tail<3>() = v.head<3>().cross(f.tail<3>());
  return out;
}

Mat6 spatial_inertia(double mass, const Vec3& com, const Mat3& inertia_com) {
  Mat6 I = Mat6::Zero();
  const Mat3 S = skew(com);
  I.topLeftCorner<3, 3>() = inertia_com + mass * S * S.transpose();
  I.topRightCorner<3, 3>() = mass * S;
  I.bottomLeftCorner<3, 3>() = mass * S.transpose();
  I.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
  return I;
}

void add_candidates(const Geometry& g, const Vec3& shift,
                    std::vector<DynModel::Candidate>* out) {
  switch (g.type) {
    case GeomType::kSphere:
      out->push_back({shift + g.center, g.dims.x()});
      break;
    case GeomType::kCapsule: {
      const Vec3 axis = g.axis_x ? Vec3::UnitX() : Vec3::UnitZ();
      out->push_back({shift + g.center + g.dims.y() * axis, g.dims.x()});
      out->push_back({shift + g.center - g.dims.y() * axis, g.dims.x()});
      break;
    }
    case GeomType::kBox:
      for (int sx : {-1, 1})
        for (int sy : {-1, 1})
          for (int sz : {-1, 1})
            out->push_back({shift + g.center +
                                Vec3(sx * g.dims.x(), sy * g.dims.y(),
                                     sz * g.dims.z()),
                            0.0});
      break;
  }
}

DynModel build_dyn(const CharacterModel& model) {
  DynModel dyn;
  dyn.model = model;
  const int num_joints = static_cast<int>(model.joints.size());
  dyn.body_of_joint.assign(num_joints, -1);

  DynModel::Body base;
  base.parent = -1;
  base.joint = -1;
  base.qpos = -1;
  base.offset = Vec3::Zero();
  base.mass = model.base.mass;
  base.com = model.base.geometry.center;
  base.inertia_com = model.base.inertia;
  base.kd = 0;
  add_candidates(model.base.geometry, Vec3::Zero(), &base.candidates);
  dyn.bodies.push_back(base);

  for (int j : model.movable) {
    const JointSpec& spec = model.joints[j];
    DynModel::Body body;
    body.parent = spec.parent < 0 ? 0 : dyn.body_of_joint[spec.parent];
    if (body.parent < 0)
      throw std::invalid_argument("joint parented to an unmapped fixed joint");
    body.joint = j;
    body.qpos = model.qpos[j];
    body.offset = spec.local_offset;
    body.mass = spec.mass;
    body.com = spec.geometry.center;
    body.inertia_com = spec.inertia;
    body.kd = spec.kd;
    add_candidates(spec.geometry, Vec3::Zero(), &body.candidates);
    dyn.body_of_joint[j] = static_cast<int>(dyn.bodies.size());
    dyn.bodies.push_back(body);
  }

  // weld each fixed joint's link into its parent body
  for (int j = 0; j < num_joints; ++j) {
    const JointSpec& spec = model.joints[j];
    if (spec.type != JointType::kFixed) continue;
    const int pb = spec.parent < 0 ? 0 : dyn.body_of_joint[spec.parent];
    if (pb < 0) throw std::invalid_argument("fixed joint under a fixed joint");
    DynModel::Body& body = dyn.bodies[pb];
    const double m0 = body.mass, m1 = spec.mass;
    const Vec3 c1 = spec.local_offset + spec.geometry.center;
    const Vec3 merged =
        m0 + m1 > 0 ? Vec3((m0 * body.com + m1 * c1) / (m0 + m1)) : body.com;
    const Vec3 d0 = body.com - merged, d1 = c1 - merged;
    const Mat3 S0 = skew(d0), S1 = skew(d1);
    body.inertia_com = body.inertia_com + m0 * S0 * S0.transpose() +
                       spec.inertia + m1 * S1 * S1.transpose();
    body.mass = m0 + m1;
    body.com = merged;
    add_candidates(spec.geometry, spec.local_offset, &body.candidates);
    dyn.body_of_joint[j] = pb;
  }

  for (auto& body : dyn.bodies)
    body.inertia = spatial_inertia(body.mass, body.com, body.inertia_com);
  return dyn;
}

void compute_kin(const DynModel& dyn, const VecX& q, const VecX& qdot,
                 std::vector<BodyKin>* kin) {
  const int n = static_cast<int>(dyn.bodies.size());
  kin->resize(n);
  BodyKin& b0 = (*kin)[0];
  b0.R = so3_exp(q.segment<3>(3));
  b0.o = q.head<3>();
  b0.E = b0.R.transpose();
  b0.r = b0.o;
  const Vec3 wb = qdot.segment<3>(3);
  b0.V.head<3>() = wb;
  b0.V.tail<3>() = b0.R.transpose() * qdot.head<3>();
  b0.cbias.head<3>().setZero();
  b0.cbias.tail<3>() = -wb.cross(b0.V.tail<3>());
  for (int i = 1; i < n; ++i) {
    const DynModel::Body& body = dyn.bodies[i];
    BodyKin& k = (*kin)[i];
    const BodyKin& p = (*kin)[body.parent];
    const Mat3 r_loc = so3_exp(q.segment<3>(body.qpos));
    k.E = r_loc.transpose();
    k.r = body.offset;
    k.R = p.R * r_loc;
    k.o = p.o + p.R * body.offset;
    const Vec3 wj = qdot.segment<3>(body.qpos);
    k.V = motion_to_child(k, p.V);
    k.V.head<3>() += wj;
    Vec6 vj = Vec6::Zero();
    vj.head<3>() = wj;
    k.cbias = cross_motion(k.V, vj);
  }
}

// gravity plus user-supplied external forces as per-body spatial forces
// about each body origin, body coordinates.
std::vector<Vec6> body_forces(const DynModel& dyn,
                              const std::vector<BodyKin>& kin,
                              const std::vector<ExternalForce>& external,
                              double gravity) {
  const int n = static_cast<int>(dyn.bodies.size());
  std::vector<Vec6> f(n, Vec6::Zero());
  const Vec3 g_world(0, 0, -gravity);
  for (int i = 0; i < n; ++i) {
    const Vec3 fb = dyn.bodies[i].mass * (kin[i].R.transpose() * g_world);
    f[i].tail<3>() += fb;
    f[i].head<3>() += dyn.bodies[i].com.cross(fb);
  }
  for (const ExternalForce& e : external) {
    const int b = e.joint < 0 ? 0 : dyn.body_of_joint[e.joint];
    if (b < 0) throw std::invalid_argument("external force on unknown joint");
    const Vec3 fb = kin[b].R.transpose() * e.force_world;
    const Vec3 pb = kin[b].R.transpose() * (e.point_world - kin[b].o);
    f[b].tail<3>() += fb;
    f[b].head<3>() += pb.cross(fb);
  }
  return f;
}

// articulated-body recursion; damping_dt > 0 folds joint damping in
// implicitly: joint force tau - kd*qdot with dt*kd added to the joint-space
// inertia, which solves (M + dt*Kd) qddot = tau - Kd qdot - h exactly.
VecX aba_impl(const DynModel& dyn, const std::vector<BodyKin>& kin,
              const VecX& qdot, const VecX& torques,
              const std::vector<Vec6>& fext, double damping_dt) {
  const int n = static_cast<int>(dyn.bodies.size());
  std::vector<Mat6> IA(n);
  std::vector<Vec6> pA(n);
  std::vector<Eigen::Matrix<double, 6, 3>> U(n);
  std::vector<Mat3> Dinv(n);
  std::vector<Vec3> u(n);
  for (int i = 0; i < n; ++i) {
    IA[i] = dyn.bodies[i].inertia;
    pA[i] = cross_force(kin[i].V, IA[i] * kin[i].V) - fext[i];
  }
  for (int i = n - 1; i >= 1; --i) {
    const DynModel::Body& body = dyn.bodies[i];
    U[i] = IA[i].leftCols<3>();
    Mat3 D = U[i].topRows<3>();
    if (damping_dt > 0) D += damping_dt * body.kd * Mat3::Identity();
    Dinv[i] = D.inverse();
    Vec3 tau = torques.segment<3>(body.qpos);
    if (damping_dt > 0) tau -= body.kd * qdot.segment<3>(body.qpos);
    u[i] = tau - pA[i].head<3>();
    const Mat6 Ia = IA[i] - U[i] * Dinv[i] * U[i].transpose();
    const Vec6 pa = pA[i] + Ia * kin[i].cbias + U[i] * (Dinv[i] * u[i]);
    const Mat6 X6 = motion_matrix(kin[i]);
    IA[body.parent] += X6.transpose() * Ia * X6;
    pA[body.parent] += force_to_parent(kin[i], pa);
  }
  std::vector<Vec6> acc(n);
  acc[0] = -IA[0].ldlt().solve(pA[0]);
  VecX qdd = VecX::Zero(qdot.size());
  const Vec3 wb = kin[0].V.head<3>(), vb = kin[0].V.tail<3>();
  qdd.head<3>() = kin[0].R * (acc[0].tail<3>() + wb.cross(vb));
  qdd.segment<3>(3) = acc[0].head<3>();
  for (int i = 1; i < n; ++i) {
    const DynModel::Body& body = dyn.bodies[i];
    Vec6 a = motion_to_child(kin[i], acc[body.parent]) + kin[i].cbias;
    const Vec3 qddj = Dinv[i] * (u[i] - U[i].transpose() * a);
    a.head<3>() += qddj;
    acc[i] = a;
    qdd.segment<3>(body.qpos) = qddj;
  }
  return qdd;
}

// composite-rigid-body inertia matrix in the mixed velocity coordinates;
// damping_dt adds the implicit joint-damping diagonal.
MatX crba_impl(const DynModel& dyn, const std::vector<BodyKin>& kin,
               double damping_dt) {
  const int n = static_cast<int>(dyn.bodies.size());
  const int dof = dyn.model.dof;
  std::vector<Mat6> IC(n);
  for (int i = 0; i < n; ++i) IC[i] = dyn.bodies[i].inertia;
  for (int i = n - 1; i >= 1; --i) {
    const Mat6 X6 = motion_matrix(kin[i]);
    IC[dyn.bodies[i].parent] += X6.transpose() * IC[i] * X6;
  }
  MatX M = MatX::Zero(dof, dof);
  const Mat3 R0 = kin[0].R;
  Mat6 Sb = Mat6::Zero();
  Sb.topRightCorner<3, 3>() = Mat3::Identity();
  Sb.bottomLeftCorner<3, 3>() = R0.transpose();
  M.topLeftCorner<6, 6>() = Sb.transpose() * IC[0] * Sb;
  for (int i = 1; i < n; ++i) {
    const int qi = dyn.bodies[i].qpos;
    Eigen::Matrix<double, 6, 3> F = IC[i].leftCols<3>();
    M.block<3, 3>(qi, qi) = F.topRows<3>();
    if (damping_dt > 0)
      M.block<3, 3>(qi, qi) +=
          damping_dt * dyn.bodies[i].kd * Mat3::Identity();
    int j = i;
    while (true) {
      const int par = dyn.bodies[j].parent;
      Eigen::Matrix<double, 6, 3> Fp;
      for (int c = 0; c < 3; ++c) Fp.col(c) = force_to_parent(kin[j], F.col(c));
      if (par == 0) {
        M.block<3, 3>(0, qi) = R0 * Fp.bottomRows<3>();
        M.block<3, 3>(3, qi) = Fp.topRows<3>();
        M.block<3, 3>(qi, 0) = M.block<3, 3>(0, qi).transpose();
        M.block<3, 3>(qi, 3) = M.block<3, 3>(3, qi).transpose();
        break;
      }
      const int qj = dyn.bodies[par].qpos;
      M.block<3, 3>(qj, qi) = Fp.topRows<3>();
      M.block<3, 3>(qi, qj) = Fp.topRows<3>().transpose();
      F = Fp;
      j = par;
    }
  }
  return M;
}

// recursive Newton-Euler with zero generalized acceleration: the bias h with
// M qddot = tau - h; gravity and externals enter as applied forces.
VecX rnea_bias_impl(const DynModel& dyn, const std::vector<BodyKin>& kin,
                    const std::vector<Vec6>& fext) {
  const int n = static_cast<int>(dyn.bodies.size());
  std::vector<Vec6> A(n), F(n);
  A[0] = kin[0].cbias;
  F[0] = dyn.bodies[0].inertia * A[0] +
         cross_force(kin[0].V, dyn.bodies[0].inertia * kin[0].V) - fext[0];
  for (int i = 1; i < n; ++i) {
    A[i] = motion_to_child(kin[i], A[dyn.bodies[i].parent]) + kin[i].cbias;
    F[i] = dyn.bodies[i].inertia * A[i] +
           cross_force(kin[i].V, dyn.bodies[i].inertia * kin[i].V) - fext[i];
  }
  VecX h = VecX::Zero(dyn.model.dof);
  for (int i = n - 1; i >= 1; --i) {
    h.segment<3>(dyn.bodies[i].qpos) = F[i].head<3>();
    F[dyn.bodies[i].parent] += force_to_parent(kin[i], F[i]);
  }
  h.head<3>() = kin[0].R * F[0].tail<3>();
  h.segment<3>(3) = F[0].head<3>();
  return h;
}

struct ContactWork {
  int body = 0;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec3 t1 = Vec3::UnitX(), t2 = Vec3::UnitY();
  double penetration = 0;
  double knn = 1;
  Eigen::Matrix2d a_inv = Eigen::Matrix2d::Identity();
  Mat3 kr_inv = Mat3::Identity();
  double lambda_n = 0;
  Eigen::Vector2d lambda_t = Eigen::Vector2d::Zero();
  Vec3 lambda_r = Vec3::Zero();
};

void detect_contacts(const DynModel& dyn, const std::vector<BodyKin>& kin,
                     const SceneGeometry& scene,
                     std::vector<ContactWork>* contacts) {
  contacts->clear();
  constexpr double kDetectMargin = 1e-4;
  const int n = static_cast<int>(dyn.bodies.size());
  for (int i = 0; i < n; ++i) {
    for (const DynModel::Candidate& c : dyn.bodies[i].candidates) {
      const Vec3 p = kin[i].o + kin[i].R * c.local;
      const double phi = analytic_sdf(scene, p) - c.radius;
      if (phi >= kDetectMargin) continue;
      Vec3 grad = analytic_sdf_gradient(scene, p);
      const double gn = grad.norm();
      const Vec3 normal = gn > 1e-9 ? Vec3(grad / gn) : Vec3::UnitZ();
      ContactWork w;
      w.body = i;
      w.normal = normal;
      w.point = p - normal * c.radius;
      w.penetration = std::max(0.0, -phi);
      const Vec3 helper =
          std::abs(normal.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
      w.t1 = normal.cross(helper).normalized();
      w.t2 = normal.cross(w.t1);
      contacts->push_back(w);
    }
  }
}

// rows [0,3): world point velocity; rows [3,6): world angular velocity.
void contact_jacobian(const DynModel& dyn, const std::vector<BodyKin>& kin,
                      int body, const Vec3& point, MatX* J, int row) {
  J->block<3, 3>(row, 0) = Mat3::Identity();
  J->block<3, 3>(row, 3) = -skew(point - kin[0].o) * kin[0].R;
  J->block<3, 3>(row + 3, 3) = kin[0].R;
  for (int b = body; b >= 1; b = dyn.bodies[b].parent) {
    const int q = dyn.bodies[b].qpos;
    J->block<3, 3>(row, q) = -skew(point - kin[b].o) * kin[b].R;
    J->block<3, 3>(row + 3, q) = kin[b].R;
  }
}

// projected sequential impulses: normal (non-negative, Baumgarte bias),
// Coulomb friction disc, rolling-resistance angular impulse.
void solve_contacts(const DynModel& dyn, const std::vector<BodyKin>& kin,
                    const SimConfig& config, double dt_sub, double damping_dt,
                    std::vector<ContactWork>* contacts, VecX* u,
                    std::vector<ContactInfo>* infos) {
  const int nc = static_cast<int>(contacts->size());
  const int dof = dyn.model.dof;
  MatX J = MatX::Zero(6 * nc, dof);
  for (int c = 0; c < nc; ++c)
    contact_jacobian(dyn, kin, (*contacts)[c].body, (*contacts)[c].point, &J,
                     6 * c);
  const MatX M = crba_impl(dyn, kin, damping_dt);
  const MatX minv_jt = M.ldlt().solve(J.transpose());  // dof x 6nc
  const VecX vn_pre = J * *u;
  for (int c = 0; c < nc; ++c) {
    ContactWork& w = (*contacts)[c];
    const MatX kp = J.middleRows<3>(6 * c) * minv_jt.middleCols<3>(6 * c);
    const MatX kr =
        J.middleRows<3>(6 * c + 3) * minv_jt.middleCols<3>(6 * c + 3);
    w.knn = std::max(w.normal.dot(kp * w.normal), 1e-12);
    Eigen::Matrix2d A;
    A(0, 0) = w.t1.dot(kp * w.t1);
    A(0, 1) = w.t1.dot(kp * w.t2);
    A(1, 0) = w.t2.dot(kp * w.t1);
    A(1, 1) = w.t2.dot(kp * w.t2);
    A += 1e-12 * Eigen::Matrix2d::Identity();
    w.a_inv = A.inverse();
    w.kr_inv = (Mat3(kr) + 1e-12 * Mat3::Identity()).inverse();
  }
  for (int it = 0; it < config.solver_iterations; ++it) {
    for (int c = 0; c < nc; ++c) {
      ContactWork& w = (*contacts)[c];
      const auto jp = J.middleRows<3>(6 * c);
      const auto jr = J.middleRows<3>(6 * c + 3);
      const auto minv_p = minv_jt.middleCols<3>(6 * c);
      const auto minv_r = minv_jt.middleCols<3>(6 * c + 3);
      // normal
      const double vn = w.normal.dot(jp * *u);
      double target = (config.baumgarte / dt_sub) *
                      std::max(w.penetration - config.contact_slop, 0.0);
      const double vn0 = w.normal.dot(vn_pre.segment<3>(6 * c));
      if (config.restitution > 0 && vn0 < -0.2)
        target = std::max(target, -config.restitution * vn0);
      const double want = (target - vn) / w.knn;
      const double ln_new = std::max(0.0, w.lambda_n + want);
      const double dn = ln_new - w.lambda_n;
      w.lambda_n = ln_new;
      *u += minv_p * (w.normal * dn);
      // friction
      const Vec3 v = jp * *u;
      const Eigen::Vector2d rhs(-w.t1.dot(v), -w.t2.dot(v));
      Eigen::Vector2d lt = w.lambda_t + w.a_inv * rhs;
      const double lim = config.lateral_friction * w.lambda_n;
      if (lt.norm() > lim) lt *= lim / lt.norm();
      const Eigen::Vector2d dtang = lt - w.lambda_t;
      w.lambda_t = lt;
      *u += minv_p * (w.t1 * dtang.x() + w.t2 * dtang.y());
      // rolling resistance
      const Vec3 omega = jr * *u;
      Vec3 lr = w.lambda_r - w.kr_inv * omega;
      const double lim_r = config.rolling_friction * w.lambda_n;
      if (lr.norm() > lim_r) lr *= lim_r / lr.norm();
      const Vec3 dr = lr - w.lambda_r;
      w.lambda_r = lr;
      *u += minv_r * dr;
    }
  }
  infos->clear();
  for (const ContactWork& w : *contacts) {
    ContactInfo info;
    info.joint = dyn.bodies[w.body].joint;
    info.point = w.point;
    info.normal = w.normal;
    info.penetration = w.penetration;
    info.impulse_n = w.lambda_n;
    info.impulse_t = w.t1 * w.lambda_t.x() + w.t2 * w.lambda_t.y();
    infos->push_back(info);
  }
}

void check_divergence(SimWorld* world) {
  const VecX& qdot = world->state.qdot;
  const SimConfig& cfg = world->config;
  bool bad = !world->state.q.allFinite() || !qdot.allFinite();
  if (!bad) {
    if (qdot.head<3>().norm() > cfg.max_root_speed) bad = true;
    for (int i = 3; i < qdot.size() && !bad; i += 3)
      if (qdot.segment<3>(i).norm() > cfg.max_joint_speed) bad = true;
  }
  if (bad) world->diverged = true;
}

void do_substep(SimWorld* world, const VecX& torques, double damping_dt) {
  const DynModel& dyn = *world->dyn;
  const SimConfig& cfg = world->config;
  const double dt_sub = cfg.dt / cfg.substeps;
  std::vector<BodyKin> kin;
  compute_kin(dyn, world->state.q, world->state.qdot, &kin);
  const std::vector<Vec6> fext =
      body_forces(dyn, kin, world->external_forces, cfg.gravity);
  const VecX qdd =
      aba_impl(dyn, kin, world->state.qdot, torques, fext, damping_dt);
  VecX u = world->state.qdot + dt_sub * qdd;
  std::vector<ContactWork> contacts;
  if (u.allFinite()) detect_contacts(dyn, kin, *world->scene, &contacts);
  if (!contacts.empty()) {
    solve_contacts(dyn, kin, cfg, dt_sub, damping_dt, &contacts, &u,
                   &world->last_contacts);
  } else {
    world->last_contacts.clear();
  }
  world->state.qdot = u;
  if (u.allFinite())
    world->state.q = pose_integrate(world->state.q, u, dt_sub);
  world->time += dt_sub;
  check_divergence(world);
}

VecX clamped_position_torques(const CharacterModel& model, const VecX& q,
                              const VecX& target_movable) {
  if (target_movable.size() != 3 * model.movable_count())
    throw std::invalid_argument("target size does not match movable joints");
  VecX tau = VecX::Zero(model.dof);
  for (int mi = 0; mi < model.movable_count(); ++mi) {
    const int j = model.movable[mi];
    const int qi = model.qpos[j];
    const Mat3 rc = so3_exp(q.segment<3>(qi));
    const Mat3 rt = so3_exp(target_movable.segment<3>(3 * mi));
    Vec3 t = model.joints[j].kp * so3_log(rc.transpose() * rt);
    const double limit = model.joints[j].torque_limit;
    const double norm = t.norm();
    if (norm > limit && norm > 0) t *= limit / norm;
    tau.segment<3>(qi) = t;
  }
  return tau;
}

}  // namespace

std::shared_ptr<const DynModel> make_dyn_model(const CharacterModel& model) {
  return std::make_shared<const DynModel>(build_dyn(model));
}

SimWorld make_sim_world(const CharacterModel& model,
                        const SceneGeometry& scene, const SimConfig& config,
                        std::uint64_t seed) {
  if (config.dt <= 0 || config.substeps < 1 || config.solver_iterations < 1 ||
      config.restitution < 0 || config.restitution > 1)
    throw std::invalid_argument("invalid simulation configuration");
  SimWorld world;
  world.dyn = make_dyn_model(model);
  world.scene = std::make_shared<const SceneGeometry>(scene);
  world.config = config;
  world.state.q = VecX::Zero(model.dof);
  world.state.qdot = VecX::Zero(model.dof);
  world.rng_seed = seed;
  return world;
}

MatX mass_matrix(const CharacterModel& model, const VecX& q) {
  if (q.size() != model.dof)
    throw std::invalid_argument("pose size does not match dof");
  const DynModel dyn = build_dyn(model);
  std::vector<BodyKin> kin;
  compute_kin(dyn, q, VecX::Zero(model.dof), &kin);
  return crba_impl(dyn, kin, 0);
}

VecX bias_forces(const CharacterModel& model, const CharacterState& state) {
  const DynModel dyn = build_dyn(model);
  std::vector<BodyKin> kin;
  compute_kin(dyn, state.q, state.qdot, &kin);
  const std::vector<Vec6> fext = body_forces(dyn, kin, {}, 9.81);
  return rnea_bias_impl(dyn, kin, fext);
}

VecX forward_dynamics(const CharacterModel& model, const CharacterState& state,
                      const VecX& torques,
                      const std::vector<ExternalForce>& external,
                      double gravity) {
  if (torques.size() != model.dof)
    throw std::invalid_argument("torque size does not match dof");
  if (torques.head<6>().norm() != 0)
    throw std::invalid_argument("root coordinates are unactuated");
  const DynModel dyn = build_dyn(model);
  std::vector<BodyKin> kin;
  compute_kin(dyn, state.q, state.qdot, &kin);
  const std::vector<Vec6> fext = body_forces(dyn, kin, external, gravity);
  const VecX qdd = aba_impl(dyn, kin, state.qdot, torques, fext, 0);
  if (!qdd.allFinite())
    throw std::runtime_error("forward dynamics produced non-finite result");
  return qdd;
}

VecX pd_torques(const CharacterModel& model, const CharacterState& state,
                const VecX& target_movable) {
  if (target_movable.size() != 3 * model.movable_count())
    throw std::invalid_argument("target size does not match movable joints");
  VecX tau = VecX::Zero(model.dof);
  for (int mi = 0; mi < model.movable_count(); ++mi) {
    const int j = model.movable[mi];
    const int qi = model.qpos[j];
    const Mat3 rc = so3_exp(state.q.segment<3>(qi));
    const Mat3 rt = so3_exp(target_movable.segment<3>(3 * mi));
    Vec3 t = model.joints[j].kp * so3_log(rc.transpose() * rt) -
             model.joints[j].kd * state.qdot.segment<3>(qi);
    const double limit = model.joints[j].torque_limit;
    const double norm = t.norm();
    if (norm > limit && norm > 0) t *= limit / norm;
    tau.segment<3>(qi) = t;
  }
  return tau;
}

void step(SimWorld& world, const VecX& torques) {
  if (torques.size() != world.model().dof)
    throw std::invalid_argument("torque size does not match dof");
  if (torques.head<6>().norm() != 0)
    throw std::invalid_argument("root coordinates are unactuated");
  if (world.diverged) return;
  for (int s = 0; s < world.config.substeps; ++s) {
    do_substep(&world, torques, 0);
    if (world.diverged) break;
  }
}

void control_step(SimWorld& world, const VecX& target_movable) {
  if (world.diverged) return;
  const VecX tau =
      clamped_position_torques(world.model(), world.state.q, target_movable);
  const double dt_sub = world.config.dt / world.config.substeps;
  for (int s = 0; s < world.config.substeps; ++s) {
    do_substep(&world, tau, dt_sub);
    if (world.diverged) break;
  }
}

void rollout_target(SimWorld& world, const VecX& target_movable,
                    std::vector<CharacterState>* trace) {
  for (int k = 0; k < kControlStepsPerTarget; ++k) {
    control_step(world, target_movable);
    if (trace) trace->push_back(world.state);
    if (world.diverged) break;
  }
}

double kinetic_energy(const SimWorld& world) {
  const DynModel& dyn = *world.dyn;
  std::vector<BodyKin> kin;
  compute_kin(dyn, world.state.q, world.state.qdot, &kin);
  double e = 0;
  for (size_t i = 0; i < dyn.bodies.size(); ++i)
    e += 0.5 * kin[i].V.dot(dyn.bodies[i].inertia * kin[i].V);
  return e;
}

double potential_energy(const SimWorld& world) {
  const DynModel& dyn = *world.dyn;
  std::vector<BodyKin> kin;
  compute_kin(dyn, world.state.q, world.state.qdot, &kin);
  double e = 0;
  for (size_t i = 0; i < dyn.bodies.size(); ++i) {
    const Vec3 com_world = kin[i].o + kin[i].R * dyn.bodies[i].com;
    e += dyn.bodies[i].mass * world.config.gravity * com_world.z();
  }
  return e;
}

void momentum(const SimWorld& world, Vec3* linear, Vec3* angular) {
  const DynModel& dyn = *world.dyn;
  std::vector<BodyKin> kin;
  compute_kin(dyn, world.state.q, world.state.qdot, &kin);
  Vec3 lin = Vec3::Zero(), ang = Vec3::Zero();
  for (size_t i = 0; i < dyn.bodies.size(); ++i) {
    const Vec6 h = dyn.bodies[i].inertia * kin[i].V;
    const Vec3 lin_w = kin[i].R * h.tail<3>();
    lin += lin_w;
    ang += kin[i].R * h.head<3>() + kin[i].o.cross(lin_w);
  }
  if (linear) *linear = lin;
  if (angular) *angular = ang;
}

}  // namespace simcap
