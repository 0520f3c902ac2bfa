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

#include "simcap/kinopt.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "simcap/parallel.h"

namespace simcap {

void VarGrad::resize_like(const OptVariables& vars) {
  q.resize(vars.q.size());
  for (size_t t = 0; t < q.size(); ++t) q[t] = VecX::Zero(vars.q[t].size());
  scale = VecX::Zero(SkeletonScale::kGroups);
}

void VarGrad::set_zero() {
  for (auto& g : q) g.setZero();
  scale.setZero();
}

std::array<StageWeights, 4> default_stage_weights() {
  return {StageWeights{1.0, 4040.0, 100.0, 1000.0, 0.0},
          StageWeights{1.0, 404.0, 50.0, 500.0, 0.0},
          StageWeights{1.0, 57.4, 10.0, 250.0, 0.0},
          StageWeights{1.0, 1.78, 5.0, 200.0, 4500.0}};
}

std::array<int, 2> ankle_joints(const CharacterModel& model) {
  return {model.joint_index("left_ankle"), model.joint_index("right_ankle")};
}

namespace {

void validate_vars(const OptVariables& vars) {
  for (const VecX& q : vars.q)
    if (q.size() != kDof)
      throw std::invalid_argument("pose vector size does not match the model");
}

void axpy(double a, const VarGrad& from, VarGrad* to) {
  for (size_t t = 0; t < to->q.size(); ++t) to->q[t] += a * from.q[t];
  to->scale += a * from.scale;
}

}  // namespace

double loss_data(const OptVariables& vars, const ObservationSequence& obs,
                 VarGrad* grad, int threads) {
  validate_vars(vars);
  if (obs.frame_count() != vars.frame_count())
    throw std::invalid_argument("observation/variable frame count mismatch");
  if (obs.keypoint_count() != kNumKeypoints)
    throw std::invalid_argument("observation keypoint count mismatch");
  const CharacterModel model = build_character(vars.scale);
  const CharacterModel unit = build_character();
  const int frames = vars.frame_count();
  std::vector<double> frame_loss(frames, 0.0);
  std::vector<VecX> frame_gq(grad ? frames : 0);
  std::vector<VecX> frame_gs(grad ? frames : 0);
  parallel_for(frames, threads, [&](int t) {
    const FkResult fk = forward_kinematics(model, vars.q[t]);
    const std::vector<Vec3> pts = keypoints(fk);
    const FrameObservation& f = obs.frames[t];
    std::vector<Vec3> point_grads(pts.size(), Vec3::Zero());
    double loss = 0;
    for (size_t k = 0; k < pts.size(); ++k) {
      const double conf = f.confidence[k];
      if (conf == 0) continue;
      bool behind = false;
      const Vec2 pix = reproject(obs.camera, pts[k], &behind);
      if (behind) continue;
      const Vec2 e = pix - f.pixels[k];
      loss += conf * e.squaredNorm();
      if (grad) {
        const Eigen::Matrix<double, 2, 3> J =
            reproject_jacobian(obs.camera, pts[k]);
        point_grads[k] = 2.0 * conf * (J.transpose() * e);
      }
    }
    frame_loss[t] = loss;
    if (grad) {
      frame_gq[t] = fk_backward(model, vars.q[t], fk, point_grads);
      frame_gs[t] = fk_scale_backward(unit, fk, point_grads);
    }
  });
  double total = 0;
  for (int t = 0; t < frames; ++t) {
    total += frame_loss[t];
    if (grad) {
      grad->q[t] += frame_gq[t];
      grad->scale += frame_gs[t];
    }
  }
  return total;
}

PriorTerms prior_terms(const OptVariables& vars) {
  validate_vars(vars);
  PriorTerms terms;
  for (const VecX& q : vars.q) terms.latent += q.tail(kMovableDof).squaredNorm();
  for (double m : vars.scale.multipliers) terms.shape += (m - 1) * (m - 1);
  const int frames = vars.frame_count();
  for (int t = 1; t + 1 < frames; ++t) {
    const VecX d = vars.q[t + 1].tail(kMovableDof) -
                   2.0 * vars.q[t].tail(kMovableDof) +
                   vars.q[t - 1].tail(kMovableDof);
    terms.kinetic += d.squaredNorm();
  }
  return terms;
}

double loss_prior(const OptVariables& vars) {
  const PriorTerms t = prior_terms(vars);
  return t.latent + t.shape + t.kinetic;
}

void prior_backward(const OptVariables& vars, double latent_weight,
                    double shape_weight, double kinetic_weight,
                    VarGrad* grad) {
  validate_vars(vars);
  const int frames = vars.frame_count();
  const int off = kDof - kMovableDof;
  for (int t = 0; t < frames; ++t)
    grad->q[t].tail(kMovableDof) +=
        2.0 * latent_weight * vars.q[t].tail(kMovableDof);
  for (int g = 0; g < SkeletonScale::kGroups; ++g)
    grad->scale[g] += 2.0 * shape_weight * (vars.scale.multipliers[g] - 1);
  for (int t = 1; t + 1 < frames; ++t) {
    const VecX d = vars.q[t + 1].tail(kMovableDof) -
                   2.0 * vars.q[t].tail(kMovableDof) +
                   vars.q[t - 1].tail(kMovableDof);
    grad->q[t + 1].segment(off, kMovableDof) += 2.0 * kinetic_weight * d;
    grad->q[t].segment(off, kMovableDof) -= 4.0 * kinetic_weight * d;
    grad->q[t - 1].segment(off, kMovableDof) += 2.0 * kinetic_weight * d;
  }
}

double loss_scene(const OptVariables& vars, const SdfGrid& grid,
                  double gm_scale, VarGrad* grad, int threads) {
  validate_vars(vars);
  const CharacterModel model = build_character(vars.scale);
  const CharacterModel unit = build_character();
  const std::array<int, 2> ankles = ankle_joints(model);
  const std::array<Vec3, 4> locals = foot_keypoints_local();
  const int frames = vars.frame_count();
  std::vector<double> frame_loss(frames, 0.0);
  std::vector<VecX> frame_gq(grad ? frames : 0);
  std::vector<VecX> frame_gs(grad ? frames : 0);
  parallel_for(frames, threads, [&](int t) {
    const FkResult fk = forward_kinematics(model, vars.q[t]);
    std::vector<Vec3> point_grads(model.joints.size() + 1, Vec3::Zero());
    VecX gq = VecX::Zero(kDof);
    double loss = 0;
    for (int ankle : ankles) {
      const Mat3& rot = fk.joint_rot[ankle];
      const Vec3& origin = fk.joint_pos[ankle];
      for (const Vec3& local : locals) {
        const Vec3 p = origin + rot * local;
        const SdfSample s = sample_sdf(grid, p);
        loss += geman_mcclure(s.value, gm_scale);
        if (grad) {
          const Vec3 dp =
              geman_mcclure_derivative(s.value, gm_scale) * s.gradient;
          gq += fk_point_backward(model, vars.q[t], fk, ankle, p, dp);
          point_grads[ankle + 1] += dp;
        }
      }
    }
    frame_loss[t] = loss;
    if (grad) {
      frame_gq[t] = gq;
      frame_gs[t] = fk_scale_backward(unit, fk, point_grads);
    }
  });
  double total = 0;
  for (int t = 0; t < frames; ++t) {
    total += frame_loss[t];
    if (grad) {
      grad->q[t] += frame_gq[t];
      grad->scale += frame_gs[t];
    }
  }
  return total;
}

namespace {

struct AdamState {
  VarGrad m;
  VarGrad v;
  int t = 0;
};

void adam_update(VecX* x, VecX* m, VecX* v, const VecX& g, double lr,
                 double c1, double c2) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  *m = kBeta1 * *m + (1 - kBeta1) * g;
  *v = kBeta2 * *v + (1 - kBeta2) * g.cwiseProduct(g);
  const VecX mhat = *m / c1;
  const VecX vhat = *v / c2;
  *x -= lr * (mhat.array() / (vhat.array().sqrt() + kEps)).matrix();
}

void adam_step(OptVariables* vars, const VarGrad& g, AdamState* st,
               double lr) {
  ++st->t;
  const double c1 = 1 - std::pow(0.9, st->t);
  const double c2 = 1 - std::pow(0.999, st->t);
  for (size_t t = 0; t < vars->q.size(); ++t)
    adam_update(&vars->q[t], &st->m.q[t], &st->v.q[t], g.q[t], lr, c1, c2);
  VecX s(SkeletonScale::kGroups);
  for (int i = 0; i < SkeletonScale::kGroups; ++i)
    s[i] = vars->scale.multipliers[i];
  adam_update(&s, &st->m.scale, &st->v.scale, g.scale, lr, c1, c2);
  // scale multipliers must stay positive for the model to be buildable
  for (int i = 0; i < SkeletonScale::kGroups; ++i)
    vars->scale.multipliers[i] = std::max(s[i], 0.1);
}

}  // namespace

ReferenceMotion optimize_reference(const ObservationSequence& obs,
                                   const SdfGrid& scene_grid,
                                   const OptVariables& init,
                                   const KinOptOptions& options,
                                   KinOptReport* report) {
  validate_vars(init);
  if (init.frame_count() == 0 || obs.frame_count() != init.frame_count())
    throw std::invalid_argument("init must cover every observation frame");
  KinOptReport local_report;
  KinOptReport* rep = report ? report : &local_report;
  OptVariables vars = init;
  VarGrad grad, term;
  grad.resize_like(vars);
  term.resize_like(vars);
  auto total_loss = [&](const OptVariables& v, const StageWeights& w,
                        VarGrad* g) {
    double loss = 0;
    if (w.data != 0) {
      if (g) term.set_zero();
      loss += w.data * loss_data(v, obs, g ? &term : nullptr, options.threads);
      if (g) axpy(w.data, term, g);
    }
    const PriorTerms pt = prior_terms(v);
    loss += w.latent * pt.latent + w.shape * pt.shape + w.kinetic * pt.kinetic;
    if (g) prior_backward(v, w.latent, w.shape, w.kinetic, g);
    if (w.interaction != 0) {
      if (g) term.set_zero();
      loss += w.interaction * loss_scene(v, scene_grid, options.gm_scale,
                                         g ? &term : nullptr, options.threads);
      if (g) axpy(w.interaction, term, g);
    }
    return loss;
  };
  double final_best = std::numeric_limits<double>::infinity();
  for (int stage = 0; stage < 4; ++stage) {
    const StageWeights& w = options.stages[stage];
    AdamState st;
    st.m.resize_like(vars);
    st.v.resize_like(vars);
    OptVariables best = vars;
    double best_loss = std::numeric_limits<double>::infinity();
    auto& curve = rep->best_loss_curve[stage];
    curve.clear();
    for (int iter = 0; iter < options.iterations_per_stage; ++iter) {
      grad.set_zero();
      const double loss = total_loss(vars, w, &grad);
      if (loss < best_loss) {
        best_loss = loss;
        best = vars;
      }
      curve.push_back(best_loss);
      adam_step(&vars, grad, &st, options.learning_rate);
    }
    const double last = total_loss(vars, w, nullptr);
    if (last < best_loss) {
      best_loss = last;
      best = vars;
    }
    vars = best;
    final_best = best_loss;
  }
  rep->best = vars;
  rep->final_loss = final_best;
  // non-convergence flag: loss not finite, or the final stage was still
  // descending materially when the iteration budget ran out
  bool still_descending = false;
  const auto& last_curve = rep->best_loss_curve[3];
  if (last_curve.size() >= 20) {
    const double before = last_curve[last_curve.size() - 11];
    const double after = last_curve.back();
    still_descending = (before - after) > 1e-3 * (std::abs(after) + 1e-12);
  }
  rep->warning = !std::isfinite(final_best) || still_descending;
  ReferenceMotion motion;
  motion.frame_rate = obs.frame_rate;
  motion.poses = vars.q;
  motion.timestamps.resize(vars.q.size());
  for (size_t t = 0; t < vars.q.size(); ++t)
    motion.timestamps[t] = static_cast<double>(t) / obs.frame_rate;
  motion.compute_velocities();
  return motion;
}

namespace {

// conservative visibility: march the camera-to-point segment and call the
// point occluded when any interior sample is clearly inside scene geometry.
bool segment_occluded(const SceneGeometry& scene, const Vec3& cam_pos,
                      const Vec3& point) {
  constexpr double kNearStandoff = 0.1;   // skip near the camera, meters
  constexpr double kFarStandoff = 0.05;   // skip near the point, meters
  constexpr double kInsideMargin = 1e-3;  // meters
  constexpr int kSamples = 64;
  const Vec3 d = point - cam_pos;
  const double len = d.norm();
  if (len <= kNearStandoff + kFarStandoff) return false;
  for (int i = 0; i <= kSamples; ++i) {
    const double dist =
        kNearStandoff +
        (len - kNearStandoff - kFarStandoff) * i / double(kSamples);
    if (analytic_sdf(scene, cam_pos + d * (dist / len)) < -kInsideMargin)
      return true;
  }
  return false;
}

}  // namespace

ObservationSequence synthesize_observations(const CharacterModel& model,
                                            const ReferenceMotion& motion,
                                            const Camera& camera,
                                            const SceneGeometry& scene,
                                            double noise_px,
                                            std::uint64_t seed) {
  ObservationSequence obs;
  obs.camera = camera;
  obs.frame_rate = motion.frame_rate;
  Rng rng = make_rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const Vec3 cam_pos = camera.position();
  for (const VecX& q : motion.poses) {
    const FkResult fk = forward_kinematics(model, q);
    const std::vector<Vec3> pts = keypoints(fk);
    FrameObservation frame;
    frame.pixels.resize(pts.size(), Vec2::Zero());
    frame.confidence.resize(pts.size(), 0.0);
    for (size_t k = 0; k < pts.size(); ++k) {
      bool behind = false;
      Vec2 pix = reproject(camera, pts[k], &behind);
      const bool visible =
          !behind && !segment_occluded(scene, cam_pos, pts[k]);
      if (visible && noise_px > 0)
        pix += noise_px * Vec2(noise(rng), noise(rng));
      frame.pixels[k] = pix;
      frame.confidence[k] = visible ? 1.0 : 0.0;
    }
    obs.frames.push_back(std::move(frame));
  }
  return obs;
}

}  // namespace simcap
