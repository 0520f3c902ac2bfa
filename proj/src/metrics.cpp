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

#include "simcap/metrics.h"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace simcap {

namespace {

constexpr double kMetersToMm = 1000.0;

void validate_pair(const JointFrames& pred, const JointFrames& gt) {
  if (pred.size() != gt.size()) {
    throw std::invalid_argument("joint trajectories differ in frame count");
  }
  if (pred.empty()) {
    throw std::invalid_argument("joint trajectories are empty");
  }
  const size_t joints = gt.front().size();
  if (joints == 0) {
    throw std::invalid_argument("joint trajectories have no joints");
  }
  for (size_t t = 0; t < pred.size(); ++t) {
    if (pred[t].size() != joints || gt[t].size() != joints) {
      throw std::invalid_argument("joint trajectories differ in joint count");
    }
  }
}

}  // namespace

JointFrames keypoint_frames(const CharacterModel& model,
                            const std::vector<VecX>& poses) {
  JointFrames out(poses.size());
  for (size_t t = 0; t < poses.size(); ++t) {
    out[t] = keypoints(forward_kinematics(model, poses[t]));
  }
  return out;
}

double mpjpe_mm(const JointFrames& pred, const JointFrames& gt) {
  validate_pair(pred, gt);
  double sum = 0;
  size_t count = 0;
  for (size_t t = 0; t < pred.size(); ++t) {
    const Vec3 pr = pred[t][0];
    const Vec3 gr = gt[t][0];
    for (size_t j = 0; j < pred[t].size(); ++j) {
      sum += ((pred[t][j] - pr) - (gt[t][j] - gr)).norm();
      ++count;
    }
  }
  return kMetersToMm * sum / static_cast<double>(count);
}

double pa_mpjpe_mm(const JointFrames& pred, const JointFrames& gt,
                   bool* alignment_failed) {
  validate_pair(pred, gt);
  if (alignment_failed != nullptr) *alignment_failed = false;
  double sum = 0;
  size_t count = 0;
  for (size_t t = 0; t < pred.size(); ++t) {
    const int joints = static_cast<int>(pred[t].size());
    Eigen::Matrix3Xd xp(3, joints);
    Eigen::Matrix3Xd xg(3, joints);
    for (int j = 0; j < joints; ++j) {
      xp.col(j) = pred[t][j];
      xg.col(j) = gt[t][j];
    }
    const Vec3 mp = xp.rowwise().mean();
    const Vec3 mg = xg.rowwise().mean();
    xp.colwise() -= mp;
    xg.colwise() -= mg;
    const double var_p = xp.squaredNorm() / joints;
    const Mat3 cov = xg * xp.transpose() / joints;
    Eigen::JacobiSVD<Mat3> svd(cov,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sv = svd.singularValues();
    // the similarity is underdetermined for coincident or collinear joints
    const bool degenerate =
        var_p <= 1e-18 || sv(0) <= 1e-18 || sv(1) <= 1e-12 * sv(0);
    double scale = 1.0;
    Mat3 rot = Mat3::Identity();
    if (degenerate) {
      if (alignment_failed != nullptr) *alignment_failed = true;
    } else {
      Vec3 d = Vec3::Ones();
      if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) {
        d(2) = -1.0;
      }
      rot = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
      scale = sv.dot(d) / var_p;
    }
    for (int j = 0; j < joints; ++j) {
      sum += (scale * (rot * xp.col(j)) - xg.col(j)).norm();
      ++count;
    }
  }
  return kMetersToMm * sum / static_cast<double>(count);
}

Smoothness smoothness_error_mm(const JointFrames& pred,
                               const JointFrames& gt) {
  validate_pair(pred, gt);
  if (pred.size() < 2) {
    throw std::invalid_argument("smoothness needs at least 2 frames");
  }
  std::vector<double> samples;
  samples.reserve((pred.size() - 1) * pred.front().size());
  for (size_t t = 0; t + 1 < pred.size(); ++t) {
    for (size_t j = 0; j < pred[t].size(); ++j) {
      const double sp = (pred[t + 1][j] - pred[t][j]).norm();
      const double sg = (gt[t + 1][j] - gt[t][j]).norm();
      samples.push_back(kMetersToMm * std::abs(sp - sg));
    }
  }
  Smoothness out;
  for (double s : samples) out.e_s += s;
  out.e_s /= static_cast<double>(samples.size());
  double var = 0;
  for (double s : samples) var += (s - out.e_s) * (s - out.e_s);
  out.sigma_s = std::sqrt(var / static_cast<double>(samples.size()));
  return out;
}

double foot_z_error_mm(const JointFrames& pred, const JointFrames& gt,
                       const std::vector<int>& foot_joints) {
  validate_pair(pred, gt);
  if (foot_joints.empty()) {
    throw std::invalid_argument("no foot joints given");
  }
  const int joints = static_cast<int>(gt.front().size());
  double sum = 0;
  size_t count = 0;
  for (size_t t = 0; t < pred.size(); ++t) {
    for (int j : foot_joints) {
      if (j < 0 || j >= joints) {
        throw std::invalid_argument("foot joint index out of range");
      }
      sum += std::abs(pred[t][j].z() - gt[t][j].z());
      ++count;
    }
  }
  return kMetersToMm * sum / static_cast<double>(count);
}

std::vector<int> foot_keypoint_indices(const CharacterModel& model) {
  // keypoint 0 is the root, so joint j maps to keypoint j + 1
  return {model.joint_index("left_ankle") + 1,
          model.joint_index("right_ankle") + 1};
}

MetricsReport compute_metrics(const JointFrames& pred, const JointFrames& gt,
                              const std::vector<int>& foot_joints) {
  MetricsReport rep;
  rep.mpjpe = mpjpe_mm(pred, gt);
  rep.pa_mpjpe = pa_mpjpe_mm(pred, gt);
  if (pred.size() >= 2) {
    const Smoothness s = smoothness_error_mm(pred, gt);
    rep.e_s = s.e_s;
    rep.sigma_s = s.sigma_s;
  }
  rep.e_fz = foot_z_error_mm(pred, gt, foot_joints);
  return rep;
}

WilsonInterval wilson_interval(int successes, int trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  if (successes < 0 || successes > trials) {
    throw std::invalid_argument("successes out of range");
  }
  const double n = trials;
  const double p = successes / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace simcap
