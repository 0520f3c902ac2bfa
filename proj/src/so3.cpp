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

#include "simcap/so3.h"

#include <cmath>

namespace simcap {

Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return m;
}

Mat3 so3_exp(const Vec3& w) {
  const double t2 = w.squaredNorm();
  const Mat3 W = skew(w);
  if (t2 < 1e-16) {
    // second-order Taylor expansion, accurate to ~1e-24 here
    return Mat3::Identity() + W + 0.5 * W * W;
  }
  const double t = std::sqrt(t2);
  return Mat3::Identity() + (std::sin(t) / t) * W +
         ((1.0 - std::cos(t)) / t2) * W * W;
}

Vec3 so3_log(const Mat3& R) {
  const double tr = R.trace();
  const double c = std::max(-1.0, std::min(1.0, 0.5 * (tr - 1.0)));
  const double t = std::acos(c);
  Vec3 axis(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (t < 1e-8) {
    return 0.5 * axis;  // small-angle: log(R) ~ (R - R^T)/2
  }
  if (t > M_PI - 1e-6) {
    // near pi the off-diagonal antisymmetric part vanishes; recover the axis
    // from the symmetric part R = I + (1 - cos t) * (aa^T - I) * ... instead.
    Mat3 S = 0.5 * (R + Mat3::Identity());
    int k = 0;
    S.diagonal().maxCoeff(&k);
    Vec3 a = S.col(k) / std::sqrt(std::max(S(k, k), 1e-12));
    a.normalize();
    // fix the sign using the antisymmetric part when it is not exactly zero
    if (axis.dot(a) < 0) a = -a;
    return t * a;
  }
  return (t / (2.0 * std::sin(t))) * axis;
}

Mat3 so3_left_jacobian(const Vec3& w) {
  const double t2 = w.squaredNorm();
  const Mat3 W = skew(w);
  if (t2 < 1e-16) {
    return Mat3::Identity() + 0.5 * W + (1.0 / 6.0) * W * W;
  }
  const double t = std::sqrt(t2);
  return Mat3::Identity() + ((1.0 - std::cos(t)) / t2) * W +
         ((t - std::sin(t)) / (t2 * t)) * W * W;
}

double so3_geodesic(const Mat3& a, const Mat3& b) {
  return so3_log(a.transpose() * b).norm();
}

}  // namespace simcap
