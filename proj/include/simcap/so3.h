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

#ifndef SIMCAP_SO3_H_
#define SIMCAP_SO3_H_

#include "simcap/common.h"

namespace simcap {

// Exponential map: axis-angle vector to rotation matrix.
Mat3 so3_exp(const Vec3& w);

// Logarithm map: rotation matrix to axis-angle vector, |result| <= pi.
Vec3 so3_log(const Mat3& R);

// Skew-symmetric cross-product matrix.
Mat3 skew(const Vec3& w);

// Left Jacobian of the exponential map: d/dt exp(w + t*dw)|_0 = skew(Jl(w)*dw) * exp(w).
Mat3 so3_left_jacobian(const Vec3& w);

// Geodesic angle between two rotations, in [0, pi].
double so3_geodesic(const Mat3& a, const Mat3& b);

}  // namespace simcap

#endif  // SIMCAP_SO3_H_
