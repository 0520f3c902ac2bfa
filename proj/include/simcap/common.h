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

#ifndef SIMCAP_COMMON_H_
#define SIMCAP_COMMON_H_

#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace simcap {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Quat = Eigen::Quaterniond;

// Canonical dimensions of the character parameterization.
inline constexpr int kNumJoints = 19;       // joints hanging off the pelvis base
inline constexpr int kNumMovable = 17;      // spherical joints under PD control
inline constexpr int kNumFixed = 2;         // wrists
inline constexpr int kDof = 57;             // 6 base + 17 * 3
inline constexpr int kMovableDof = 51;      // 17 * 3
inline constexpr int kStateDim = 114;       // pose + velocity
inline constexpr int kNumKeypoints = 20;    // base origin + 19 joint origins

// Deterministic 64-bit mix used to derive independent per-work-item RNG
// streams from a master seed, so results do not depend on thread count.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  return splitmix64(splitmix64(master ^ splitmix64(a)) ^ splitmix64(b + 1));
}

// All stochastic code takes an explicit generator; nothing reads global state.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

}  // namespace simcap

#endif  // SIMCAP_COMMON_H_
