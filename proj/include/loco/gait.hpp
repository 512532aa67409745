// Copyright 2026 The loco Authors
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

#pragma once

#include <vector>

#include "loco/common.hpp"

namespace loco::gait {

/// Commanded contact schedule: per-foot phase = frac(t/period + offset),
/// stance while phase < duty_factor.
struct GaitSchedule {
  double period = 0.4;        // s
  double duty_factor = 0.5;
  std::vector<double> phase_offsets;  // per foot, in [0,1)

  /// Hexapod tripod for legs ordered (LF, LM, LH, RF, RM, RH):
  /// groups {LF, LH, RM} and {LM, RF, RH} in anti-phase.
  static GaitSchedule tripod() {
    GaitSchedule g;
    g.phase_offsets = {0.0, 0.5, 0.0, 0.5, 0.0, 0.5};
    return g;
  }

  /// Quadruped trot for legs ordered (LF, LH, RF, RH): diagonal pairs.
  static GaitSchedule trot() {
    GaitSchedule g;
    g.phase_offsets = {0.0, 0.5, 0.5, 0.0};
    return g;
  }

  double stance_duration() const { return duty_factor * period; }
};

inline constexpr double kTransitionWidth = 0.05;  // phase units

namespace detail {
inline double smoothstep01(double u) {
  u = clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}
/// signed circular distance from `e` to `phi`, in [-0.5, 0.5)
inline double circ_diff(double phi, double e) {
  double d = wrap_unit(phi - e);
  return d >= 0.5 ? d - 1.0 : d;
}
}  // namespace detail

/// C = 1 commanded stance, 0 commanded swing, smoothstep bands of width
/// kTransitionWidth around both phase edges. With duty 0.5, anti-phase feet
/// satisfy C_a + C_b = 1 everywhere.
inline double contact_schedule(const GaitSchedule& g, int foot_index, double t) {
  const double phi = wrap_unit(t / g.period + g.phase_offsets.at(size_t(foot_index)));
  const double half = kTransitionWidth / 2.0;
  const double d0 = detail::circ_diff(phi, 0.0);
  if (std::abs(d0) <= half)
    return detail::smoothstep01((d0 + half) / kTransitionWidth);
  const double d1 = detail::circ_diff(phi, g.duty_factor);
  if (std::abs(d1) <= half)
    return 1.0 - detail::smoothstep01((d1 + half) / kTransitionWidth);
  return phi < g.duty_factor ? 1.0 : 0.0;
}

}  // namespace loco::gait
