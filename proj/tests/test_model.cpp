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

#include <catch2/catch_amalgamated.hpp>
#include <filesystem>

#include "loco/model.hpp"

using namespace loco;

TEST_CASE("hexapod model satisfies its invariants") {
  RobotModel m = hexapod_model();
  REQUIRE(m.action_dim() == 18);
  REQUIRE(m.leg_count * m.joints_per_leg == 18);
  REQUIRE(m.foot_count() == 6);
  m.validate();
}

TEST_CASE("quadruped model satisfies its invariants") {
  RobotModel m = quadruped_model();
  REQUIRE(m.action_dim() == 12);
  m.validate();
}

TEST_CASE("nominal stance geometry is sane") {
  for (const RobotModel& m : {hexapod_model(), quadruped_model()}) {
    const double depth = nominal_stance_depth(m);
    REQUIRE(depth > 0.15);
    REQUIRE(depth < 0.40);
    // left/right mirror symmetry of foot positions
    for (int leg = 0; leg < m.leg_count / 2; ++leg) {
      const Vec3 l = foot_position_base(m, m.nominal_joint_positions, leg);
      const Vec3 r = foot_position_base(m, m.nominal_joint_positions, leg + m.leg_count / 2);
      REQUIRE(l.x() == Catch::Approx(r.x()).margin(1e-12));
      REQUIRE(l.y() == Catch::Approx(-r.y()).margin(1e-12));
      REQUIRE(l.z() == Catch::Approx(r.z()).margin(1e-12));
    }
  }
}

TEST_CASE("leg jacobian matches finite differences") {
  Rng rng(42);
  for (const RobotModel& m : {hexapod_model(), quadruped_model()}) {
    for (int trial = 0; trial < 20; ++trial) {
      VecX q(m.action_dim());
      for (int j = 0; j < m.action_dim(); ++j)
        q[j] = rng.uniform(m.joint_limits[j][0], m.joint_limits[j][1]);
      const int leg = rng.uniform_int(0, m.leg_count - 1);
      const Mat3 J = leg_jacobian(m, q, leg);
      const double h = 1e-6;
      for (int k = 0; k < 3; ++k) {
        VecX qp = q, qm = q;
        qp[leg * 3 + k] += h;
        qm[leg * 3 + k] -= h;
        const Vec3 fd =
            (foot_position_base(m, qp, leg) - foot_position_base(m, qm, leg)) / (2 * h);
        REQUIRE((J.col(k) - fd).norm() < 1e-6);
      }
    }
  }
}

TEST_CASE("model file round trip") {
  const RobotModel m = hexapod_model();
  const auto path = std::filesystem::temp_directory_path() / "loco_model_test.model";
  save_robot_model(m, path.string());
  const RobotModel loaded = load_robot_model(path.string());
  REQUIRE(loaded.name == m.name);
  REQUIRE(loaded.leg_count == m.leg_count);
  REQUIRE(loaded.leg_plane == m.leg_plane);
  REQUIRE((loaded.link_lengths - m.link_lengths).norm() < 1e-12);
  REQUIRE((loaded.nominal_joint_positions - m.nominal_joint_positions).norm() < 1e-12);
  REQUIRE(loaded.base_mass == Catch::Approx(m.base_mass));
  REQUIRE(loaded.torque_limit == Catch::Approx(m.torque_limit));
  for (int j = 0; j < m.action_dim(); ++j) {
    REQUIRE(loaded.joint_limits[j][0] == Catch::Approx(m.joint_limits[j][0]));
    REQUIRE(loaded.joint_limits[j][1] == Catch::Approx(m.joint_limits[j][1]));
  }
  for (int leg = 0; leg < m.leg_count; ++leg)
    REQUIRE((loaded.hip_offsets[leg] - m.hip_offsets[leg]).norm() < 1e-12);
  std::filesystem::remove(path);
}

TEST_CASE("model validation rejects bad configurations") {
  RobotModel m = hexapod_model();
  m.base_mass = 0.0;
  REQUIRE_THROWS_AS(m.validate(), ConfigError);
  m = hexapod_model();
  m.joint_limits[4] = {1.0, -1.0};
  REQUIRE_THROWS_AS(m.validate(), ConfigError);
  m = hexapod_model();
  m.base_inertia = -Mat3::Identity();
  REQUIRE_THROWS_AS(m.validate(), ConfigError);
}
