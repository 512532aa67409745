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

#include <atomic>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "loco/common.hpp"
#include "loco/model.hpp"
#include "loco/terrain.hpp"

namespace loco::dynamics {

struct SimConfig {
  double control_dt = 0.02;             // s, 50 Hz
  int physics_substeps = 4;
  double contact_stiffness = 5000.0;    // N/m, normal and tangential
  double contact_damping = 100.0;       // N s/m
  double gravity = 9.81;                // m/s^2
  double kp = 80.0;                     // joint PD gains
  double kd = 1.0;
  double joint_reflected_inertia = 0.05;  // kg m^2, massless-leg joint lag

  void validate() const {
    if (physics_substeps < 1) throw ConfigError("sim config: substeps must be >= 1");
    if (control_dt <= 0.0) throw ConfigError("sim config: control_dt must be positive");
  }
};

/// Uniform sampling ranges for the per-episode dynamics randomization.
struct RandomizationRanges {
  std::array<double, 2> link_mass_scale{0.8, 1.2};
  std::array<double, 2> payload_mass{0.0, 5.0};        // kg
  std::array<double, 2> payload_offset{-0.1, 0.1};     // m, per axis
  std::array<double, 2> ground_friction{0.05, 2.75};
  std::array<double, 2> motor_strength{0.8, 1.2};
  std::array<double, 2> kp_scale{0.8, 1.2};
  std::array<double, 2> kd_scale{0.8, 1.2};
  std::array<double, 2> joint_position_scale{0.5, 1.5};  // x nominal, at reset

  /// All ranges collapsed to their nominal value.
  static RandomizationRanges collapsed() {
    RandomizationRanges r;
    r.link_mass_scale = {1.0, 1.0};
    r.payload_mass = {0.0, 0.0};
    r.payload_offset = {0.0, 0.0};
    r.ground_friction = {1.0, 1.0};
    r.motor_strength = {1.0, 1.0};
    r.kp_scale = {1.0, 1.0};
    r.kd_scale = {1.0, 1.0};
    r.joint_position_scale = {1.0, 1.0};
    return r;
  }
};

struct DynamicsRandomization {
  double link_mass_scale = 1.0;
  double payload_mass = 0.0;            // kg
  Vec3 payload_offset = Vec3::Zero();   // m, base frame
  double ground_friction = 1.0;
  double motor_strength_scale = 1.0;
  double kp_scale = 1.0;
  double kd_scale = 1.0;
  VecX joint_position_scale;            // per joint, x nominal at reset

  static DynamicsRandomization identity(const RobotModel& model) {
    DynamicsRandomization r;
    r.joint_position_scale = VecX::Ones(model.action_dim());
    return r;
  }
};

inline DynamicsRandomization sample_randomization(const RobotModel& model, Rng& rng,
                                                  const RandomizationRanges& ranges = {}) {
  DynamicsRandomization r;
  r.link_mass_scale = rng.uniform(ranges.link_mass_scale[0], ranges.link_mass_scale[1]);
  r.payload_mass = rng.uniform(ranges.payload_mass[0], ranges.payload_mass[1]);
  for (int i = 0; i < 3; ++i)
    r.payload_offset[i] = rng.uniform(ranges.payload_offset[0], ranges.payload_offset[1]);
  r.ground_friction = rng.uniform(ranges.ground_friction[0], ranges.ground_friction[1]);
  r.motor_strength_scale = rng.uniform(ranges.motor_strength[0], ranges.motor_strength[1]);
  r.kp_scale = rng.uniform(ranges.kp_scale[0], ranges.kp_scale[1]);
  r.kd_scale = rng.uniform(ranges.kd_scale[0], ranges.kd_scale[1]);
  r.joint_position_scale.resize(model.action_dim());
  for (int j = 0; j < model.action_dim(); ++j)
    r.joint_position_scale[j] = rng.uniform(ranges.joint_position_scale[0],
                                            ranges.joint_position_scale[1]);
  return r;
}

struct RobotState {
  Vec3 base_position = Vec3::Zero();
  Quat base_orientation = Quat::Identity();   // body-to-world
  Vec3 base_linear_velocity = Vec3::Zero();   // world frame
  Vec3 base_angular_velocity = Vec3::Zero();  // world frame
  VecX joint_positions;
  VecX joint_velocities;
  VecX joint_accelerations;    // finite-differenced over the control step
  VecX joint_torques;
  std::vector<Vec3> foot_positions;        // world
  std::vector<Vec3> foot_velocities;       // world
  std::vector<Vec3> foot_contact_forces;   // world, (fx, fy, fn)
  std::vector<Vec3> foot_anchors;          // tangential stiction anchors, world
  std::vector<uint8_t> foot_in_contact;
  int collision_count = 0;                 // non-foot probes touching terrain
  bool base_collision = false;

  Vec3 linear_velocity_body() const {
    return base_orientation.conjugate() * base_linear_velocity;
  }
  Vec3 angular_velocity_body() const {
    return base_orientation.conjugate() * base_angular_velocity;
  }
  double yaw() const {
    const Mat3 R = base_orientation.toRotationMatrix();
    return std::atan2(R(1, 0), R(0, 0));
  }
  Vec2 roll_pitch() const {
    const Mat3 R = base_orientation.toRotationMatrix();
    const double roll = std::atan2(R(2, 1), R(2, 2));
    const double pitch = -std::asin(clamp(R(2, 0), -1.0, 1.0));
    return Vec2(roll, pitch);
  }
};

/// Fresh state with the given joint configuration; foot kinematics filled in.
inline RobotState make_state(const RobotModel& model, const Vec3& base_position,
                             const VecX& joint_positions) {
  RobotState s;
  const int n = model.action_dim();
  s.base_position = base_position;
  s.joint_positions = joint_positions;
  s.joint_velocities = VecX::Zero(n);
  s.joint_accelerations = VecX::Zero(n);
  s.joint_torques = VecX::Zero(n);
  s.foot_positions.resize(model.foot_count());
  s.foot_velocities.assign(model.foot_count(), Vec3::Zero());
  s.foot_contact_forces.assign(model.foot_count(), Vec3::Zero());
  s.foot_anchors.assign(model.foot_count(), Vec3::Zero());
  s.foot_in_contact.assign(model.foot_count(), 0);
  for (int leg = 0; leg < model.foot_count(); ++leg)
    s.foot_positions[leg] = base_position + foot_position_base(model, joint_positions, leg);
  return s;
}

/// Joint PD law with the target velocity fixed at zero.
inline VecX pd_torque(const VecX& q_target, const VecX& q, const VecX& qd,
                      double kp, double kd, double torque_limit) {
  return (kp * (q_target - q) - kd * qd).cwiseMin(torque_limit).cwiseMax(-torque_limit);
}

/// World gravity direction (0,0,-1) expressed in the body frame.
inline Vec3 projected_gravity(const Quat& base_orientation) {
  Quat q = base_orientation;
  const double n = q.norm();
  if (std::abs(n - 1.0) > 1e-9) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true))
      std::fprintf(stderr, "[loco] projected_gravity: non-unit quaternion (|q|=%.6g), normalizing\n", n);
    q.normalize();
  }
  return q.conjugate() * Vec3(0.0, 0.0, -1.0);
}

struct StepStatus {
  bool ok = true;
  std::string bad_field;
};

namespace detail {

inline Quat quat_from_rotvec(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-12) return Quat(1.0, 0.5 * w.x(), 0.5 * w.y(), 0.5 * w.z());
  return Quat(Eigen::AngleAxisd(angle, w / angle));
}

inline bool probe_collides(const terrain::TerrainMap& map, const Vec3& p) {
  return p.z() < terrain::height_at(map, p.x(), p.y());
}

}  // namespace detail

/// Advances one 0.02 s control step. Joint targets are the nominal pose plus
/// `action`; the floating base integrates contact and gravity wrenches over
/// `physics_substeps` inner steps. Pure in (state, inputs): identical inputs
/// give bit-identical outputs. On a non-finite result the state is left as
/// computed and the offending field is reported; callers end the episode.
inline StepStatus step(const RobotModel& model, const SimConfig& cfg,
                       const DynamicsRandomization& rnd, const terrain::TerrainMap& map,
                       const VecX& action, RobotState& state, Rng& /*rng*/) {
  const int n = model.action_dim();
  if (action.size() != n)
    throw ConfigError("step: action dimension mismatch (" + std::to_string(action.size()) +
                      " vs " + std::to_string(n) + ")");

  const double dt = cfg.control_dt / cfg.physics_substeps;
  const double kp = cfg.kp * rnd.kp_scale;
  const double kd = cfg.kd * rnd.kd_scale;
  const double mass = model.base_mass * rnd.link_mass_scale + rnd.payload_mass;
  const Vec3 payload_arm = rnd.payload_mass > 0.0 ? Vec3(rnd.payload_offset) : Vec3::Zero();
  Mat3 inertia = model.base_inertia * rnd.link_mass_scale;
  if (rnd.payload_mass > 0.0) {
    const Vec3& c = rnd.payload_offset;
    inertia += rnd.payload_mass * (c.squaredNorm() * Mat3::Identity() - c * c.transpose());
  }
  const Mat3 inertia_inv = inertia.inverse();
  const Vec3 gravity_w(0.0, 0.0, -cfg.gravity);

  VecX q_target = model.nominal_joint_positions + action;
  for (int j = 0; j < n; ++j)
    q_target[j] = clamp(q_target[j], model.joint_limits[j][0], model.joint_limits[j][1]);

  const VecX qd_before = state.joint_velocities;
  VecX q = state.joint_positions;
  VecX qd = state.joint_velocities;
  VecX tau(n);

  Vec3 p = state.base_position;
  Quat Q = state.base_orientation;
  Vec3 v = state.base_linear_velocity;
  Vec3 w_body = state.angular_velocity_body();

  for (int sub = 0; sub < cfg.physics_substeps; ++sub) {
    // joints: PD torque into a fixed reflected inertia
    tau = rnd.motor_strength_scale * (kp * (q_target - q) - kd * qd);
    tau = tau.cwiseMin(model.torque_limit).cwiseMax(-model.torque_limit);
    const VecX qdd = tau / cfg.joint_reflected_inertia;
    q += qd * dt + 0.5 * dt * dt * qdd;
    qd += qdd * dt;
    for (int j = 0; j < n; ++j) {
      if (q[j] < model.joint_limits[j][0]) {
        q[j] = model.joint_limits[j][0];
        qd[j] = std::max(qd[j], 0.0);
      } else if (q[j] > model.joint_limits[j][1]) {
        q[j] = model.joint_limits[j][1];
        qd[j] = std::min(qd[j], 0.0);
      }
    }

    // foot kinematics and penalty contact
    const Mat3 R = Q.toRotationMatrix();
    const Vec3 w_world = R * w_body;
    Vec3 force_sum = mass * gravity_w;
    Vec3 torque_sum = (R * payload_arm).cross(rnd.payload_mass * gravity_w);
    for (int leg = 0; leg < model.foot_count(); ++leg) {
      const Vec3 b = foot_position_base(model, q, leg);
      const Vec3 bdot = leg_jacobian(model, q, leg) * qd.segment(leg * 3, 3);
      const Vec3 foot_w = p + R * b;
      const Vec3 foot_v = v + w_world.cross(R * b) + R * bdot;
      state.foot_positions[leg] = foot_w;
      state.foot_velocities[leg] = foot_v;

      const double ground = terrain::height_at(map, foot_w.x(), foot_w.y());
      const double depth = ground - foot_w.z();
      if (depth <= 0.0) {
        state.foot_contact_forces[leg].setZero();
        state.foot_in_contact[leg] = 0;
        continue;
      }
      double fn = cfg.contact_stiffness * depth - cfg.contact_damping * foot_v.z();
      fn = std::max(fn, 0.0);
      if (!state.foot_in_contact[leg]) state.foot_anchors[leg] = foot_w;
      Vec2 ft = -cfg.contact_stiffness * (foot_w.head<2>() - state.foot_anchors[leg].head<2>()) -
                cfg.contact_damping * foot_v.head<2>();
      const double cap = rnd.ground_friction * fn;
      const double ft_norm = ft.norm();
      if (ft_norm > cap) {
        ft *= cap / ft_norm;
        // slide the anchor so the spring agrees with the capped force
        state.foot_anchors[leg].head<2>() =
            foot_w.head<2>() + (ft + cfg.contact_damping * foot_v.head<2>()) / cfg.contact_stiffness;
      }
      const Vec3 f(ft.x(), ft.y(), fn);
      state.foot_contact_forces[leg] = f;
      state.foot_in_contact[leg] = 1;
      force_sum += f;
      torque_sum += (foot_w - p).cross(f);
    }

    // base integration (world translation, body-frame rotation)
    const Vec3 lin_acc = force_sum / mass;
    p += v * dt + 0.5 * dt * dt * lin_acc;
    v += lin_acc * dt;
    const Vec3 torque_body = R.transpose() * torque_sum;
    const Vec3 ang_acc = inertia_inv * (torque_body - w_body.cross(inertia * w_body));
    const Vec3 rotvec = w_body * dt + 0.5 * dt * dt * ang_acc;
    w_body += ang_acc * dt;
    Q = (Q * detail::quat_from_rotvec(rotvec)).normalized();
  }

  // non-foot collision probes: base box corners plus knee and thigh midpoint
  const Mat3 R = Q.toRotationMatrix();
  int collisions = 0;
  bool base_hit = false;
  for (int cx = -1; cx <= 1; cx += 2)
    for (int cy = -1; cy <= 1; cy += 2)
      for (int cz = -1; cz <= 1; cz += 2) {
        const Vec3 corner = p + R * model.base_box_half.cwiseProduct(Vec3(cx, cy, cz));
        if (detail::probe_collides(map, corner)) {
          ++collisions;
          base_hit = true;
        }
      }
  for (int leg = 0; leg < model.foot_count(); ++leg) {
    const Vec3 knee_b = knee_position_base(model, q, leg);
    const Vec3 knee_w = p + R * knee_b;
    const Vec3 mid_w = p + R * (0.5 * (model.hip_offsets[leg] + knee_b));
    if (detail::probe_collides(map, knee_w)) ++collisions;
    if (detail::probe_collides(map, mid_w)) ++collisions;
  }

  state.base_position = p;
  state.base_orientation = Q;
  state.base_linear_velocity = v;
  state.base_angular_velocity = R * w_body;
  state.joint_positions = q;
  state.joint_velocities = qd;
  state.joint_accelerations = (qd - qd_before) / cfg.control_dt;
  state.joint_torques = tau;
  state.collision_count = collisions;
  state.base_collision = base_hit;

  if (!state.base_position.allFinite()) return {false, "base_position"};
  if (!state.base_orientation.coeffs().allFinite()) return {false, "base_orientation"};
  if (!state.base_linear_velocity.allFinite()) return {false, "base_linear_velocity"};
  if (!state.base_angular_velocity.allFinite()) return {false, "base_angular_velocity"};
  if (!state.joint_positions.allFinite()) return {false, "joint_positions"};
  if (!state.joint_velocities.allFinite()) return {false, "joint_velocities"};
  for (const auto& f : state.foot_contact_forces)
    if (!f.allFinite()) return {false, "foot_contact_forces"};
  return {};
}

/// One CSV row per control step:
/// time, base pos (3), base quat wxyz (4), lin vel (3), ang vel (3),
/// q (n), qd (n), tau (n), foot forces (3 per foot), contact flags (1 per foot).
class TrajectoryWriter {
 public:
  TrajectoryWriter(const std::string& path, const RobotModel& model) : out_(path) {
    if (!out_) throw IoError("cannot open trajectory csv: " + path);
    out_ << "time,px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz";
    for (int j = 0; j < model.action_dim(); ++j) out_ << ",q" << j;
    for (int j = 0; j < model.action_dim(); ++j) out_ << ",qd" << j;
    for (int j = 0; j < model.action_dim(); ++j) out_ << ",tau" << j;
    for (int f = 0; f < model.foot_count(); ++f)
      out_ << ",f" << f << "x,f" << f << "y,f" << f << "z";
    for (int f = 0; f < model.foot_count(); ++f) out_ << ",contact" << f;
    out_ << "\n";
    out_.precision(10);
  }

  void append(double time, const RobotState& s) {
    out_ << time;
    const Vec3& p = s.base_position;
    const Quat& q = s.base_orientation;
    out_ << "," << p.x() << "," << p.y() << "," << p.z();
    out_ << "," << q.w() << "," << q.x() << "," << q.y() << "," << q.z();
    for (int i = 0; i < 3; ++i) out_ << "," << s.base_linear_velocity[i];
    for (int i = 0; i < 3; ++i) out_ << "," << s.base_angular_velocity[i];
    for (int j = 0; j < s.joint_positions.size(); ++j) out_ << "," << s.joint_positions[j];
    for (int j = 0; j < s.joint_velocities.size(); ++j) out_ << "," << s.joint_velocities[j];
    for (int j = 0; j < s.joint_torques.size(); ++j) out_ << "," << s.joint_torques[j];
    for (const auto& f : s.foot_contact_forces)
      out_ << "," << f.x() << "," << f.y() << "," << f.z();
    for (uint8_t c : s.foot_in_contact) out_ << "," << int(c);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

}  // namespace loco::dynamics
