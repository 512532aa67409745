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

#include <array>
#include <optional>
#include <vector>

#include "loco/common.hpp"
#include "loco/dynamics.hpp"
#include "loco/gait.hpp"
#include "loco/model.hpp"

namespace loco::rewards {

struct Command {
  double vx = 0.0;  // m/s, body frame
  double vy = 0.0;  // m/s
  double wz = 0.0;  // rad/s
};

enum class Term : int {
  LinVelTracking = 0,
  AngVelTracking,
  LinVelPenalty,
  AngVelPenalty,
  BodyHeightPenalty,
  JointTorque,
  JointAccel,
  ActionRate,
  Collision,
  TorqueLimit,
  JointVelLimit,
  ContactForcePenalty,
  SwingPhaseForce,
  StancePhaseVelocity,
  RaibertFootswing,
  FootswingHeight,
  StyleScore,
};
inline constexpr int kTermCount = 17;

inline const char* term_name(Term t) {
  static const char* names[kTermCount] = {
      "lin_vel_tracking", "ang_vel_tracking",
      "lin_vel_penalty",  "ang_vel_penalty",  "body_height_penalty",
      "joint_torque",     "joint_accel",      "action_rate",
      "collision",        "torque_limit",     "joint_vel_limit", "contact_force_penalty",
      "swing_phase_force", "stance_phase_velocity", "raibert_footswing", "footswing_height",
      "disc_score_style"};
  return names[int(t)];
}

enum class Stage { I, II };
enum class RewardMode { BR, BR_GR, BR_ER };

inline const char* reward_mode_name(RewardMode m) {
  switch (m) {
    case RewardMode::BR: return "BR";
    case RewardMode::BR_GR: return "BR+GR";
    case RewardMode::BR_ER: return "BR+ER";
  }
  return "?";
}

struct RewardConfig {
  double dt = 0.02;
  double tracking_bandwidth = 0.15;
  double sigma_cf = 100.0;              // N^2, swing force bandwidth
  double sigma_cv = 0.25;               // (m/s)^2, stance velocity bandwidth
  double desired_body_height = 0.25;    // m
  double desired_swing_apex = 0.09;     // m
  double desired_stance_width = 0.15;   // m, lateral foot offset from the hip
  std::array<double, kTermCount> scales{};  // table scale column, applied x dt
  bool paper_repro = true;

  double scaled(Term t, double raw) const { return raw * scales[int(t)] * dt; }

  /// Scales exactly as the reward table's scale column; desired heights per robot.
  static RewardConfig paper(const RobotModel& model) {
    RewardConfig c;
    c.scales[int(Term::LinVelTracking)] = 1.0;
    c.scales[int(Term::AngVelTracking)] = 0.8;
    c.scales[int(Term::LinVelPenalty)] = 2.0;
    c.scales[int(Term::AngVelPenalty)] = 0.05;
    c.scales[int(Term::BodyHeightPenalty)] = 0.2;
    c.scales[int(Term::JointTorque)] = 1e-5;
    c.scales[int(Term::JointAccel)] = 2.5e-7;
    c.scales[int(Term::ActionRate)] = 0.01;
    c.scales[int(Term::Collision)] = 0.1;
    c.scales[int(Term::TorqueLimit)] = 0.01;
    c.scales[int(Term::JointVelLimit)] = 0.1;
    c.scales[int(Term::ContactForcePenalty)] = 0.02;
    c.scales[int(Term::SwingPhaseForce)] = 4.0;
    c.scales[int(Term::StancePhaseVelocity)] = 4.0;
    c.scales[int(Term::RaibertFootswing)] = 10.0;
    c.scales[int(Term::FootswingHeight)] = 2.0;
    c.scales[int(Term::StyleScore)] = 1.0;
    c.desired_body_height = model.leg_count == 6 ? 0.25 : 0.30;
    return c;
  }
};

/// Per-step reward values, one slot per table row, raw and scaled, plus the
/// stage subtotals and grand total.
struct RewardBreakdown {
  std::array<double, kTermCount> raw{};
  std::array<double, kTermCount> scaled{};
  double task_subtotal = 0.0;            // r^g, scaled
  double regularization_subtotal = 0.0;  // r^l, scaled
  double gait_subtotal = 0.0;            // r^gait, scaled
  double style_scaled = 0.0;             // r^e, scaled
  double total = 0.0;                    // r_t
};

/// Velocity tracking pair. The table prints exp(+||err||/0.15); tracking is
/// implemented as exp(-||err||^2 / 0.15) so the maximum sits at zero error.
inline std::pair<double, double> task_rewards(const dynamics::RobotState& state,
                                              const Command& cmd, const RewardConfig& cfg) {
  const Vec3 v_body = state.linear_velocity_body();
  const Vec3 w_body = state.angular_velocity_body();
  const double lin_err2 = square(cmd.vx - v_body.x()) + square(cmd.vy - v_body.y());
  const double ang_err2 = square(cmd.wz - w_body.z());
  return {std::exp(-lin_err2 / cfg.tracking_bandwidth),
          std::exp(-ang_err2 / cfg.tracking_bandwidth)};
}

/// Stability, smoothness, and safety rows. `ground_height` is the terrain
/// height under the base; body height is measured relative to it.
inline void regularization_rewards(const dynamics::RobotState& state, const VecX& prev_action,
                                   const VecX& action, const RobotModel& model,
                                   const RewardConfig& cfg, double ground_height,
                                   RewardBreakdown& out) {
  const Vec3 v_body = state.linear_velocity_body();
  const Vec3 w_body = state.angular_velocity_body();
  out.raw[int(Term::LinVelPenalty)] = -square(v_body.z());
  out.raw[int(Term::AngVelPenalty)] = -std::sqrt(square(w_body.x()) + square(w_body.y()));
  out.raw[int(Term::BodyHeightPenalty)] =
      -std::abs(state.base_position.z() - ground_height - cfg.desired_body_height);
  out.raw[int(Term::JointTorque)] = -state.joint_torques.squaredNorm();
  out.raw[int(Term::JointAccel)] = -state.joint_accelerations.squaredNorm();
  out.raw[int(Term::ActionRate)] = -(prev_action - action).squaredNorm();
  out.raw[int(Term::Collision)] = -double(state.collision_count);
  out.raw[int(Term::TorqueLimit)] =
      -(state.joint_torques.cwiseAbs().array() - model.torque_limit).max(0.0).matrix().norm();
  out.raw[int(Term::JointVelLimit)] =
      -(state.joint_velocities.cwiseAbs().array() - model.joint_velocity_limit)
           .max(0.0).matrix().norm();
  double force_excess2 = 0.0;
  for (const auto& f : state.foot_contact_forces)
    force_excess2 += square(std::max(f.norm() - model.foot_force_limit, 0.0));
  out.raw[int(Term::ContactForcePenalty)] = -std::sqrt(force_excess2);
}

/// Raibert touchdown target for one foot, in the yaw-aligned base frame:
/// hip projection, pushed to the baseline stance width, plus half a stance
/// period of commanded hip velocity (including the yaw-rate cross term).
inline Vec2 raibert_target(const RobotModel& model, const gait::GaitSchedule& schedule,
                           const Command& cmd, const RewardConfig& cfg, int foot) {
  const Vec3& hip = model.hip_offsets[foot];
  Vec2 target(hip.x(), hip.y() + model.side_sign[foot] * cfg.desired_stance_width);
  const Vec2 hip_vel(cmd.vx - cmd.wz * hip.y(), cmd.vy + cmd.wz * hip.x());
  target += 0.5 * schedule.stance_duration() * hip_vel;
  return target;
}

/// The four Stage-I gait terms. `foot_ground_heights` holds the terrain
/// height under each foot; `t` is the episode clock driving the schedule.
inline void gait_rewards(const dynamics::RobotState& state, const RobotModel& model,
                         const gait::GaitSchedule& schedule, double t, const Command& cmd,
                         const RewardConfig& cfg, const std::vector<double>& foot_ground_heights,
                         RewardBreakdown& out) {
  double swing = 0.0, stance = 0.0, raibert = 0.0, footswing = 0.0;
  const double yaw = state.yaw();
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  for (int foot = 0; foot < model.foot_count(); ++foot) {
    const double C = gait::contact_schedule(schedule, foot, t);
    const Vec3& f = state.foot_contact_forces[foot];
    swing += (1.0 - C) * std::exp(-f.squaredNorm() / cfg.sigma_cf);
    const Vec3& v = state.foot_velocities[foot];
    stance += C * std::exp(-(square(v.x()) + square(v.y())) / cfg.sigma_cv);

    const Vec3 rel = state.foot_positions[foot] - state.base_position;
    const Vec2 foot_xy(cy * rel.x() + sy * rel.y(), -sy * rel.x() + cy * rel.y());
    raibert -= (foot_xy - raibert_target(model, schedule, cmd, cfg, foot)).squaredNorm();

    const double foot_height = state.foot_positions[foot].z() - foot_ground_heights[foot];
    footswing -= square(foot_height - cfg.desired_swing_apex) * (1.0 - C);
  }
  out.raw[int(Term::SwingPhaseForce)] = swing;
  out.raw[int(Term::StancePhaseVelocity)] = stance;
  out.raw[int(Term::RaibertFootswing)] = raibert;
  out.raw[int(Term::FootswingHeight)] = footswing;
}

/// Applies table scales and assembles the stage total:
/// Stage I: r = r^g + r^l + r^gait. Stage II: r = r^g (+ r^e) (+ r^gait) + r^l
/// depending on the ablation arm. A style score in Stage I is rejected; the
/// BR+ER arm requires one.
inline void assemble_total(Stage stage, RewardMode mode, const RewardConfig& cfg,
                           std::optional<double> style_raw, RewardBreakdown& b) {
  if (stage == Stage::I && style_raw.has_value())
    throw ConfigError("style reward supplied in Stage I");
  if (stage == Stage::II && mode == RewardMode::BR_ER && !style_raw.has_value())
    throw ConfigError("Stage II BR+ER requires a style reward");

  const bool use_gait = (stage == Stage::I) || (mode == RewardMode::BR_GR);
  const bool use_style = (stage == Stage::II) && (mode == RewardMode::BR_ER);
  if (use_style) b.raw[int(Term::StyleScore)] = *style_raw;

  for (int i = 0; i < kTermCount; ++i)
    b.scaled[i] = b.raw[i] * cfg.scales[i] * cfg.dt;

  b.task_subtotal = b.scaled[int(Term::LinVelTracking)] + b.scaled[int(Term::AngVelTracking)];
  b.regularization_subtotal = 0.0;
  for (int i = int(Term::LinVelPenalty); i <= int(Term::ContactForcePenalty); ++i)
    b.regularization_subtotal += b.scaled[i];
  b.gait_subtotal = 0.0;
  if (use_gait)
    for (int i = int(Term::SwingPhaseForce); i <= int(Term::FootswingHeight); ++i)
      b.gait_subtotal += b.scaled[i];
  else
    for (int i = int(Term::SwingPhaseForce); i <= int(Term::FootswingHeight); ++i)
      b.scaled[i] = 0.0;
  b.style_scaled = use_style ? b.scaled[int(Term::StyleScore)] : 0.0;
  if (!use_style) b.scaled[int(Term::StyleScore)] = 0.0;

  b.total = b.task_subtotal + b.regularization_subtotal + b.gait_subtotal + b.style_scaled;
}

}  // namespace loco::rewards
