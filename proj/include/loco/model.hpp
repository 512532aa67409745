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
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "loco/common.hpp"

namespace loco {

/// How a leg's three joints are arranged.
///   Lateral:  coxa yaw about base z, femur/tibia pitch in the outward
///             vertical plane (hexapod insect layout).
///   Sagittal: hip roll about base x, thigh/calf pitch in the sagittal
///             plane (quadruped layout).
enum class LegPlane { Lateral, Sagittal };

struct RobotModel {
  std::string name;
  int leg_count = 0;
  int joints_per_leg = 3;
  LegPlane leg_plane = LegPlane::Lateral;
  std::vector<Vec3> hip_offsets;        // base frame, per leg
  std::vector<double> side_sign;        // +1 left (y>0), -1 right
  Vec3 link_lengths = Vec3::Zero();     // coxa/hip, femur/thigh, tibia/calf
  double base_mass = 0.0;               // kg
  Mat3 base_inertia = Mat3::Zero();     // kg m^2, base frame
  Vec3 base_box_half = Vec3::Zero();    // collision box half extents
  VecX nominal_joint_positions;         // rad, length = action_dim()
  std::vector<std::array<double, 2>> joint_limits;  // per joint, [min,max]
  double torque_limit = 0.0;            // N m
  double joint_velocity_limit = 0.0;    // rad/s
  double foot_force_limit = 0.0;        // N

  int action_dim() const { return leg_count * joints_per_leg; }
  int foot_count() const { return leg_count; }

  void validate() const {
    if (leg_count <= 0 || joints_per_leg != 3)
      throw ConfigError("robot model: need leg_count > 0 and 3 joints per leg");
    if (int(hip_offsets.size()) != leg_count || int(side_sign.size()) != leg_count)
      throw ConfigError("robot model: hip/side arrays must match leg_count");
    if (nominal_joint_positions.size() != action_dim())
      throw ConfigError("robot model: nominal joint vector must have leg_count*joints_per_leg entries");
    if (int(joint_limits.size()) != action_dim())
      throw ConfigError("robot model: joint_limits must have one [min,max] per joint");
    if (!(link_lengths.array() > 0.0).all())
      throw ConfigError("robot model: link lengths must be positive");
    if (base_mass <= 0.0) throw ConfigError("robot model: base mass must be positive");
    Eigen::LLT<Mat3> llt(base_inertia);
    if (llt.info() != Eigen::Success)
      throw ConfigError("robot model: base inertia must be positive definite");
    for (const auto& lim : joint_limits)
      if (!(lim[0] < lim[1])) throw ConfigError("robot model: joint limit min >= max");
  }
};

/// Foot position in the base frame for one leg.
inline Vec3 foot_position_base(const RobotModel& m, const VecX& q, int leg) {
  const double L1 = m.link_lengths[0], L2 = m.link_lengths[1], L3 = m.link_lengths[2];
  const double s = m.side_sign[leg];
  const double q1 = q[leg * 3 + 0], q2 = q[leg * 3 + 1], q3 = q[leg * 3 + 2];
  if (m.leg_plane == LegPlane::Lateral) {
    const Vec3 u(-s * std::sin(q1), s * std::cos(q1), 0.0);
    const double cr = L1 + L2 * std::cos(q2) + L3 * std::cos(q2 + q3);
    const double cz = L2 * std::sin(q2) + L3 * std::sin(q2 + q3);
    return m.hip_offsets[leg] + cr * u + cz * Vec3::UnitZ();
  }
  // sagittal: roll about x applied to (x_s, s*L1, z_s)
  const double xs = L2 * std::sin(q2) + L3 * std::sin(q2 + q3);
  const double zs = -(L2 * std::cos(q2) + L3 * std::cos(q2 + q3));
  const double c1 = std::cos(q1), s1 = std::sin(q1);
  const double py = s * L1;
  return m.hip_offsets[leg] + Vec3(xs, c1 * py - s1 * zs, s1 * py + c1 * zs);
}

/// Knee (femur end) position in the base frame, used for thigh collision probes.
inline Vec3 knee_position_base(const RobotModel& m, const VecX& q, int leg) {
  const double L1 = m.link_lengths[0], L2 = m.link_lengths[1];
  const double s = m.side_sign[leg];
  const double q1 = q[leg * 3 + 0], q2 = q[leg * 3 + 1];
  if (m.leg_plane == LegPlane::Lateral) {
    const Vec3 u(-s * std::sin(q1), s * std::cos(q1), 0.0);
    return m.hip_offsets[leg] + (L1 + L2 * std::cos(q2)) * u + L2 * std::sin(q2) * Vec3::UnitZ();
  }
  const double xs = L2 * std::sin(q2);
  const double zs = -L2 * std::cos(q2);
  const double c1 = std::cos(q1), s1 = std::sin(q1);
  const double py = s * L1;
  return m.hip_offsets[leg] + Vec3(xs, c1 * py - s1 * zs, s1 * py + c1 * zs);
}

/// 3x3 Jacobian of the base-frame foot position w.r.t. the leg's joints.
inline Mat3 leg_jacobian(const RobotModel& m, const VecX& q, int leg) {
  const double L1 = m.link_lengths[0], L2 = m.link_lengths[1], L3 = m.link_lengths[2];
  const double s = m.side_sign[leg];
  const double q1 = q[leg * 3 + 0], q2 = q[leg * 3 + 1], q3 = q[leg * 3 + 2];
  Mat3 J;
  if (m.leg_plane == LegPlane::Lateral) {
    const Vec3 u(-s * std::sin(q1), s * std::cos(q1), 0.0);
    const Vec3 du(-s * std::cos(q1), -s * std::sin(q1), 0.0);
    const double cr = L1 + L2 * std::cos(q2) + L3 * std::cos(q2 + q3);
    J.col(0) = cr * du;
    J.col(1) = (-L2 * std::sin(q2) - L3 * std::sin(q2 + q3)) * u +
               (L2 * std::cos(q2) + L3 * std::cos(q2 + q3)) * Vec3::UnitZ();
    J.col(2) = (-L3 * std::sin(q2 + q3)) * u + L3 * std::cos(q2 + q3) * Vec3::UnitZ();
    return J;
  }
  const double xs2 = L2 * std::cos(q2) + L3 * std::cos(q2 + q3);
  const double zs2 = L2 * std::sin(q2) + L3 * std::sin(q2 + q3);
  const double xs = L2 * std::sin(q2) + L3 * std::sin(q2 + q3);
  const double zs = -(L2 * std::cos(q2) + L3 * std::cos(q2 + q3));
  const double c1 = std::cos(q1), s1 = std::sin(q1);
  const double py = s * L1;
  J.col(0) = Vec3(0.0, -s1 * py - c1 * zs, c1 * py - s1 * zs);
  J.col(1) = Vec3(xs2, s1 * zs2, c1 * zs2);
  const double xs3 = L3 * std::cos(q2 + q3);
  const double zs3 = L3 * std::sin(q2 + q3);
  J.col(2) = Vec3(xs3, s1 * zs3, c1 * zs3);
  return J;
}

/// Vertical distance from base origin to the nominal foot plane.
inline double nominal_stance_depth(const RobotModel& m) {
  double z = 0.0;
  for (int leg = 0; leg < m.leg_count; ++leg)
    z += foot_position_base(m, m.nominal_joint_positions, leg).z();
  return -z / m.leg_count;
}

inline RobotModel hexapod_model() {
  RobotModel m;
  m.name = "hexapod";
  m.leg_count = 6;
  m.leg_plane = LegPlane::Lateral;
  // legs ordered LF, LM, LH, RF, RM, RH
  m.hip_offsets = {Vec3(0.25, 0.12, 0.0),  Vec3(0.0, 0.14, 0.0),  Vec3(-0.25, 0.12, 0.0),
                   Vec3(0.25, -0.12, 0.0), Vec3(0.0, -0.14, 0.0), Vec3(-0.25, -0.12, 0.0)};
  m.side_sign = {1, 1, 1, -1, -1, -1};
  m.link_lengths = Vec3(0.06, 0.18, 0.25);
  m.base_mass = 12.0;
  m.base_inertia = Vec3(0.20, 0.35, 0.45).asDiagonal();
  m.base_box_half = Vec3(0.30, 0.15, 0.06);
  m.nominal_joint_positions.resize(18);
  for (int leg = 0; leg < 6; ++leg) {
    m.nominal_joint_positions[leg * 3 + 0] = 0.0;
    m.nominal_joint_positions[leg * 3 + 1] = -0.09;
    m.nominal_joint_positions[leg * 3 + 2] = -1.845;
  }
  m.joint_limits.resize(18);
  for (int leg = 0; leg < 6; ++leg) {
    m.joint_limits[leg * 3 + 0] = {-1.2, 1.2};
    m.joint_limits[leg * 3 + 1] = {-1.2, 1.2};
    m.joint_limits[leg * 3 + 2] = {-2.6, -0.9};
  }
  m.torque_limit = 33.5;
  m.joint_velocity_limit = 21.0;
  m.foot_force_limit = 100.0;
  m.validate();
  return m;
}

inline RobotModel quadruped_model() {
  RobotModel m;
  m.name = "quadruped";
  m.leg_count = 4;
  m.leg_plane = LegPlane::Sagittal;
  // legs ordered LF, LH, RF, RH
  m.hip_offsets = {Vec3(0.19, 0.13, 0.0), Vec3(-0.19, 0.13, 0.0),
                   Vec3(0.19, -0.13, 0.0), Vec3(-0.19, -0.13, 0.0)};
  m.side_sign = {1, 1, -1, -1};
  m.link_lengths = Vec3(0.08, 0.213, 0.213);
  m.base_mass = 13.0;
  m.base_inertia = Vec3(0.10, 0.25, 0.30).asDiagonal();
  m.base_box_half = Vec3(0.25, 0.12, 0.057);
  m.nominal_joint_positions.resize(12);
  for (int leg = 0; leg < 4; ++leg) {
    m.nominal_joint_positions[leg * 3 + 0] = 0.0;
    m.nominal_joint_positions[leg * 3 + 1] = 0.8;
    m.nominal_joint_positions[leg * 3 + 2] = -1.5;
  }
  m.joint_limits.resize(12);
  for (int leg = 0; leg < 4; ++leg) {
    m.joint_limits[leg * 3 + 0] = {-0.8, 0.8};
    m.joint_limits[leg * 3 + 1] = {-0.6, 2.6};
    m.joint_limits[leg * 3 + 2] = {-2.7, -0.85};
  }
  m.torque_limit = 33.5;
  m.joint_velocity_limit = 21.0;
  m.foot_force_limit = 150.0;
  m.validate();
  return m;
}

/// Key/value model file. One key per line, '#' comments; per-leg keys repeat.
inline void save_robot_model(const RobotModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  out << "name " << m.name << "\n";
  out << "leg_count " << m.leg_count << "\n";
  out << "joints_per_leg " << m.joints_per_leg << "\n";
  out << "leg_plane " << (m.leg_plane == LegPlane::Lateral ? "lateral" : "sagittal") << "\n";
  out.precision(17);
  out << "link_lengths " << m.link_lengths.transpose() << "\n";
  out << "base_mass " << m.base_mass << "\n";
  out << "base_inertia_diag " << m.base_inertia(0, 0) << " " << m.base_inertia(1, 1) << " "
      << m.base_inertia(2, 2) << "\n";
  out << "base_box_half " << m.base_box_half.transpose() << "\n";
  out << "torque_limit " << m.torque_limit << "\n";
  out << "joint_velocity_limit " << m.joint_velocity_limit << "\n";
  out << "foot_force_limit " << m.foot_force_limit << "\n";
  for (int leg = 0; leg < m.leg_count; ++leg)
    out << "hip " << m.hip_offsets[leg].transpose() << " " << m.side_sign[leg] << "\n";
  out << "nominal";
  for (int j = 0; j < m.action_dim(); ++j) out << " " << m.nominal_joint_positions[j];
  out << "\n";
  for (int j = 0; j < m.action_dim(); ++j)
    out << "joint_limit " << m.joint_limits[j][0] << " " << m.joint_limits[j][1] << "\n";
}

inline RobotModel load_robot_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  RobotModel m;
  std::vector<std::array<double, 2>> limits;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "name") ls >> m.name;
    else if (key == "leg_count") ls >> m.leg_count;
    else if (key == "joints_per_leg") ls >> m.joints_per_leg;
    else if (key == "leg_plane") {
      std::string v; ls >> v;
      if (v == "lateral") m.leg_plane = LegPlane::Lateral;
      else if (v == "sagittal") m.leg_plane = LegPlane::Sagittal;
      else throw ConfigError("model file: unknown leg_plane '" + v + "'");
    } else if (key == "link_lengths") ls >> m.link_lengths[0] >> m.link_lengths[1] >> m.link_lengths[2];
    else if (key == "base_mass") ls >> m.base_mass;
    else if (key == "base_inertia_diag") {
      Vec3 d; ls >> d[0] >> d[1] >> d[2];
      m.base_inertia = d.asDiagonal();
    } else if (key == "base_box_half") ls >> m.base_box_half[0] >> m.base_box_half[1] >> m.base_box_half[2];
    else if (key == "torque_limit") ls >> m.torque_limit;
    else if (key == "joint_velocity_limit") ls >> m.joint_velocity_limit;
    else if (key == "foot_force_limit") ls >> m.foot_force_limit;
    else if (key == "hip") {
      Vec3 h; double s;
      ls >> h[0] >> h[1] >> h[2] >> s;
      m.hip_offsets.push_back(h);
      m.side_sign.push_back(s);
    } else if (key == "nominal") {
      std::vector<double> vals;
      double v;
      while (ls >> v) vals.push_back(v);
      m.nominal_joint_positions = Eigen::Map<VecX>(vals.data(), long(vals.size()));
    } else if (key == "joint_limit") {
      std::array<double, 2> lim{};
      ls >> lim[0] >> lim[1];
      limits.push_back(lim);
    } else {
      throw ConfigError("model file: unknown key '" + key + "'");
    }
    if (ls.fail() && !ls.eof()) throw ConfigError("model file: malformed line '" + line + "'");
  }
  m.joint_limits = limits;
  m.validate();
  return m;
}

}  // namespace loco
