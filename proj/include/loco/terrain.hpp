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

#include <algorithm>
#include <fstream>
#include <string>

#include "loco/common.hpp"

namespace loco::terrain {

enum class TerrainType {
  SlopeNormal = 0,
  SlopeRough = 1,
  StairsUp = 2,
  StairsDown = 3,
  Waves = 4,
  DiscreteSteps = 5,
};
inline constexpr int kTerrainTypeCount = 6;

inline const char* terrain_type_name(TerrainType t) {
  switch (t) {
    case TerrainType::SlopeNormal: return "slope_normal";
    case TerrainType::SlopeRough: return "slope_rough";
    case TerrainType::StairsUp: return "stairs_up";
    case TerrainType::StairsDown: return "stairs_down";
    case TerrainType::Waves: return "waves";
    case TerrainType::DiscreteSteps: return "discrete_steps";
  }
  return "?";
}

/// Height scan layout: 17 x 11 yaw-aligned grid at 0.1 m spacing, row-major
/// over x then y, 187 points total.
inline constexpr int kScanRows = 17;   // along body x, -0.8 .. +0.8
inline constexpr int kScanCols = 11;   // along body y, -0.5 .. +0.5
inline constexpr int kScanPoints = kScanRows * kScanCols;
inline constexpr double kScanSpacing = 0.1;

/// Governing level property, linear in level: min + (level/9)*(max-min).
inline double level_property(TerrainType type, int level) {
  if (level < 0 || level > 9) throw ConfigError("terrain level must be in [0,9]");
  const double a = double(level) / 9.0;
  switch (type) {
    case TerrainType::SlopeNormal:
    case TerrainType::SlopeRough:
      return (0.0 + a * 25.0) * M_PI / 180.0;  // inclination, rad
    case TerrainType::StairsUp:
    case TerrainType::StairsDown:
      return 0.05 + a * (0.20 - 0.05);         // step height, m
    case TerrainType::Waves:
      return 0.20 + a * (0.50 - 0.20);         // peak-to-trough amplitude, m
    case TerrainType::DiscreteSteps:
      return 0.05 + a * (0.15 - 0.05);         // block height bound, m
  }
  return 0.0;
}

struct TerrainMap {
  Eigen::MatrixXf grid;       // grid(ix, iy), heights in meters
  double resolution = 0.05;   // m per cell
  Vec2 origin = Vec2::Zero(); // world xy of grid(0, 0)
  TerrainType terrain_type = TerrainType::SlopeNormal;
  int level = 0;

  double extent_x() const { return (grid.rows() - 1) * resolution; }
  double extent_y() const { return (grid.cols() - 1) * resolution; }
  Vec2 center() const { return origin + Vec2(extent_x() / 2, extent_y() / 2); }
};

inline constexpr double kPlatformHalfWidth = 1.0;   // flat spawn square, m
inline constexpr double kStairWidth = 0.30;         // tread depth, m
inline constexpr double kWaveLength = 2.0;          // m

/// Procedural heightfield for one terrain type and difficulty level.
/// Slopes and stairs tile a square pyramid around the map center with a flat
/// spawn platform on top; waves run along x; discrete steps are random blocks.
inline TerrainMap generate(TerrainType type, int level, uint64_t seed,
                           double extent = 16.0, double resolution = 0.05) {
  if (level < 0 || level > 9) throw ConfigError("terrain level must be in [0,9]");
  if (extent < 4.0) throw ConfigError("terrain extent must cover the scan footprint");
  TerrainMap map;
  map.resolution = resolution;
  map.terrain_type = type;
  map.level = level;
  const int n = int(std::lround(extent / resolution)) + 1;
  map.grid.resize(n, n);
  map.origin = Vec2(-extent / 2, -extent / 2);
  Rng rng = Rng::derive(seed, 977u * uint64_t(int(type) * 10 + level));
  const double prop = level_property(type, level);

  // discrete steps: one height per 0.9 m block, sampled up front
  const double block = 0.9;
  const int nblocks = int(extent / block) + 2;
  MatX block_height;
  if (type == TerrainType::DiscreteSteps) {
    block_height.resize(nblocks, nblocks);
    for (int bi = 0; bi < nblocks; ++bi)
      for (int bj = 0; bj < nblocks; ++bj)
        block_height(bi, bj) = rng.uniform(-prop, prop);
  }

  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      const double x = map.origin.x() + ix * resolution;
      const double y = map.origin.y() + iy * resolution;
      const double cheb = std::max(std::abs(x), std::abs(y));
      const double beyond = std::max(0.0, cheb - kPlatformHalfWidth);
      double h = 0.0;
      switch (type) {
        case TerrainType::SlopeNormal:
          h = std::tan(prop) * beyond;
          break;
        case TerrainType::SlopeRough: {
          h = std::tan(prop) * beyond;
          if (beyond > 0.0) h += rng.uniform(-1.0, 1.0) * 0.02 * (1.0 + level);
          break;
        }
        case TerrainType::StairsUp:
        case TerrainType::StairsDown: {
          if (beyond > 0.0) {
            const double k = 1.0 + std::floor(beyond / kStairWidth);
            h = (type == TerrainType::StairsUp ? prop : -prop) * k;
          }
          break;
        }
        case TerrainType::Waves: {
          // ramp in over 0.5 m past the platform so the spawn stays flat
          const double blend = clamp(beyond / 0.5, 0.0, 1.0);
          h = blend * 0.5 * prop * std::sin(2.0 * M_PI * x / kWaveLength);
          break;
        }
        case TerrainType::DiscreteSteps: {
          if (beyond > 0.0) {
            const int bi = int((x + extent / 2) / block);
            const int bj = int((y + extent / 2) / block);
            h = block_height(std::min(bi, nblocks - 1), std::min(bj, nblocks - 1));
          }
          break;
        }
      }
      map.grid(ix, iy) = float(h);
    }
  }
  return map;
}

inline TerrainMap flat(double extent = 16.0, double resolution = 0.05) {
  return generate(TerrainType::SlopeNormal, 0, 0, extent, resolution);
}

/// Bilinear height lookup; queries outside the grid are clamped to the edge
/// and flagged through `clamped` when provided.
inline double height_at(const TerrainMap& map, double x, double y, bool* clamped = nullptr) {
  double gx = (x - map.origin.x()) / map.resolution;
  double gy = (y - map.origin.y()) / map.resolution;
  const double max_x = double(map.grid.rows() - 1);
  const double max_y = double(map.grid.cols() - 1);
  bool out = gx < 0.0 || gy < 0.0 || gx > max_x || gy > max_y;
  if (clamped) *clamped = out;
  gx = clamp(gx, 0.0, max_x);
  gy = clamp(gy, 0.0, max_y);
  int i0 = std::min(int(gx), int(max_x) - 1);
  int j0 = std::min(int(gy), int(max_y) - 1);
  const double fx = gx - i0, fy = gy - j0;
  const double h00 = map.grid(i0, j0), h10 = map.grid(i0 + 1, j0);
  const double h01 = map.grid(i0, j0 + 1), h11 = map.grid(i0 + 1, j0 + 1);
  return (1 - fx) * ((1 - fy) * h00 + fy * h01) + fx * ((1 - fy) * h10 + fy * h11);
}

/// 187-point scan of (base height - terrain height) around the base,
/// yaw-aligned, row-major over the 17x11 grid.
inline VecX height_scan(const TerrainMap& map, const Vec3& base_position, double base_yaw) {
  VecX scan(kScanPoints);
  const double cy = std::cos(base_yaw), sy = std::sin(base_yaw);
  for (int ix = 0; ix < kScanRows; ++ix) {
    const double dx = -0.8 + kScanSpacing * ix;
    for (int iy = 0; iy < kScanCols; ++iy) {
      const double dy = -0.5 + kScanSpacing * iy;
      const double wx = base_position.x() + cy * dx - sy * dy;
      const double wy = base_position.y() + sy * dx + cy * dy;
      scan[ix * kScanCols + iy] = base_position.z() - height_at(map, wx, wy);
    }
  }
  return scan;
}

/// Heightfield CSV (rows = grid y, cols = grid x) for offline plotting.
inline void save_heightfield_csv(const TerrainMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open terrain csv for writing: " + path);
  out.precision(9);
  for (int iy = 0; iy < map.grid.cols(); ++iy) {
    for (int ix = 0; ix < map.grid.rows(); ++ix) {
      if (ix) out << ",";
      out << map.grid(ix, iy);
    }
    out << "\n";
  }
}

enum class YawMode { Random, Constant };

struct CurriculumState {
  TerrainType terrain_type = TerrainType::SlopeNormal;
  int level = 0;
  int episodes_at_level = 0;
  bool graduated = false;
  YawMode commanded_yaw_mode = YawMode::Random;
};

inline constexpr double kPromoteFraction = 0.8;
inline constexpr double kDemoteFraction = 0.4;

/// Per-episode promotion/demotion on the mean linear-velocity tracking
/// reward, expressed as a fraction of its per-step maximum. Promotion past
/// the top level "graduates" the environment: it cycles back to a random
/// level of the same type and switches to a constant yaw command.
inline CurriculumState curriculum_update(CurriculumState state,
                                         double mean_tracking_reward_fraction, Rng& rng) {
  if (mean_tracking_reward_fraction < 0.0 || mean_tracking_reward_fraction > 1.0)
    throw ConfigError("tracking reward fraction must lie in [0,1]");
  const int old_level = state.level;
  state.episodes_at_level += 1;
  if (mean_tracking_reward_fraction > kPromoteFraction) {
    if (state.level == 9) {
      state.graduated = true;
      state.level = rng.uniform_int(0, 9);
      state.commanded_yaw_mode = YawMode::Constant;
    } else {
      state.level += 1;
    }
  } else if (mean_tracking_reward_fraction < kDemoteFraction) {
    state.level = std::max(0, state.level - 1);
  }
  if (state.level != old_level) state.episodes_at_level = 0;
  return state;
}

}  // namespace loco::terrain
