/*
 * Copyright 2026 The semgrid Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string_view>
#include <vector>

#include "Eigen/Core"
#include "semgrid/core.hpp"

namespace semgrid {

// One named float layer. Invalid cells hold 0.0.
struct GridLayer {
  GridSpec spec;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  GridLayer() = default;
  explicit GridLayer(const GridSpec& s) : spec(s), values(s.cell_count(), 0.0), valid(s.cell_count(), 0) {}

  bool is_valid(CellIndex c) const { return valid[spec.offset(c)] != 0; }
  double value(CellIndex c) const { return values[spec.offset(c)]; }
  void set(CellIndex c, double v) {
    values[spec.offset(c)] = v;
    valid[spec.offset(c)] = 1;
  }
  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
  }
  friend bool operator==(const GridLayer&, const GridLayer&) = default;
};

// The five-layer multi-layer grid map.
struct GridMapStack {
  static constexpr std::array<std::string_view, 5> kLayerNames = {
      "z_max", "z_min", "intensity", "observations", "occlusion_upper"};

  GridLayer z_max;            // highest detection in the cell
  GridLayer z_min;            // lowest detection in the cell
  GridLayer intensity;        // mean detection intensity
  GridLayer observations;     // number of rays crossing the cell
  GridLayer occlusion_upper;  // lowest crossing-ray height

  const GridSpec& spec() const { return z_max.spec; }
  std::array<const GridLayer*, 5> layers() const {
    return {&z_max, &z_min, &intensity, &observations, &occlusion_upper};
  }
  std::array<GridLayer*, 5> layers() {
    return {&z_max, &z_min, &intensity, &observations, &occlusion_upper};
  }
  friend bool operator==(const GridMapStack&, const GridMapStack&) = default;
};

struct Ray {
  Eigen::Vector3d origin;
  Eigen::Vector3d endpoint;
};

struct CellCrossing {
  CellIndex cell;
  double z_entry = 0.0;
  friend bool operator==(const CellCrossing&, const CellCrossing&) = default;
};

// Walks the xy projection of the ray segment through the grid and calls
// visit(CellIndex, z_entry) once per crossed cell, in order. The segment is
// clipped to the grid; the endpoint cell is visited when inside the grid.
// z_entry is the ray height where it enters the cell. When the ray passes
// exactly through a cell corner both side neighbours are visited (x-side
// first) before the diagonal cell. A ray with no xy extent visits its single
// cell with z_entry = min(origin.z, endpoint.z).
template <typename Visitor>
void visit_ray_cells(const Ray& ray, const GridSpec& spec, Visitor&& visit) {
  const double ox = ray.origin.x(), oy = ray.origin.y(), oz = ray.origin.z();
  const double dx = ray.endpoint.x() - ox;
  const double dy = ray.endpoint.y() - oy;
  const double dz = ray.endpoint.z() - oz;

  if (dx == 0.0 && dy == 0.0) {
    if (const auto c = cell_index(ox, oy, spec)) visit(*c, std::min(oz, ray.endpoint.z()));
    return;
  }

  // Liang-Barsky clip against the grid rectangle.
  double t0 = 0.0, t1 = 1.0;
  const auto clip = [&](double p, double q) {
    if (p == 0.0) return q >= 0.0;
    const double r = q / p;
    if (p < 0.0) {
      if (r > t1) return false;
      t0 = std::max(t0, r);
    } else {
      if (r < t0) return false;
      t1 = std::min(t1, r);
    }
    return true;
  };
  const double x_max = spec.x_max(), y_max = spec.y_max();
  if (!clip(-dx, ox - spec.x_min) || !clip(dx, x_max - ox) || !clip(-dy, oy - spec.y_min) ||
      !clip(dy, y_max - oy) || t0 > t1) {
    return;
  }

  const auto index_of = [&](double v, double lo, std::uint32_t n) {
    const double f = std::floor((v - lo) / spec.cell_size);
    if (f < 0.0) return std::int32_t{0};
    if (f >= static_cast<double>(n)) return static_cast<std::int32_t>(n - 1);
    return static_cast<std::int32_t>(f);
  };
  const double sx0 = t0 == 0.0 ? ox : ox + t0 * dx;
  const double sy0 = t0 == 0.0 ? oy : oy + t0 * dy;
  const double sx1 = t1 == 1.0 ? ray.endpoint.x() : ox + t1 * dx;
  const double sy1 = t1 == 1.0 ? ray.endpoint.y() : oy + t1 * dy;
  std::int32_t ix = index_of(sx0, spec.x_min, spec.n_x);
  std::int32_t iy = index_of(sy0, spec.y_min, spec.n_y);
  const std::int32_t end_ix = index_of(sx1, spec.x_min, spec.n_x);
  const std::int32_t end_iy = index_of(sy1, spec.y_min, spec.n_y);

  const std::int32_t step_x = end_ix > ix ? 1 : -1;
  const std::int32_t step_y = end_iy > iy ? 1 : -1;
  std::int32_t remaining_x = std::abs(end_ix - ix);
  std::int32_t remaining_y = std::abs(end_iy - iy);

  const auto z_at = [&](double t) { return oz + std::clamp(t, 0.0, 1.0) * dz; };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Boundary parameters are recomputed from the index each step, so there is
  // no accumulated drift along long rays.
  const auto next_t_x = [&](std::int32_t i) {
    if (remaining_x == 0 || dx == 0.0) return kInf;
    const double boundary = spec.x_min + (i + (step_x > 0 ? 1 : 0)) * spec.cell_size;
    return (boundary - ox) / dx;
  };
  const auto next_t_y = [&](std::int32_t j) {
    if (remaining_y == 0 || dy == 0.0) return kInf;
    const double boundary = spec.y_min + (j + (step_y > 0 ? 1 : 0)) * spec.cell_size;
    return (boundary - oy) / dy;
  };

  visit(CellIndex{ix, iy}, z_at(t0));
  while (remaining_x + remaining_y > 0) {
    const double tx = next_t_x(ix);
    const double ty = next_t_y(iy);
    if (tx < ty) {
      ix += step_x;
      --remaining_x;
      visit(CellIndex{ix, iy}, z_at(tx));
    } else if (ty < tx) {
      iy += step_y;
      --remaining_y;
      visit(CellIndex{ix, iy}, z_at(ty));
    } else if (tx != kInf) {
      const double z = z_at(tx);
      visit(CellIndex{ix + step_x, iy}, z);
      visit(CellIndex{ix, iy + step_y}, z);
      ix += step_x;
      iy += step_y;
      --remaining_x;
      --remaining_y;
      visit(CellIndex{ix, iy}, z);
    } else {
      break;
    }
  }
}

std::vector<CellCrossing> traverse_ray(const Ray& ray, const GridSpec& spec);

struct DetectionLayers {
  GridLayer z_max;
  GridLayer z_min;
  GridLayer intensity;
};

struct ObservationLayers {
  GridLayer observations;
  GridLayer occlusion_upper;
};

DetectionLayers encode_detection_layers(const PointCloud& cloud, const GridSpec& spec);

// Points coinciding with the sensor origin carry no ray and are skipped.
ObservationLayers encode_observation_layers(const PointCloud& cloud, const GridSpec& spec,
                                            const Eigen::Vector3d& sensor_origin);

GridMapStack encode_multilayer(const PointCloud& cloud, const GridSpec& spec,
                               const Eigen::Vector3d& sensor_origin = Eigen::Vector3d::Zero());

}  // namespace semgrid
