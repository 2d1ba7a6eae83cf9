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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "semgrid/core.hpp"

namespace semgrid {

// Spherical projection geometry. Defaults follow a 64-beam sensor with a
// [-25, +3] degree vertical field of view.
struct RangeImageSpec {
  std::uint32_t width = 2048;
  std::uint32_t height = 64;
  double fov_up_deg = 3.0;
  double fov_down_deg = -25.0;

  void validate() const;
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  friend bool operator==(const RangeImageSpec&, const RangeImageSpec&) = default;
};

struct Pixel {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
};

// Rasters are row-major, height x width. Empty pixels hold -1 in range and
// intensity and -1 in point_index.
struct RangeImage {
  RangeImageSpec spec;
  std::vector<double> range;
  std::vector<double> intensity;
  std::vector<std::int64_t> point_index;
  std::size_t skipped_points = 0;

  std::size_t offset(Pixel p) const { return static_cast<std::size_t>(p.row) * spec.width + p.col; }
};

// Pixel a point falls in, clamped to the image. nullopt for the origin.
std::optional<Pixel> project_point(const Point& p, const RangeImageSpec& spec);

// Nearest point wins each pixel; equal ranges keep the lower point index.
RangeImage project_to_range_image(const PointCloud& cloud, const RangeImageSpec& spec);

// pixel_probs is height x width x kNumClasses (class fastest). Every point
// gets the row of the pixel it projects to; all-zero pixels and skipped
// points get the uniform distribution.
PointCloud lift_pixel_semantics(const RangeImage& image, std::span<const double> pixel_probs,
                                const PointCloud& cloud);

}  // namespace semgrid
