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

#include "semgrid/spherical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "semgrid/error.hpp"

namespace semgrid {
namespace {

std::uint32_t clamp_index(double v, std::uint32_t size) {
  if (!(v > 0.0)) return 0;
  if (v >= static_cast<double>(size - 1)) return size - 1;
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void RangeImageSpec::validate() const {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "range image needs width, height >= 1");
  }
  if (!(fov_up_deg > fov_down_deg)) {
    throw Error(ErrorCode::kInvalidArgument, "range image needs fov_up > fov_down");
  }
}

std::optional<Pixel> project_point(const Point& p, const RangeImageSpec& spec) {
  const double range = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
  if (range == 0.0) return std::nullopt;
  const double pi = std::numbers::pi;
  const double yaw = std::atan2(p.y, p.x);
  const double elevation_deg = std::asin(std::clamp(p.z / range, -1.0, 1.0)) * 180.0 / pi;
  const double u = std::floor(spec.width * (0.5 * (1.0 - yaw / pi)));
  const double v = std::floor(spec.height * (1.0 - (elevation_deg - spec.fov_down_deg) /
                                                       (spec.fov_up_deg - spec.fov_down_deg)));
  return Pixel{clamp_index(v, spec.height), clamp_index(u, spec.width)};
}

RangeImage project_to_range_image(const PointCloud& cloud, const RangeImageSpec& spec) {
  spec.validate();
  RangeImage image;
  image.spec = spec;
  image.range.assign(spec.pixel_count(), -1.0);
  image.intensity.assign(spec.pixel_count(), -1.0);
  image.point_index.assign(spec.pixel_count(), -1);

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point& p = cloud[i];
    const auto pixel = project_point(p, spec);
    if (!pixel) {
      ++image.skipped_points;
      continue;
    }
    const double range = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
    const std::size_t k = image.offset(*pixel);
    // Strictly nearer replaces; ties keep the earlier (lower) index.
    if (image.point_index[k] < 0 || range < image.range[k]) {
      image.range[k] = range;
      image.intensity[k] = p.intensity;
      image.point_index[k] = static_cast<std::int64_t>(i);
    }
  }
  return image;
}

PointCloud lift_pixel_semantics(const RangeImage& image, std::span<const double> pixel_probs,
                                const PointCloud& cloud) {
  const RangeImageSpec& spec = image.spec;
  if (pixel_probs.size() != spec.pixel_count() * kNumClasses) {
    throw Error(ErrorCode::kDimensionMismatch,
                "pixel probability raster has " + std::to_string(pixel_probs.size()) +
                    " entries, expected " + std::to_string(spec.pixel_count() * kNumClasses));
  }
  std::vector<double> rows(cloud.size() * kNumClasses, 1.0 / kNumClasses);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto pixel = project_point(cloud[i], spec);
    if (!pixel) continue;
    const auto src = pixel_probs.subspan(image.offset(*pixel) * kNumClasses, kNumClasses);
    if (std::all_of(src.begin(), src.end(), [](double v) { return v == 0.0; })) continue;
    std::copy(src.begin(), src.end(), rows.begin() + static_cast<std::ptrdiff_t>(i * kNumClasses));
  }
  PointCloud out = cloud;
  out.set_probabilities(std::move(rows));
  return out;
}

}  // namespace semgrid
