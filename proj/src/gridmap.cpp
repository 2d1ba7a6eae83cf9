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

#include "semgrid/gridmap.hpp"

#include "semgrid/error.hpp"

namespace semgrid {

std::vector<CellCrossing> traverse_ray(const Ray& ray, const GridSpec& spec) {
  spec.validate();
  if (!ray.origin.allFinite() || !ray.endpoint.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "traverse_ray: non-finite ray");
  }
  if (ray.origin == ray.endpoint) {
    throw Error(ErrorCode::kInvalidArgument, "traverse_ray: origin equals endpoint");
  }
  std::vector<CellCrossing> cells;
  visit_ray_cells(ray, spec, [&](CellIndex c, double z) { cells.push_back({c, z}); });
  return cells;
}

DetectionLayers encode_detection_layers(const PointCloud& cloud, const GridSpec& spec) {
  spec.validate();
  const std::size_t n = spec.cell_count();
  std::vector<double> z_hi(n, -std::numeric_limits<double>::infinity());
  std::vector<double> z_lo(n, std::numeric_limits<double>::infinity());
  std::vector<double> intensity_sum(n, 0.0);
  std::vector<std::uint32_t> count(n, 0);

  for (const Point& p : cloud.points()) {
    const auto c = cell_index(p.x, p.y, spec);
    if (!c) continue;
    const std::size_t k = spec.offset(*c);
    z_hi[k] = std::max(z_hi[k], p.z);
    z_lo[k] = std::min(z_lo[k], p.z);
    intensity_sum[k] += p.intensity;
    ++count[k];
  }

  DetectionLayers out{GridLayer(spec), GridLayer(spec), GridLayer(spec)};
  for (std::size_t k = 0; k < n; ++k) {
    if (count[k] == 0) continue;
    out.z_max.values[k] = z_hi[k];
    out.z_min.values[k] = z_lo[k];
    out.intensity.values[k] = intensity_sum[k] / count[k];
    out.z_max.valid[k] = out.z_min.valid[k] = out.intensity.valid[k] = 1;
  }
  return out;
}

ObservationLayers encode_observation_layers(const PointCloud& cloud, const GridSpec& spec,
                                            const Eigen::Vector3d& sensor_origin) {
  spec.validate();
  if (!sensor_origin.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "sensor origin must be finite");
  }
  const std::size_t n = spec.cell_count();
  std::vector<std::uint32_t> hits(n, 0);
  std::vector<double> lowest(n, std::numeric_limits<double>::infinity());

  Ray ray{sensor_origin, sensor_origin};
  for (const Point& p : cloud.points()) {
    ray.endpoint = Eigen::Vector3d(p.x, p.y, p.z);
    if (ray.endpoint == sensor_origin) continue;
    visit_ray_cells(ray, spec, [&](CellIndex c, double z) {
      const std::size_t k = spec.offset(c);
      ++hits[k];
      if (z < lowest[k]) lowest[k] = z;
    });
  }

  ObservationLayers out{GridLayer(spec), GridLayer(spec)};
  for (std::size_t k = 0; k < n; ++k) {
    if (hits[k] == 0) continue;
    out.observations.values[k] = static_cast<double>(hits[k]);
    out.occlusion_upper.values[k] = lowest[k];
    out.observations.valid[k] = out.occlusion_upper.valid[k] = 1;
  }
  return out;
}

GridMapStack encode_multilayer(const PointCloud& cloud, const GridSpec& spec,
                               const Eigen::Vector3d& sensor_origin) {
  DetectionLayers detections = encode_detection_layers(cloud, spec);
  ObservationLayers observations = encode_observation_layers(cloud, spec, sensor_origin);
  return GridMapStack{std::move(detections.z_max), std::move(detections.z_min),
                      std::move(detections.intensity), std::move(observations.observations),
                      std::move(observations.occlusion_upper)};
}

}  // namespace semgrid
