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

#include "semgrid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "semgrid/error.hpp"

namespace semgrid {
namespace {

// SemanticKITTI raw ids used by the scene.
enum RawId : std::uint16_t {
  kRawCar = 10,
  kRawBicycle = 11,
  kRawPerson = 30,
  kRawBicyclist = 31,
  kRawRoad = 40,
  kRawParking = 44,
  kRawSidewalk = 48,
  kRawBuilding = 50,
  kRawFence = 51,
  kRawLaneMarking = 60,
  kRawVegetation = 70,
  kRawTrunk = 71,
  kRawTerrain = 72,
  kRawPole = 80,
  kRawTrafficSign = 81,
  kRawMovingCar = 252,
};

struct Box {
  Eigen::Vector3d lo;
  Eigen::Vector3d hi;
  std::uint16_t raw = 0;
  std::uint16_t instance = 0;
  double intensity = 0.3;
  // Moving boxes shift by velocity * frame along x.
  double velocity = 0.0;
};

struct Scene {
  std::vector<Box> boxes;
};

constexpr double kRoadHalfWidth = 3.5;

// Ground class as a function of the lateral offset.
std::uint16_t ground_raw(double y) {
  const double a = std::abs(y);
  if (a < 0.08) return kRawLaneMarking;
  if (a < kRoadHalfWidth) return kRawRoad;
  if (y > 0.0 && a < 5.5) return kRawSidewalk;
  if (y < 0.0 && a < 6.0) return kRawParking;
  return kRawTerrain;
}

double ground_intensity(std::uint16_t raw) {
  switch (raw) {
    case kRawLaneMarking:
      return 0.85;
    case kRawRoad:
      return 0.25;
    case kRawSidewalk:
      return 0.35;
    case kRawParking:
      return 0.3;
    default:
      return 0.45;
  }
}

Box make_box(double x0, double y0, double z0, double sx, double sy, double sz, std::uint16_t raw,
             std::uint16_t instance, double intensity) {
  return Box{Eigen::Vector3d(x0, y0, z0), Eigen::Vector3d(x0 + sx, y0 + sy, z0 + sz), raw,
             instance, intensity, 0.0};
}

Scene build_scene(std::uint64_t seed, double x_from, double x_to) {
  std::mt19937_64 rng(seed ^ 0x5eed5cafeULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };
  Scene scene;
  std::uint16_t instance = 1;

  // Building rows with fences in the gaps.
  for (const double side : {1.0, -1.0}) {
    double x = x_from;
    while (x < x_to) {
      const double length = uniform(8.0, 22.0);
      const double depth = uniform(6.0, 10.0);
      const double y_near = side > 0 ? uniform(12.0, 14.0) : -uniform(12.0, 14.0);
      const double y0 = side > 0 ? y_near : y_near - depth;
      scene.boxes.push_back(make_box(x, y0, 0.0, length, depth, uniform(6.0, 15.0), kRawBuilding,
                                     0, uniform(0.3, 0.5)));
      x += length;
      const double gap = uniform(2.0, 8.0);
      const double fence_y = side > 0 ? 11.0 : -11.2;
      scene.boxes.push_back(make_box(x, fence_y, 0.0, gap, 0.2, 1.3, kRawFence, 0, 0.4));
      x += gap;
    }
  }

  // Poles with occasional signs on the sidewalk / parking edge.
  for (const double side : {1.0, -1.0}) {
    for (double x = x_from + uniform(0.0, 10.0); x < x_to; x += uniform(12.0, 25.0)) {
      const double y = side * 6.3;
      scene.boxes.push_back(make_box(x, y - 0.1, 0.0, 0.2, 0.2, 4.5, kRawPole, 0, 0.6));
      if (unit(rng) < 0.5) {
        scene.boxes.push_back(make_box(x - 0.05, y - 0.4, 2.6, 0.1, 0.8, 0.8, kRawTrafficSign, 0, 0.95));
      }
    }
  }

  // Trees: trunk plus crown, and low bushes.
  for (const double side : {1.0, -1.0}) {
    for (double x = x_from + uniform(0.0, 6.0); x < x_to; x += uniform(6.0, 14.0)) {
      const double y = side * uniform(7.5, 10.0);
      const double trunk_height = uniform(1.8, 3.0);
      scene.boxes.push_back(make_box(x - 0.15, y - 0.15, 0.0, 0.3, 0.3, trunk_height, kRawTrunk, 0, 0.35));
      const double crown = uniform(2.0, 4.0);
      scene.boxes.push_back(make_box(x - crown / 2, y - crown / 2, trunk_height, crown, crown,
                                     uniform(2.0, 4.0), kRawVegetation, 0, 0.5));
      if (unit(rng) < 0.4) {
        scene.boxes.push_back(make_box(x + 2.0, y - 0.8, 0.0, uniform(1.0, 3.0), 1.6,
                                       uniform(0.5, 1.2), kRawVegetation, 0, 0.5));
      }
    }
  }

  // Parked cars in the parking strip.
  for (double x = x_from + uniform(0.0, 8.0); x < x_to; x += uniform(6.0, 16.0)) {
    scene.boxes.push_back(make_box(x, -5.7, 0.0, 4.3, 1.8, 1.5, kRawCar, instance++, 0.55));
  }

  // Pedestrians on the sidewalk.
  for (double x = x_from + uniform(0.0, 10.0); x < x_to; x += uniform(8.0, 30.0)) {
    scene.boxes.push_back(make_box(x, uniform(3.8, 4.9), 0.0, 0.5, 0.5, 1.8, kRawPerson, instance++, 0.4));
  }

  // Cyclists at the road edge: bicycle plus rider.
  for (double x = x_from + uniform(5.0, 20.0); x < x_to; x += uniform(25.0, 50.0)) {
    scene.boxes.push_back(make_box(x, 2.6, 0.0, 1.8, 0.5, 1.0, kRawBicycle, instance, 0.5));
    scene.boxes.push_back(make_box(x + 0.6, 2.65, 1.0, 0.5, 0.4, 0.8, kRawBicyclist, instance++, 0.4));
  }

  // Traffic in both lanes; these move between frames.
  for (double x = x_from + uniform(5.0, 15.0); x < x_to; x += uniform(20.0, 40.0)) {
    Box car = make_box(x, -2.7, 0.0, 4.5, 1.9, 1.6, kRawMovingCar, instance++, 0.6);
    car.velocity = uniform(0.5, 1.5);
    scene.boxes.push_back(car);
  }
  for (double x = x_from + uniform(0.0, 20.0); x < x_to; x += uniform(25.0, 45.0)) {
    Box car = make_box(x, 0.8, 0.0, 4.5, 1.9, 1.6, kRawMovingCar, instance++, 0.6);
    car.velocity = -uniform(0.5, 1.5);
    scene.boxes.push_back(car);
  }
  return scene;
}

// Slab test; returns the entry distance along a unit direction or +inf.
double intersect(const Box& box, double shift, const Eigen::Vector3d& origin,
                 const Eigen::Vector3d& inv_dir) {
  double t_near = 0.0;
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double lo = box.lo[a] + (a == 0 ? shift : 0.0);
    const double hi = box.hi[a] + (a == 0 ? shift : 0.0);
    double t1 = (lo - origin[a]) * inv_dir[a];
    double t2 = (hi - origin[a]) * inv_dir[a];
    if (std::isnan(t1) || std::isnan(t2)) {
      if (origin[a] < lo || origin[a] > hi) return std::numeric_limits<double>::infinity();
      continue;
    }
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
    if (t_near > t_far) return std::numeric_limits<double>::infinity();
  }
  return t_near > 0.0 ? t_near : std::numeric_limits<double>::infinity();
}

SyntheticFrame render_frame(const Scene& scene, const SceneOptions& options, int frame,
                            const ClassMap& class_map) {
  const double ego_x = options.speed * frame;
  const Eigen::Vector3d sensor(ego_x, 0.0, options.sensor_height);
  std::mt19937_64 rng(options.seed * 1000003ULL + static_cast<std::uint64_t>(frame));
  std::normal_distribution<double> range_noise(0.0, options.range_noise);
  std::normal_distribution<double> intensity_noise(0.0, 0.05);

  // Only boxes that can be reached this frame.
  std::vector<const Box*> nearby;
  for (const Box& box : scene.boxes) {
    const double shift = box.velocity * frame;
    const double dx = std::max({box.lo.x() + shift - sensor.x(), sensor.x() - box.hi.x() - shift, 0.0});
    const double dy = std::max({box.lo.y() - sensor.y(), sensor.y() - box.hi.y(), 0.0});
    if (std::hypot(dx, dy) <= options.max_range) nearby.push_back(&box);
  }

  std::vector<Point> points;
  std::vector<std::uint32_t> raw_labels;
  points.reserve(static_cast<std::size_t>(options.beams) * options.columns);
  const double pi = std::numbers::pi;
  for (std::uint32_t b = 0; b < options.beams; ++b) {
    const double elevation =
        (options.fov_down_deg + (b + 0.5) * (options.fov_up_deg - options.fov_down_deg) / options.beams) *
        pi / 180.0;
    for (std::uint32_t c = 0; c < options.columns; ++c) {
      const double azimuth = pi - (c + 0.5) * 2.0 * pi / options.columns;
      const Eigen::Vector3d dir(std::cos(elevation) * std::cos(azimuth),
                                std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
      const Eigen::Vector3d inv_dir = dir.cwiseInverse();
      double best = std::numeric_limits<double>::infinity();
      std::uint16_t raw = 0, inst = 0;
      double intensity = 0.0;
      if (dir.z() < 0.0) {
        best = -sensor.z() / dir.z();
        const Eigen::Vector3d hit = sensor + best * dir;
        raw = ground_raw(hit.y());
        intensity = ground_intensity(raw);
      }
      for (const Box* box : nearby) {
        const double t = intersect(*box, box->velocity * frame, sensor, inv_dir);
        if (t < best) {
          best = t;
          raw = box->raw;
          inst = box->instance;
          intensity = box->intensity;
        }
      }
      if (!(best <= options.max_range)) continue;
      const double range = std::max(0.5, best + range_noise(rng));
      const Eigen::Vector3d local = range * dir;
      points.push_back(Point{local.x(), local.y(), local.z(),
                             std::clamp(intensity + intensity_noise(rng), 0.0, 1.0)});
      raw_labels.push_back(static_cast<std::uint32_t>(raw) | (static_cast<std::uint32_t>(inst) << 16));
    }
  }

  SyntheticFrame out;
  out.cloud = PointCloud(std::move(points));
  std::vector<Label> labels(raw_labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = class_map.remap(static_cast<std::uint16_t>(raw_labels[i] & 0xFFFFu));
  }
  out.cloud.set_labels(std::move(labels));
  out.raw_labels = std::move(raw_labels);
  out.pose = Pose(Eigen::Matrix3d::Identity(), sensor);
  return out;
}

}  // namespace

std::vector<SyntheticFrame> synth_sequence(const SceneOptions& options, int frames) {
  if (frames < 1 || options.beams < 1 || options.columns < 1 ||
      !(options.fov_up_deg > options.fov_down_deg) || !(options.max_range > 0.0) ||
      !(options.range_noise >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid synthetic scene options");
  }
  const double travel = options.speed * (frames - 1);
  const Scene scene = build_scene(options.seed, std::min(0.0, travel) - options.max_range - 20.0,
                                  std::max(0.0, travel) + options.max_range + 20.0);
  const ClassMap class_map = ClassMap::semantic_kitti();
  std::vector<SyntheticFrame> out;
  out.reserve(static_cast<std::size_t>(frames));
  for (int f = 0; f < frames; ++f) out.push_back(render_frame(scene, options, f, class_map));
  return out;
}

SyntheticFrame synth_scan(const SceneOptions& options) {
  return std::move(synth_sequence(options, 1).front());
}

}  // namespace semgrid
