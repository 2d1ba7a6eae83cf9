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

#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "semgrid/error.hpp"
#include "semgrid/gridmap.hpp"

using namespace semgrid;
using testing::CellKey;

namespace {

const GridSpec kUnit{0.0, 0.0, 1.0, 5, 5};

std::vector<CellIndex> cells_of(const std::vector<CellCrossing>& xs) {
  std::vector<CellIndex> out;
  for (const auto& x : xs) out.push_back(x.cell);
  return out;
}

Ray random_ray(std::mt19937_64& rng, const GridSpec& spec) {
  std::uniform_real_distribution<double> ux(spec.x_min - 2.0, spec.x_max() + 2.0);
  std::uniform_real_distribution<double> uy(spec.y_min - 2.0, spec.y_max() + 2.0);
  std::uniform_real_distribution<double> uz(-2.0, 2.0);
  Ray r{{ux(rng), uy(rng), uz(rng)}, {ux(rng), uy(rng), uz(rng)}};
  return r;
}

}  // namespace

TEST_SUITE("gridmap") {

TEST_CASE("detection layers hand examples") {
  const GridSpec spec{0.0, 0.0, 1.0, 3, 3};
  const auto single = encode_detection_layers(PointCloud({{0.5, 0.5, 1.2, 0.5}}), spec);
  CHECK(single.z_max.value({0, 0}) == 1.2);
  CHECK(single.z_min.value({0, 0}) == 1.2);
  CHECK(single.intensity.value({0, 0}) == 0.5);
  CHECK(single.z_max.valid_count() == 1);

  const auto pair = encode_detection_layers(
      PointCloud({{1.2, 2.7, -0.3, 0.2}, {1.8, 2.1, 0.7, 0.6}, {9, 9, 5, 1}}), spec);
  CHECK(pair.z_max.value({1, 2}) == 0.7);
  CHECK(pair.z_min.value({1, 2}) == -0.3);
  CHECK(pair.intensity.value({1, 2}) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(pair.z_max.valid_count() == 1);

  const auto empty = encode_detection_layers(PointCloud(), spec);
  CHECK(empty.z_max.valid_count() == 0);
  for (double v : empty.z_min.values) CHECK(v == 0.0);
}

TEST_CASE("detection layers equal the per-cell brute force") {
  std::mt19937_64 rng(21);
  const GridSpec spec{-5.0, -4.0, 0.5, 20, 16};
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud cloud = trial % 2 ? testing::random_cloud(rng, 2000, spec)
                                       : testing::clustered_cloud(rng, 2000, spec, 30);
    const auto layers = encode_detection_layers(cloud, spec);
    const auto oracle = testing::brute_force_cells(cloud, spec);
    CHECK(layers.z_max.valid_count() == oracle.size());
    for (const auto& [key, s] : oracle) {
      const CellIndex c{static_cast<std::int32_t>(key.first), static_cast<std::int32_t>(key.second)};
      REQUIRE(layers.z_max.is_valid(c));
      CHECK(layers.z_max.value(c) == s.z_max);
      CHECK(layers.z_min.value(c) == s.z_min);
      CHECK(std::abs(layers.intensity.value(c) - s.intensity_sum / s.n) <= 1e-9);
      CHECK(layers.z_max.value(c) >= layers.z_min.value(c));
    }
  }
}

TEST_CASE("straight ray hand example") {
  const Ray ray{{0.5, 0.5, 0.0}, {4.5, 0.5, -1.0}};
  const auto xs = traverse_ray(ray, kUnit);
  REQUIRE(xs.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(xs[static_cast<std::size_t>(i)].cell == CellIndex{i, 0});
  CHECK(xs[0].z_entry == 0.0);
  CHECK(xs[2].z_entry == doctest::Approx(-0.375).epsilon(1e-12));
}

TEST_CASE("ray inside one cell") {
  const auto xs = traverse_ray({{1.1, 1.1, 0.3}, {1.9, 1.4, 0.1}}, kUnit);
  REQUIRE(xs.size() == 1);
  CHECK(xs[0].cell == CellIndex{1, 1});
  CHECK(xs[0].z_entry == 0.3);
}

TEST_CASE("vertical ray gives one cell at the lower end") {
  const auto xs = traverse_ray({{2.5, 3.5, 1.0}, {2.5, 3.5, -0.5}}, kUnit);
  REQUIRE(xs.size() == 1);
  CHECK(xs[0].cell == CellIndex{2, 3});
  CHECK(xs[0].z_entry == -0.5);
  CHECK_THROWS_AS(traverse_ray({{1, 1, 1}, {1, 1, 1}}, kUnit), Error);
}

TEST_CASE("diagonal ray through corners visits both edge cells") {
  const auto xs = traverse_ray({{0.5, 0.5, 0.0}, {2.5, 2.5, 0.0}}, kUnit);
  const std::vector<CellIndex> expected = {{0, 0}, {1, 0}, {0, 1}, {1, 1},
                                           {2, 1}, {1, 2}, {2, 2}};
  CHECK(cells_of(xs) == expected);
  // The three cells at a corner share the corner's height.
  const auto ys = traverse_ray({{0.5, 0.5, 0.0}, {2.5, 2.5, 2.0}}, kUnit);
  CHECK(ys[1].z_entry == doctest::Approx(0.5));
  CHECK(ys[2].z_entry == doctest::Approx(0.5));
  CHECK(ys[3].z_entry == doctest::Approx(0.5));
}

TEST_CASE("rays starting outside enter at the boundary") {
  const auto xs = traverse_ray({{-2.0, 0.5, 2.0}, {1.5, 0.5, -1.5}}, kUnit);
  REQUIRE(xs.size() == 2);
  CHECK(xs[0].cell == CellIndex{0, 0});
  CHECK(xs[0].z_entry == doctest::Approx(0.0));
  CHECK(xs[1].cell == CellIndex{1, 0});
  CHECK(traverse_ray({{-2, -2, 0}, {-1, 7, 0}}, kUnit).empty());
  // Negative direction, leaving the grid.
  const auto back = traverse_ray({{3.5, 4.5, 0.0}, {3.5, -9.0, 0.0}}, kUnit);
  CHECK(back.size() == 5);
  CHECK(back.back().cell == CellIndex{3, 0});
}

TEST_CASE("traversal agrees with the sampling oracle") {
  std::mt19937_64 rng(99);
  const GridSpec spec{-2.0, -1.5, 0.5, 12, 10};
  const double step = 1e-4 * spec.cell_size;
  int extra = 0;
  for (int n = 0; n < 300; ++n) {
    const Ray ray = random_ray(rng, spec);
    const auto xs = traverse_ray(ray, spec);
    std::set<CellKey> dda;
    for (const auto& x : xs) {
      const CellKey key{x.cell.i, x.cell.j};
      CHECK(dda.insert(key).second);  // each cell once
      const auto iv = testing::segment_in_cell(ray, spec, key);
      REQUIRE(iv.has_value());
      CHECK(std::abs(x.z_entry - (ray.origin.z() + iv->first * (ray.endpoint.z() - ray.origin.z()))) <= 1e-9);
    }
    const auto sampled = testing::sample_ray_cells(ray, spec, step);
    for (const auto& c : sampled) CHECK(dda.count(c) == 1);
    for (const auto& c : dda) {
      if (sampled.count(c)) continue;
      ++extra;
      CHECK(testing::crossing_length(ray, spec, c) <= 2.0 * step);
    }
    // Consecutive cells are 4- or 8-neighbors.
    for (std::size_t k = 1; k < xs.size(); ++k) {
      CHECK(std::abs(xs[k].cell.i - xs[k - 1].cell.i) <= 1);
      CHECK(std::abs(xs[k].cell.j - xs[k - 1].cell.j) <= 1);
    }
  }
  CHECK(extra <= 3);
}

TEST_CASE("observation layers hand examples") {
  const GridSpec spec{0.0, 0.0, 1.0, 6, 3};
  const auto one = encode_observation_layers(PointCloud({{4.5, 0.5, -1.0, 0}}), spec, {0.5, 0.5, 0.0});
  CHECK(one.observations.valid_count() == 5);
  for (int i = 0; i < 5; ++i) CHECK(one.observations.value({i, 0}) == 1.0);

  const auto two = encode_observation_layers(
      PointCloud({{2.5, 1.5, -0.2, 0}, {2.5, 1.5, 0.4, 0}}), spec, {2.5, 1.5, 1.0});
  CHECK(two.observations.value({2, 1}) == 2.0);
  CHECK(two.occlusion_upper.value({2, 1}) == doctest::Approx(-0.2));
}

TEST_CASE("observation laws on random clouds") {
  std::mt19937_64 rng(4);
  const GridSpec spec{-6.0, -5.0, 0.5, 24, 20};
  const Eigen::Vector3d origin(0.2, -0.3, 1.7);
  PointCloud cloud = testing::random_cloud(rng, 400, spec, 3.0);
  const GridMapStack stack = encode_multilayer(cloud, spec, origin);

  std::vector<double> counts(spec.cell_count(), 0.0);
  for (const Point& p : cloud.points()) {
    for (const auto& x : traverse_ray({origin, {p.x, p.y, p.z}}, spec)) counts[spec.offset(x.cell)] += 1.0;
  }
  for (std::size_t k = 0; k < spec.cell_count(); ++k) {
    CHECK(stack.observations.values[k] == counts[k]);
    CHECK((stack.observations.valid[k] != 0) == (counts[k] > 0));
    if (stack.z_max.valid[k]) {
      CHECK(stack.observations.valid[k]);
      CHECK(stack.z_max.values[k] >= stack.z_min.values[k]);
    }
    CHECK(stack.z_max.valid[k] == stack.z_min.valid[k]);
    CHECK(stack.z_max.valid[k] == stack.intensity.valid[k]);
    CHECK(stack.occlusion_upper.valid[k] == stack.observations.valid[k]);
  }
  // occlusion_upper is a lower envelope of the crossing heights.
  for (const Point& p : cloud.points()) {
    for (const auto& x : traverse_ray({origin, {p.x, p.y, p.z}}, spec)) {
      CHECK(stack.occlusion_upper.values[spec.offset(x.cell)] <= x.z_entry);
    }
  }
  // Dropping a ray never raises any count.
  std::vector<Point> fewer(cloud.points().begin(), cloud.points().end() - 1);
  const auto less = encode_observation_layers(PointCloud(fewer), spec, origin);
  for (std::size_t k = 0; k < spec.cell_count(); ++k) {
    CHECK(less.observations.values[k] <= stack.observations.values[k]);
  }
}

TEST_CASE("empty cloud gives five invalid layers") {
  const GridMapStack stack = encode_multilayer(PointCloud(), kUnit);
  for (const GridLayer* l : stack.layers()) CHECK(l->valid_count() == 0);
}

TEST_CASE("point order does not change the stack") {
  std::mt19937_64 rng(17);
  const GridSpec spec{-4.0, -4.0, 0.25, 32, 32};
  const PointCloud cloud = testing::clustered_cloud(rng, 3000, spec, 40);
  std::vector<Point> shuffled(cloud.points().begin(), cloud.points().end());
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto a = encode_multilayer(cloud, spec);
  const auto b = encode_multilayer(PointCloud(shuffled), spec);
  CHECK(a.z_max == b.z_max);
  CHECK(a.z_min == b.z_min);
  CHECK(a.observations == b.observations);
  CHECK(a.occlusion_upper == b.occlusion_upper);
  for (std::size_t k = 0; k < spec.cell_count(); ++k) {
    CHECK(std::abs(a.intensity.values[k] - b.intensity.values[k]) <= 1e-12);
  }
}

}  // TEST_SUITE
