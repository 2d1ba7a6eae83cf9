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

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "semgrid/error.hpp"
#include "semgrid/spherical.hpp"

using namespace semgrid;

namespace {

// Pixel by direct evaluation of the projection formulas.
Pixel formula_pixel(const Point& p, const RangeImageSpec& s) {
  const double r = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
  const double up = s.fov_up_deg * M_PI / 180.0, down = s.fov_down_deg * M_PI / 180.0;
  double col = std::floor(s.width * (0.5 * (1.0 - std::atan2(p.y, p.x) / M_PI)));
  double row = std::floor(s.height * (1.0 - (std::asin(p.z / r) - down) / (up - down)));
  col = std::clamp(col, 0.0, s.width - 1.0);
  row = std::clamp(row, 0.0, s.height - 1.0);
  return {static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(col)};
}

}  // namespace

TEST_SUITE("spherical") {

TEST_CASE("forward point lands in the center column") {
  const RangeImageSpec spec;
  const RangeImage img = project_to_range_image(PointCloud({{10, 0, 0, 0.5}}), spec);
  const auto px = project_point({10, 0, 0, 0}, spec);
  REQUIRE(px.has_value());
  CHECK(px->col == 1024);
  CHECK(img.range[img.offset(*px)] == doctest::Approx(10.0));
  CHECK(img.intensity[img.offset(*px)] == doctest::Approx(0.5));
  CHECK(img.point_index[img.offset(*px)] == 0);
}

TEST_CASE("nearest point wins a pixel, ties keep the lower index") {
  const RangeImageSpec spec;
  const RangeImage img =
      project_to_range_image(PointCloud({{7, 0, 0, 0.1}, {5, 0, 0, 0.2}, {5, 0, 0, 0.3}}), spec);
  const auto px = project_point({5, 0, 0, 0}, spec);
  CHECK(img.range[img.offset(*px)] == doctest::Approx(5.0));
  CHECK(img.point_index[img.offset(*px)] == 1);
}

TEST_CASE("empty cloud gives an empty image") {
  const RangeImage img = project_to_range_image(PointCloud(), RangeImageSpec{});
  for (std::size_t k = 0; k < img.range.size(); ++k) {
    CHECK(img.range[k] == -1.0);
    CHECK(img.intensity[k] == -1.0);
    CHECK(img.point_index[k] == -1);
  }
}

TEST_CASE("origin points are skipped and counted") {
  const RangeImage img = project_to_range_image(PointCloud({{0, 0, 0, 0}, {1, 1, 0, 0}}), RangeImageSpec{});
  CHECK(img.skipped_points == 1);
  CHECK_FALSE(project_point({0, 0, 0, 0}, RangeImageSpec{}).has_value());
}

TEST_CASE("projection matches the formula and the image invariants") {
  std::mt19937_64 rng(3);
  const RangeImageSpec spec{512, 32, 3.0, -25.0};
  PointCloud cloud = testing::random_cloud(rng, 20000, GridSpec{-40, -40, 1, 80, 80});
  const RangeImage img = project_to_range_image(cloud, spec);
  std::vector<double> best(spec.pixel_count(), INFINITY);
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    const Pixel f = formula_pixel(cloud[k], spec);
    const auto px = project_point(cloud[k], spec);
    REQUIRE(px.has_value());
    CHECK(px->row == f.row);
    CHECK(px->col == f.col);
    const double r = std::sqrt(cloud[k].x * cloud[k].x + cloud[k].y * cloud[k].y + cloud[k].z * cloud[k].z);
    best[img.offset(*px)] = std::min(best[img.offset(*px)], r);
  }
  for (std::size_t k = 0; k < spec.pixel_count(); ++k) {
    CHECK((img.range[k] >= 0.0) == (img.point_index[k] >= 0));
    if (img.point_index[k] < 0) continue;
    const Point& p = cloud[static_cast<std::size_t>(img.point_index[k])];
    const double r = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
    CHECK(std::abs(img.range[k] - r) <= 1e-5);
    CHECK(img.range[k] == doctest::Approx(best[k]).epsilon(1e-12));
  }
}

TEST_CASE("yawing by whole columns shifts columns") {
  std::mt19937_64 rng(8);
  const RangeImageSpec spec{360, 16, 3.0, -25.0};
  std::uniform_real_distribution<double> az(-M_PI, M_PI), el(-0.4, 0.04), rr(2.0, 50.0);
  const double step = 2.0 * M_PI / spec.width;
  int checked = 0;
  for (int n = 0; n < 3000; ++n) {
    const double a = az(rng), e = el(rng), r = rr(rng);
    const Point p{r * std::cos(e) * std::cos(a), r * std::cos(e) * std::sin(a), r * std::sin(e), 0};
    const auto px = project_point(p, spec);
    // Keep clear of column edges so rounding cannot flip a floor.
    const double u = spec.width * (0.5 * (1.0 - std::atan2(p.y, p.x) / M_PI));
    if (std::abs(u - std::round(u)) < 1e-6) continue;
    for (int k : {1, 5, 90}) {
      const double b = a + k * step;
      const Point q{r * std::cos(e) * std::cos(b), r * std::cos(e) * std::sin(b), p.z, 0};
      const auto qx = project_point(q, spec);
      CHECK(qx->row == px->row);
      CHECK((px->col + spec.width - qx->col) % spec.width == static_cast<std::uint32_t>(k));
      ++checked;
    }
  }
  CHECK(checked > 8000);
}

TEST_CASE("lifting assigns each point its pixel row") {
  const RangeImageSpec spec{64, 8, 3.0, -25.0};
  PointCloud cloud({{10, 0, -1, 0}, {12, 0, -1.2, 0}, {0, 0, 0, 0}, {-5, 3, -2, 0}});
  const RangeImage img = project_to_range_image(cloud, spec);
  std::vector<double> probs(spec.pixel_count() * kNumClasses, 0.0);
  const auto px = project_point(cloud[0], spec);
  probs[img.offset(*px) * kNumClasses + static_cast<int>(ClassId::kRoad)] = 1.0;
  const PointCloud lifted = lift_pixel_semantics(img, probs, cloud);
  REQUIRE(lifted.has_probabilities());
  CHECK(lifted.probability_row(0)[4] == 1.0);
  // Point 1 lost the collision but shares the pixel.
  REQUIRE(project_point(cloud[1], spec)->col == px->col);
  REQUIRE(project_point(cloud[1], spec)->row == px->row);
  CHECK(lifted.probability_row(1)[4] == 1.0);
  for (int c = 0; c < kNumClasses; ++c) {
    CHECK(lifted.probability_row(2)[static_cast<std::size_t>(c)] == doctest::Approx(1.0 / 11));
    CHECK(lifted.probability_row(3)[static_cast<std::size_t>(c)] == doctest::Approx(1.0 / 11));
  }
  CHECK_THROWS_AS(lift_pixel_semantics(img, std::vector<double>(10, 0.0), cloud), Error);
}

TEST_CASE("uniform raster lifts to uniform rows") {
  std::mt19937_64 rng(1);
  const RangeImageSpec spec{128, 16, 3.0, -25.0};
  const PointCloud cloud = testing::random_cloud(rng, 300, GridSpec{-20, -20, 1, 40, 40});
  const RangeImage img = project_to_range_image(cloud, spec);
  const std::vector<double> probs(spec.pixel_count() * kNumClasses, 1.0 / kNumClasses);
  const PointCloud lifted = lift_pixel_semantics(img, probs, cloud);
  for (double v : lifted.probabilities()) CHECK(v == doctest::Approx(1.0 / 11));
}

TEST_CASE("range spec validation") {
  CHECK_THROWS_AS((RangeImageSpec{0, 64, 3, -25}.validate()), Error);
  CHECK_THROWS_AS((RangeImageSpec{64, 64, -25, 3}.validate()), Error);
}

}  // TEST_SUITE
