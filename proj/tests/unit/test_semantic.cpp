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
#include "semgrid/semantic.hpp"

using namespace semgrid;

namespace {

const GridSpec kSpec{0.0, 0.0, 1.0, 4, 3};
constexpr int kRoad = static_cast<int>(ClassId::kRoad);
constexpr int kVehicle = static_cast<int>(ClassId::kVehicle);

PointCloud labeled(std::vector<Point> pts, std::vector<Label> labels) {
  PointCloud c(std::move(pts));
  c.set_labels(std::move(labels));
  return c;
}

std::vector<double> row(std::initializer_list<std::pair<int, double>> entries) {
  std::vector<double> r(kNumClasses, 0.0);
  for (auto [c, v] : entries) r[static_cast<std::size_t>(c)] = v;
  return r;
}

}  // namespace

TEST_SUITE("semantic") {

TEST_CASE("histogram counts hard predictions") {
  const auto cloud = labeled({{0.5, 0.5, 0, 0}, {0.6, 0.2, 0, 0}, {0.1, 0.9, 0, 0}, {3.5, 2.5, 0, 0}},
                             {ClassId::kRoad, ClassId::kRoad, ClassId::kVehicle, Label::ignore()});
  const SemanticGrid h = encode_histogram(cloud, kSpec);
  const std::size_t c0 = kSpec.offset({0, 0});
  CHECK(h.cell(c0)[kRoad] == 2.0);
  CHECK(h.cell(c0)[kVehicle] == 1.0);
  CHECK(h.count[c0] == 3);
  const std::size_t c1 = kSpec.offset({3, 2});
  CHECK(h.count[c1] == 0);
  for (double v : h.cell(c1)) CHECK(v == 0.0);
  CHECK(encode_argmax(h).at({0, 0}) == Label(ClassId::kRoad));
  CHECK(encode_argmax(h).at({3, 2}).is_ignore());
}

TEST_CASE("argmax ties go to the lowest class") {
  const auto cloud = labeled({{0.5, 0.5, 0, 0}, {0.5, 0.5, 0, 0}}, {ClassId::kVehicle, ClassId::kRoad});
  CHECK(encode_argmax(encode_histogram(cloud, kSpec)).at({0, 0}) == Label(ClassId::kRoad));
}

TEST_CASE("missing predictions are an error") {
  CHECK_THROWS_AS(encode_histogram(PointCloud({{0, 0, 0, 0}}), kSpec), Error);
  CHECK_THROWS_AS(encode_summed(PointCloud({{0, 0, 0, 0}}), kSpec), Error);
}

TEST_CASE("histogram prefers probability argmax over labels") {
  PointCloud cloud({{0.5, 0.5, 0, 0}});
  cloud.set_labels({Label(ClassId::kRoad)});
  cloud.set_probabilities(row({{kVehicle, 0.9}, {kRoad, 0.1}}));
  CHECK(encode_histogram(cloud, kSpec).cell(0)[kVehicle] == 1.0);
}

TEST_CASE("summed and mean hand example") {
  PointCloud cloud({{1.5, 1.5, 0, 0}, {1.2, 1.7, 0, 0}});
  std::vector<double> rows = row({{kRoad, 0.7}, {kVehicle, 0.3}});
  const auto second = row({{kRoad, 0.6}, {kVehicle, 0.4}});
  rows.insert(rows.end(), second.begin(), second.end());
  cloud.set_probabilities(rows);
  const SemanticGrid s = encode_summed(cloud, kSpec);
  const std::size_t c = kSpec.offset({1, 1});
  CHECK(s.cell(c)[kRoad] == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(s.cell(c)[kVehicle] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(s.count[c] == 2);
  const SemanticGrid m = encode_mean(s);
  CHECK(m.cell(c)[kRoad] == doctest::Approx(0.65).epsilon(1e-12));
  CHECK(m.cell(c)[kVehicle] == doctest::Approx(0.35).epsilon(1e-12));
  for (double v : m.cell(0)) CHECK(v == 0.0);
}

TEST_CASE("encoding laws on random clouds") {
  std::mt19937_64 rng(12);
  const GridSpec spec{-2.0, -2.0, 0.5, 8, 8};
  for (int trial = 0; trial < 10; ++trial) {
    PointCloud cloud = testing::clustered_cloud(rng, 1500, spec, 12);
    cloud.set_probabilities(testing::random_probabilities(rng, cloud.size()));
    const SemanticGrid h = encode_histogram(cloud, spec);
    const SemanticGrid s = encode_summed(cloud, spec);
    const SemanticGrid m = encode_mean(s);
    const ArgmaxGrid a = encode_argmax(h);
    const auto oracle = testing::brute_force_cells(cloud, spec);
    for (std::size_t k = 0; k < spec.cell_count(); ++k) {
      double hs = 0.0, ss = 0.0, ms = 0.0;
      for (int c = 0; c < kNumClasses; ++c) {
        hs += h.cell(k)[static_cast<std::size_t>(c)];
        ss += s.cell(k)[static_cast<std::size_t>(c)];
        ms += m.cell(k)[static_cast<std::size_t>(c)];
        CHECK(h.cell(k)[static_cast<std::size_t>(c)] >= 0.0);
        if (s.count[k]) {
          CHECK(m.cell(k)[static_cast<std::size_t>(c)] ==
                doctest::Approx(s.cell(k)[static_cast<std::size_t>(c)] / s.count[k]).epsilon(1e-12));
        }
      }
      CHECK(hs == static_cast<double>(h.count[k]));
      CHECK(std::abs(ss - s.count[k]) <= 1e-4);
      if (s.count[k]) CHECK(std::abs(ms - 1.0) <= 1e-4);
      CHECK(a.labels[k].is_ignore() == (h.count[k] == 0));
    }
    // Argmax against the brute-force majority of hard predictions.
    const auto hard = hard_predictions(cloud);
    for (const auto& [key, st] : oracle) {
      std::vector<Label> members;
      for (std::size_t p : st.members) members.push_back(hard[p]);
      const CellIndex c{static_cast<std::int32_t>(key.first), static_cast<std::int32_t>(key.second)};
      CHECK(a.at(c) == testing::majority(members));
      CHECK(s.count[spec.offset(c)] == st.n);
    }
  }
}

TEST_CASE("one-hot probabilities make sum equal histogram") {
  std::mt19937_64 rng(6);
  const GridSpec spec{-2.0, -2.0, 0.5, 8, 8};
  PointCloud cloud = testing::clustered_cloud(rng, 800, spec, 10);
  const auto labels = testing::random_labels(rng, cloud.size(), 0.0);
  std::vector<double> rows(cloud.size() * kNumClasses, 0.0);
  for (std::size_t k = 0; k < cloud.size(); ++k) rows[k * kNumClasses + labels[k].index()] = 1.0;
  cloud.set_probabilities(rows);
  const SemanticGrid h = encode_histogram(cloud, spec);
  const SemanticGrid s = encode_summed(cloud, spec);
  CHECK(h.mass == s.mass);
  CHECK(h.count == s.count);
}

TEST_CASE("permuting points leaves every encoding unchanged") {
  std::mt19937_64 rng(31);
  const GridSpec spec{-2.0, -2.0, 0.5, 8, 8};
  PointCloud cloud = testing::clustered_cloud(rng, 2000, spec, 6);
  cloud.set_probabilities(testing::random_probabilities(rng, cloud.size()));
  std::vector<std::size_t> perm(cloud.size());
  for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Point> pts;
  std::vector<double> rows;
  for (std::size_t k : perm) {
    pts.push_back(cloud[k]);
    const auto r = cloud.probability_row(k);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  PointCloud other(pts);
  other.set_probabilities(rows);
  CHECK(encode_histogram(cloud, spec) == encode_histogram(other, spec));
  const auto a = encode_summed(cloud, spec), b = encode_summed(other, spec);
  for (std::size_t k = 0; k < a.mass.size(); ++k) CHECK(std::abs(a.mass[k] - b.mass[k]) <= 1e-12);
  CHECK(encode_argmax(encode_histogram(cloud, spec)) == encode_argmax(encode_histogram(other, spec)));
}

TEST_CASE("synthetic probabilities") {
  std::mt19937_64 rng(2);
  const auto truth = testing::random_labels(rng, 10000, 0.0);
  SUBCASE("flip rate is honored") {
    const auto rows = synth_probabilities(truth, 0.2, 3.0, 77);
    std::size_t hit = 0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      const std::span<const double> r(rows.data() + k * kNumClasses, kNumClasses);
      double s = 0.0;
      for (double v : r) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) <= 1e-9);
      hit += argmax_lowest(r) == truth[k].index();
    }
    CHECK(std::abs(hit / 10000.0 - 0.8) <= 0.02);
  }
  SUBCASE("no flips and strong concentration give one-hot truth") {
    const auto rows = synth_probabilities(truth, 0.0, 60.0, 1);
    for (std::size_t k = 0; k < truth.size(); ++k) {
      CHECK(rows[k * kNumClasses + static_cast<std::size_t>(truth[k].index())] > 1.0 - 1e-12);
    }
  }
  SUBCASE("deterministic per seed") {
    CHECK(synth_probabilities(truth, 0.1, 2.0, 5) == synth_probabilities(truth, 0.1, 2.0, 5));
    CHECK(synth_probabilities(truth, 0.1, 2.0, 5) != synth_probabilities(truth, 0.1, 2.0, 6));
  }
  SUBCASE("bad parameters") {
    CHECK_THROWS_AS(synth_probabilities(truth, 1.0, 2.0, 0), Error);
    CHECK_THROWS_AS(synth_probabilities(truth, 0.1, 0.0, 0), Error);
  }
}

TEST_CASE("encoding names") {
  CHECK(encoding_from_name("hist") == SemanticEncoding::kHistogram);
  CHECK(encoding_from_name("sum") == SemanticEncoding::kSummed);
  CHECK(encoding_name(SemanticEncoding::kMean) == "mean");
  CHECK_FALSE(encoding_from_name("median").has_value());
}

}  // TEST_SUITE
