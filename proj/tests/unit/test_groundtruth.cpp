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

#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "semgrid/error.hpp"
#include "semgrid/groundtruth.hpp"

using namespace semgrid;

namespace {

const GridSpec kSpec{-10.0, -10.0, 0.5, 40, 40};

PointCloud labeled_cloud(std::mt19937_64& rng, std::size_t n) {
  PointCloud c = testing::clustered_cloud(rng, n, kSpec, 60);
  c.set_labels(testing::random_labels(rng, n, 0.1));
  return c;
}

bool is_dynamic(Label l) {
  return !l.is_ignore() && default_dynamic_classes().count(l.class_id()) > 0;
}

}  // namespace

TEST_SUITE("groundtruth") {

TEST_CASE("sparse hand examples") {
  PointCloud cloud({{0.1, 0.1, 0, 0}, {0.2, 0.2, 0, 0}, {0.3, 0.3, 0, 0}, {2.1, 2.1, 0, 0}});
  cloud.set_labels({ClassId::kRoad, ClassId::kRoad, ClassId::kSidewalk, Label::ignore()});
  const LabelGrid g = sparse_ground_truth(cloud, kSpec);
  CHECK(g.at(*cell_index(0.1, 0.1, kSpec)) == Label(ClassId::kRoad));
  CHECK(g.at(*cell_index(2.1, 2.1, kSpec)).is_ignore());
  CHECK(g.at({0, 0}).is_ignore());
  CHECK_THROWS_AS(sparse_ground_truth(PointCloud({{0, 0, 0, 0}}), kSpec), Error);
}

TEST_CASE("sparse equals brute-force majority") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud cloud = labeled_cloud(rng, 3000);
    const LabelGrid g = sparse_ground_truth(cloud, kSpec);
    LabelGrid expected(kSpec);
    for (const auto& [key, s] : testing::brute_force_cells(cloud, kSpec)) {
      std::vector<Label> members;
      for (std::size_t p : s.members) members.push_back(cloud.labels()[p]);
      expected.at({static_cast<std::int32_t>(key.first), static_cast<std::int32_t>(key.second)}) =
          testing::majority(members);
    }
    CHECK(g == expected);
  }
}

TEST_CASE("window zero equals sparse") {
  std::mt19937_64 rng(15);
  ScanSequence seq;
  for (int k = 0; k < 5; ++k) {
    seq.scans.push_back({labeled_cloud(rng, 2000), Pose::from_yaw(0.3 * k, {1.0 * k, -0.5 * k, 0.1})});
  }
  for (std::size_t ref = 0; ref < 5; ++ref) {
    seq.reference = ref;
    DenseOptions opt;
    opt.window = 0;
    CHECK(dense_ground_truth(seq, kSpec, opt) == sparse_ground_truth(seq.scans[ref].cloud, kSpec));
  }
}

TEST_CASE("static neighbor point lands in the reference frame") {
  ScanSequence seq;
  PointCloud ref({{5.2, 5.2, 0, 0}});
  ref.set_labels({ClassId::kTerrain});
  // Scan 1 sits 2 m ahead; its local (1.3, 0.4) is world (3.3, 0.4).
  PointCloud next({{1.3, 0.4, 0, 0}, {1.3, 2.4, 0, 0}});
  next.set_labels({ClassId::kRoad, ClassId::kVehicle});
  seq.scans.push_back({ref, Pose(Eigen::Matrix3d::Identity(), {0, 0, 0})});
  seq.scans.push_back({next, Pose(Eigen::Matrix3d::Identity(), {2, 0, 0})});
  seq.reference = 0;
  const LabelGrid g = dense_ground_truth(seq, kSpec);
  CHECK(g.at(*cell_index(3.3, 0.4, kSpec)) == Label(ClassId::kRoad));
  CHECK(g.at(*cell_index(3.3, 2.4, kSpec)).is_ignore());  // dynamic, not reference
  seq.reference = 1;
  const LabelGrid h = dense_ground_truth(seq, kSpec);
  CHECK(h.at(*cell_index(1.3, 2.4, kSpec)) == Label(ClassId::kVehicle));
  CHECK(h.at(*cell_index(3.2, 5.2, kSpec)) == Label(ClassId::kTerrain));
}

TEST_CASE("dense laws on random sequences") {
  std::mt19937_64 rng(16);
  ScanSequence seq;
  for (int k = 0; k < 7; ++k) {
    seq.scans.push_back({labeled_cloud(rng, 1500), Pose::from_yaw(0.1 * k, {0.7 * k, 0.2 * k, 0.0})});
  }
  seq.reference = 3;
  const LabelGrid sparse = sparse_ground_truth(seq.scans[3].cloud, kSpec);
  std::vector<LabelGrid> grids;
  for (int w = 0; w <= 4; ++w) {
    DenseOptions opt;
    opt.window = w;
    grids.push_back(dense_ground_truth(seq, kSpec, opt));
  }
  // Monotone coverage.
  for (std::size_t w = 1; w < grids.size(); ++w) {
    for (std::size_t k = 0; k < kSpec.cell_count(); ++k) {
      if (!grids[w - 1].labels[k].is_ignore()) CHECK_FALSE(grids[w].labels[k].is_ignore());
    }
  }
  // Dynamic classes only where the reference scan has them.
  LabelGrid ref_dynamic(kSpec);
  const auto& rc = seq.scans[3].cloud;
  std::vector<std::vector<bool>> has(kSpec.cell_count(), std::vector<bool>(kNumClasses, false));
  for (std::size_t p = 0; p < rc.size(); ++p) {
    const auto c = cell_index(rc[p].x, rc[p].y, kSpec);
    if (c && !rc.labels()[p].is_ignore()) has[kSpec.offset(*c)][static_cast<std::size_t>(rc.labels()[p].index())] = true;
  }
  for (const LabelGrid& g : grids) {
    for (std::size_t k = 0; k < kSpec.cell_count(); ++k) {
      if (is_dynamic(g.labels[k])) CHECK(has[k][static_cast<std::size_t>(g.labels[k].index())]);
    }
  }
  CHECK(grids[0] == sparse);
}

TEST_CASE("identity poses equal concatenated static points plus reference dynamics") {
  std::mt19937_64 rng(17);
  ScanSequence seq;
  for (int k = 0; k < 4; ++k) seq.scans.push_back({labeled_cloud(rng, 1200), Pose::identity()});
  seq.reference = 1;
  std::vector<Point> pts;
  std::vector<Label> labels;
  for (std::size_t s = 0; s < seq.scans.size(); ++s) {
    const auto& c = seq.scans[s].cloud;
    for (std::size_t p = 0; p < c.size(); ++p) {
      if (s != seq.reference && is_dynamic(c.labels()[p])) continue;
      pts.push_back(c[p]);
      labels.push_back(c.labels()[p]);
    }
  }
  PointCloud merged(pts);
  merged.set_labels(labels);
  CHECK(dense_ground_truth(seq, kSpec) == sparse_ground_truth(merged, kSpec));
}

TEST_CASE("z filter and bad inputs") {
  ScanSequence seq;
  PointCloud c({{0.1, 0.1, 5.0, 0}, {0.1, 0.1, 0.0, 0}, {1.1, 1.1, 0.0, 0}});
  c.set_labels({ClassId::kBuilding, ClassId::kRoad, ClassId::kRoad});
  seq.scans.push_back({c, Pose::identity()});
  PointCloud hi({{0.1, 0.1, 5.0, 0}, {0.1, 0.1, 5.0, 0}});
  hi.set_labels({ClassId::kBuilding, ClassId::kBuilding});
  seq.scans.push_back({hi, Pose::identity()});
  DenseOptions opt;
  CHECK(dense_ground_truth(seq, kSpec, opt).at(*cell_index(0.1, 0.1, kSpec)) == Label(ClassId::kBuilding));
  opt.z_max = 2.0;
  CHECK(dense_ground_truth(seq, kSpec, opt).at(*cell_index(0.1, 0.1, kSpec)) == Label(ClassId::kRoad));
  seq.reference = 5;
  CHECK_THROWS_AS(dense_ground_truth(seq, kSpec), Error);
  seq.reference = 0;
  opt.window = -1;
  CHECK_THROWS_AS(dense_ground_truth(seq, kSpec, opt), Error);
}

}  // TEST_SUITE
