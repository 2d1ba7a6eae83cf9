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

#include <optional>
#include <set>
#include <vector>

#include "semgrid/core.hpp"

namespace semgrid {

struct Scan {
  PointCloud cloud;  // must carry ground-truth labels
  Pose pose;         // scan frame -> world
};

struct ScanSequence {
  std::vector<Scan> scans;
  std::size_t reference = 0;
};

inline std::set<ClassId> default_dynamic_classes() {
  return {ClassId::kVehicle, ClassId::kTwoWheel, ClassId::kPedestrian};
}

struct DenseOptions {
  int window = 50;  // scans on each side of the reference
  std::set<ClassId> dynamic_classes = default_dynamic_classes();
  // Points outside [z_min, z_max] (reference frame) are dropped when set.
  std::optional<double> z_min;
  std::optional<double> z_max;
};

// Majority vote of non-ignore labels per cell; lowest class wins ties.
LabelGrid sparse_ground_truth(const PointCloud& scan, const GridSpec& spec);

// Aggregates labeled points of scans [reference - window, reference + window]
// in the reference frame, dropping dynamic-class points of every scan but the
// reference, then votes per cell as in sparse_ground_truth.
LabelGrid dense_ground_truth(const ScanSequence& sequence, const GridSpec& spec,
                             const DenseOptions& options = {});

// Per-cell class vote counts; shared by both ground-truth modes.
class CellVotes {
 public:
  explicit CellVotes(const GridSpec& spec);
  void add(const PointCloud& cloud, std::span<const Label> labels);
  LabelGrid resolve() const;

 private:
  GridSpec spec_;
  std::vector<std::uint32_t> votes_;
};

}  // namespace semgrid
