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

#include "semgrid/groundtruth.hpp"

#include <algorithm>

#include "semgrid/error.hpp"

namespace semgrid {

CellVotes::CellVotes(const GridSpec& spec)
    : spec_(spec), votes_(spec.cell_count() * kNumClasses, 0) {
  spec.validate();
}

void CellVotes::add(const PointCloud& cloud, std::span<const Label> labels) {
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (labels[i].is_ignore()) continue;
    const auto c = cell_index(cloud[i].x, cloud[i].y, spec_);
    if (!c) continue;
    ++votes_[spec_.offset(*c) * kNumClasses + static_cast<std::size_t>(labels[i].index())];
  }
}

LabelGrid CellVotes::resolve() const {
  LabelGrid grid(spec_);
  for (std::size_t k = 0; k < grid.labels.size(); ++k) {
    const auto* row = &votes_[k * kNumClasses];
    const auto best = std::max_element(row, row + kNumClasses);  // first maximum
    if (*best == 0) continue;
    grid.labels[k] = static_cast<ClassId>(best - row);
  }
  return grid;
}

LabelGrid sparse_ground_truth(const PointCloud& scan, const GridSpec& spec) {
  if (!scan.has_labels()) {
    throw Error(ErrorCode::kInvalidArgument, "ground truth needs per-point labels");
  }
  CellVotes votes(spec);
  votes.add(scan, scan.labels());
  return votes.resolve();
}

LabelGrid dense_ground_truth(const ScanSequence& sequence, const GridSpec& spec,
                             const DenseOptions& options) {
  if (sequence.scans.empty() || sequence.reference >= sequence.scans.size()) {
    throw Error(ErrorCode::kInvalidArgument, "reference index outside the sequence");
  }
  if (options.window < 0) {
    throw Error(ErrorCode::kInvalidArgument, "window must be nonnegative");
  }
  const auto ref = static_cast<std::ptrdiff_t>(sequence.reference);
  const auto last = static_cast<std::ptrdiff_t>(sequence.scans.size()) - 1;
  const std::ptrdiff_t first_scan = std::max<std::ptrdiff_t>(0, ref - options.window);
  const std::ptrdiff_t last_scan = std::min<std::ptrdiff_t>(last, ref + options.window);
  const Pose world_to_ref = sequence.scans[sequence.reference].pose.inverse();

  CellVotes votes(spec);
  for (std::ptrdiff_t k = first_scan; k <= last_scan; ++k) {
    const Scan& scan = sequence.scans[static_cast<std::size_t>(k)];
    if (!scan.cloud.has_labels()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "scan " + std::to_string(k) + " carries no labels");
    }
    // Reference points stay untransformed so a zero window equals the sparse grid.
    const PointCloud moved =
        k == ref ? scan.cloud : transform_points(scan.cloud, world_to_ref * scan.pose);
    std::vector<Label> labels(scan.cloud.labels().begin(), scan.cloud.labels().end());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i].is_ignore()) continue;
      const double z = moved[i].z;
      if ((options.z_min && z < *options.z_min) || (options.z_max && z > *options.z_max)) {
        labels[i] = Label::ignore();
        continue;
      }
      if (k != ref && options.dynamic_classes.count(labels[i].class_id()) != 0) {
        labels[i] = Label::ignore();
      }
    }
    votes.add(moved, labels);
  }
  return votes.resolve();
}

}  // namespace semgrid
