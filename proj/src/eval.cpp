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

#include "semgrid/eval.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "semgrid/error.hpp"

namespace semgrid {

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
  return *this;
}

void accumulate(ConfusionMatrix& cm, const LabelGrid& prediction, const LabelGrid& ground_truth) {
  if (!(prediction.spec == ground_truth.spec) ||
      prediction.labels.size() != ground_truth.labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "prediction and ground truth grids differ in spec");
  }
  for (std::size_t k = 0; k < ground_truth.labels.size(); ++k) {
    const Label gt = ground_truth.labels[k];
    if (gt.is_ignore()) continue;
    const Label pred = prediction.labels[k];
    cm.add(gt.index(), pred.is_ignore() ? ConfusionMatrix::kNone : pred.index());
  }
}

ClassIou iou_per_class(const ConfusionMatrix& cm) {
  ClassIou out;
  for (int c = 0; c < kNumClasses; ++c) {
    const std::uint64_t tp = cm.at(c, c);
    std::uint64_t row = 0, col = 0;
    for (int k = 0; k < ConfusionMatrix::kColumns; ++k) row += cm.at(c, k);
    for (int g = 0; g < kNumClasses; ++g) col += cm.at(g, c);
    const std::uint64_t denominator = tp + (row - tp) + (col - tp);
    if (denominator == 0) continue;
    out[static_cast<std::size_t>(c)] =
        static_cast<double>(tp) / static_cast<double>(denominator);
  }
  return out;
}

double mean_iou(std::span<const std::optional<double>> ious) {
  double sum = 0.0;
  int defined = 0;
  for (const auto& v : ious) {
    if (!v) continue;
    sum += *v;
    ++defined;
  }
  if (defined == 0) {
    throw Error(ErrorCode::kInvalidArgument, "mIoU undefined: no class has a defined IoU");
  }
  return sum / defined;
}

std::string report_text(const ConfusionMatrix& cm) {
  const ClassIou ious = iou_per_class(cm);
  std::ostringstream out;
  char line[96];
  std::snprintf(line, sizeof(line), "%-12s %10s\n", "class", "IoU[%]");
  out << line;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& v = ious[static_cast<std::size_t>(c)];
    const std::string name(class_name(static_cast<ClassId>(c)));
    if (v) {
      std::snprintf(line, sizeof(line), "%-12s %10.2f\n", name.c_str(), *v * 100.0);
    } else {
      std::snprintf(line, sizeof(line), "%-12s %10s\n", name.c_str(), "n/a");
    }
    out << line;
  }
  bool any = false;
  for (const auto& v : ious) any = any || v.has_value();
  if (any) {
    std::snprintf(line, sizeof(line), "%-12s %10.2f\n", "mIoU", mean_iou(ious) * 100.0);
  } else {
    std::snprintf(line, sizeof(line), "%-12s %10s\n", "mIoU", "n/a");
  }
  out << line;
  std::snprintf(line, sizeof(line), "%-12s %10llu\n", "cells",
                static_cast<unsigned long long>(cm.total()));
  out << line;
  return out.str();
}

std::string report_json(const ConfusionMatrix& cm) {
  const ClassIou ious = iou_per_class(cm);
  nlohmann::ordered_json doc;
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  bool any = false;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& v = ious[static_cast<std::size_t>(c)];
    per_class[std::string(class_name(static_cast<ClassId>(c)))] =
        v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    any = any || v.has_value();
  }
  doc["iou"] = per_class;
  doc["miou"] = any ? nlohmann::ordered_json(mean_iou(ious)) : nlohmann::ordered_json(nullptr);
  doc["cells"] = cm.total();
  nlohmann::ordered_json matrix = nlohmann::ordered_json::array();
  for (int g = 0; g < kNumClasses; ++g) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int p = 0; p < ConfusionMatrix::kColumns; ++p) row.push_back(cm.at(g, p));
    matrix.push_back(row);
  }
  doc["confusion"] = matrix;
  return doc.dump(2) + "\n";
}

}  // namespace semgrid
