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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "semgrid/core.hpp"

namespace semgrid {

// Rows are ground truth, columns predictions. Column kNone collects cells the
// prediction left as ignore; they count as false negatives of the row class.
class ConfusionMatrix {
 public:
  static constexpr int kNone = kNumClasses;
  static constexpr int kColumns = kNumClasses + 1;

  std::uint64_t at(int gt, int pred) const {
    return counts_[static_cast<std::size_t>(gt * kColumns + pred)];
  }
  void add(int gt, int pred, std::uint64_t n = 1) {
    counts_[static_cast<std::size_t>(gt * kColumns + pred)] += n;
  }
  std::uint64_t total() const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::array<std::uint64_t, kNumClasses * kColumns> counts_{};
};

// Adds every cell whose ground truth is not ignore.
void accumulate(ConfusionMatrix& cm, const LabelGrid& prediction, const LabelGrid& ground_truth);

using ClassIou = std::array<std::optional<double>, kNumClasses>;

// nullopt where the class has no true positives, false positives or false
// negatives.
ClassIou iou_per_class(const ConfusionMatrix& cm);

// Mean over defined entries; throws when none is defined.
double mean_iou(std::span<const std::optional<double>> ious);

std::string report_text(const ConfusionMatrix& cm);
std::string report_json(const ConfusionMatrix& cm);

}  // namespace semgrid
