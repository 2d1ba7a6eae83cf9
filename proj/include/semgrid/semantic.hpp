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

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "semgrid/core.hpp"

namespace semgrid {

enum class SemanticEncoding {
  kHistogram,  // per-class count of hard predictions
  kArgmax,     // most frequent hard prediction
  kSummed,     // per-class sum of probabilities
  kMean,       // per-class mean of probabilities
};

std::string_view encoding_name(SemanticEncoding e);  // "hist", "argmax", "sum", "mean"
std::optional<SemanticEncoding> encoding_from_name(std::string_view name);

// Per-cell class mass. mass is cell-major: mass[offset * kNumClasses + class].
struct SemanticGrid {
  GridSpec spec;
  SemanticEncoding encoding = SemanticEncoding::kHistogram;
  std::vector<double> mass;
  std::vector<std::uint32_t> count;

  SemanticGrid() = default;
  SemanticGrid(const GridSpec& s, SemanticEncoding e)
      : spec(s), encoding(e), mass(s.cell_count() * kNumClasses, 0.0), count(s.cell_count(), 0) {}

  std::span<const double> cell(std::size_t offset) const {
    return std::span<const double>(mass).subspan(offset * kNumClasses, kNumClasses);
  }
  friend bool operator==(const SemanticGrid&, const SemanticGrid&) = default;
};

// Argmax of each probability row when the cloud carries probabilities,
// otherwise its labels. Throws if it has neither.
std::vector<Label> hard_predictions(const PointCloud& cloud);

// Ignore predictions contribute to neither mass nor count.
SemanticGrid encode_histogram(const PointCloud& cloud, const GridSpec& spec);

// Lowest class wins ties; cells without points are ignore.
ArgmaxGrid encode_argmax(const SemanticGrid& histogram);

// Uses compensated summation so the result does not depend on point order
// beyond the last bits.
SemanticGrid encode_summed(const PointCloud& cloud, const GridSpec& spec);

SemanticGrid encode_mean(const SemanticGrid& summed);

// Stand-in for network softmax outputs. With probability 1 - flip_rate the
// row's argmax is the true class, otherwise a uniformly drawn other class
// (ignore points draw from all classes). Row = softmax(concentration *
// onehot(chosen) + N(0, 1) noise), with the largest noise draw moved onto the
// chosen class so the argmax is guaranteed.
std::vector<double> synth_probabilities(std::span<const Label> truth, double flip_rate,
                                        double concentration, std::uint64_t seed);

}  // namespace semgrid
