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

#include "semgrid/semantic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "semgrid/error.hpp"

namespace semgrid {

std::string_view encoding_name(SemanticEncoding e) {
  switch (e) {
    case SemanticEncoding::kHistogram:
      return "hist";
    case SemanticEncoding::kArgmax:
      return "argmax";
    case SemanticEncoding::kSummed:
      return "sum";
    case SemanticEncoding::kMean:
      return "mean";
  }
  return "unknown";
}

std::optional<SemanticEncoding> encoding_from_name(std::string_view name) {
  for (auto e : {SemanticEncoding::kHistogram, SemanticEncoding::kArgmax,
                 SemanticEncoding::kSummed, SemanticEncoding::kMean}) {
    if (encoding_name(e) == name) return e;
  }
  return std::nullopt;
}

std::vector<Label> hard_predictions(const PointCloud& cloud) {
  if (cloud.has_probabilities()) {
    std::vector<Label> out(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      out[i] = static_cast<ClassId>(argmax_lowest(cloud.probability_row(i)));
    }
    return out;
  }
  if (cloud.has_labels()) {
    return std::vector<Label>(cloud.labels().begin(), cloud.labels().end());
  }
  throw Error(ErrorCode::kInvalidArgument, "cloud carries neither labels nor probabilities");
}

SemanticGrid encode_histogram(const PointCloud& cloud, const GridSpec& spec) {
  spec.validate();
  const std::vector<Label> predictions = hard_predictions(cloud);
  SemanticGrid grid(spec, SemanticEncoding::kHistogram);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (predictions[i].is_ignore()) continue;
    const auto c = cell_index(cloud[i].x, cloud[i].y, spec);
    if (!c) continue;
    const std::size_t k = spec.offset(*c);
    grid.mass[k * kNumClasses + static_cast<std::size_t>(predictions[i].index())] += 1.0;
    ++grid.count[k];
  }
  return grid;
}

ArgmaxGrid encode_argmax(const SemanticGrid& histogram) {
  if (histogram.encoding != SemanticEncoding::kHistogram) {
    throw Error(ErrorCode::kInvalidArgument, "argmax encoding needs a histogram grid");
  }
  ArgmaxGrid out(histogram.spec);
  for (std::size_t k = 0; k < histogram.count.size(); ++k) {
    if (histogram.count[k] == 0) continue;
    out.labels[k] = static_cast<ClassId>(argmax_lowest(histogram.cell(k)));
  }
  return out;
}

SemanticGrid encode_summed(const PointCloud& cloud, const GridSpec& spec) {
  spec.validate();
  if (!cloud.has_probabilities()) {
    throw Error(ErrorCode::kInvalidArgument, "summed encoding needs per-point probabilities");
  }
  SemanticGrid grid(spec, SemanticEncoding::kSummed);
  // Neumaier compensation terms, folded in once at the end.
  std::vector<double> compensation(grid.mass.size(), 0.0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto c = cell_index(cloud[i].x, cloud[i].y, spec);
    if (!c) continue;
    const std::size_t k = spec.offset(*c);
    const auto row = cloud.probability_row(i);
    for (std::size_t ch = 0; ch < kNumClasses; ++ch) {
      double& sum = grid.mass[k * kNumClasses + ch];
      const double v = row[ch];
      const double t = sum + v;
      compensation[k * kNumClasses + ch] +=
          std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
      sum = t;
    }
    ++grid.count[k];
  }
  for (std::size_t m = 0; m < grid.mass.size(); ++m) grid.mass[m] += compensation[m];
  return grid;
}

SemanticGrid encode_mean(const SemanticGrid& summed) {
  if (summed.encoding != SemanticEncoding::kSummed) {
    throw Error(ErrorCode::kInvalidArgument, "mean encoding needs a summed grid");
  }
  SemanticGrid out = summed;
  out.encoding = SemanticEncoding::kMean;
  for (std::size_t k = 0; k < out.count.size(); ++k) {
    if (out.count[k] == 0) continue;
    for (std::size_t ch = 0; ch < kNumClasses; ++ch) {
      out.mass[k * kNumClasses + ch] /= out.count[k];
    }
  }
  return out;
}

std::vector<double> synth_probabilities(std::span<const Label> truth, double flip_rate,
                                        double concentration, std::uint64_t seed) {
  if (!(flip_rate >= 0.0 && flip_rate < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "flip rate must lie in [0, 1)");
  }
  if (!(concentration > 0.0) || !std::isfinite(concentration)) {
    throw Error(ErrorCode::kInvalidArgument, "concentration must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> other_class(0, kNumClasses - 2);
  std::uniform_int_distribution<int> any_class(0, kNumClasses - 1);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<double> rows(truth.size() * kNumClasses);
  std::array<double, kNumClasses> logits{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    int chosen;
    const double u = unit(rng);
    if (truth[i].is_ignore()) {
      chosen = any_class(rng);
    } else if (u < flip_rate) {
      chosen = other_class(rng);
      if (chosen >= truth[i].index()) ++chosen;
    } else {
      chosen = truth[i].index();
    }
    for (double& l : logits) l = noise(rng);
    const auto top = std::max_element(logits.begin(), logits.end());
    std::swap(*top, logits[static_cast<std::size_t>(chosen)]);
    logits[static_cast<std::size_t>(chosen)] += concentration;

    const double peak = logits[static_cast<std::size_t>(chosen)];
    double total = 0.0;
    for (double& l : logits) {
      l = std::exp(l - peak);
      total += l;
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) rows[i * kNumClasses + c] = logits[c] / total;
  }
  return rows;
}

}  // namespace semgrid
