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
#include <span>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "semgrid/core.hpp"
#include "semgrid/gridmap.hpp"
#include "semgrid/semantic.hpp"

namespace semgrid {

// Per-cell feature stack. features has one column per cell (storage order of
// GridSpec::offset) and one row per channel.
struct FusionInput {
  GridSpec spec;
  std::vector<std::string> channel_names;
  Eigen::MatrixXd features;
  std::vector<std::uint8_t> valid;  // cell carries data in at least one channel

  int channels() const { return static_cast<int>(features.rows()); }
  std::size_t cells() const { return static_cast<std::size_t>(features.cols()); }
};

// Channels: the five geometric layers in stack order, then the semantic
// channels ("hist/<class>", "sum/<class>" or "mean/<class>"). Invalid
// geometric cells are zero; no normalization is applied.
FusionInput assemble_early_fusion_input(const GridMapStack& stack, const SemanticGrid& semantic);

// Single "argmax" channel holding class index + 1, 0 for cells without points.
FusionInput assemble_early_fusion_input(const GridMapStack& stack, const ArgmaxGrid& argmax);

// Two per-cell linear maps with a rectifier in between:
// logits = W2 relu(W1 s(x) + b1) + b2, where s(x) = (x - input_offset) .* input_scale.
struct LateFusionHead {
  Eigen::MatrixXd w1;  // hidden x inputs
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // classes x hidden
  Eigen::VectorXd b2;
  Eigen::VectorXd input_offset;  // zeros unless standardized
  Eigen::VectorXd input_scale;   // ones unless standardized

  static constexpr int kDefaultHidden = 32;

  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static LateFusionHead initialize(int inputs, int hidden, std::uint64_t seed);

  int inputs() const { return static_cast<int>(w1.cols()); }
  int hidden() const { return static_cast<int>(w1.rows()); }

  // Trainable parameters in the order w1 (row-major), b1, w2 (row-major), b2.
  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);

  void validate() const;
};

// kNumClasses x cells.
Eigen::MatrixXd forward(const LateFusionHead& head, const FusionInput& input);

struct LossAndGradient {
  double loss = 0.0;             // mean cross-entropy over evaluated cells
  std::size_t cells = 0;         // evaluated (non-ignore) cells
  std::vector<double> gradient;  // same order as LateFusionHead::parameters()
};

LossAndGradient loss_and_gradient(const LateFusionHead& head, const FusionInput& input,
                                  const LabelGrid& ground_truth);

struct TrainingExample {
  FusionInput input;
  LabelGrid ground_truth;
};

// Batch-mean loss and gradient over several examples.
LossAndGradient loss_and_gradient(const LateFusionHead& head,
                                  std::span<const TrainingExample* const> batch);

struct TrainOptions {
  int epochs = 200;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
  // Examples per gradient step; 0 means the whole dataset (plain gradient
  // descent). The seed shuffles example order when batching.
  std::size_t batch_size = 0;
  // Fit per-channel mean/std on valid cells before training.
  bool standardize = false;
};

struct TrainResult {
  LateFusionHead head;
  std::vector<double> loss_trace;  // one entry per epoch, before its update
};

TrainResult train(LateFusionHead head, std::span<const TrainingExample> dataset,
                  const TrainOptions& options);

// Argmax of the logits with lowest-class tie-break; cells without data in
// any channel are ignore.
LabelGrid predict(const LateFusionHead& head, const FusionInput& input);

}  // namespace semgrid
