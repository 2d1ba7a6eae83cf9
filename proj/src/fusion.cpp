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

#include "semgrid/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "semgrid/error.hpp"

namespace semgrid {
namespace {

FusionInput geometric_channels(const GridMapStack& stack, int extra_channels) {
  const GridSpec& spec = stack.spec();
  FusionInput input;
  input.spec = spec;
  input.features.setZero(5 + extra_channels, static_cast<Eigen::Index>(spec.cell_count()));
  input.valid.assign(spec.cell_count(), 0);
  const auto layers = stack.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const GridLayer& layer = *layers[l];
    if (!(layer.spec == spec)) {
      throw Error(ErrorCode::kDimensionMismatch, "stack layers disagree on grid spec");
    }
    input.channel_names.emplace_back(GridMapStack::kLayerNames[l]);
    for (std::size_t k = 0; k < spec.cell_count(); ++k) {
      if (!layer.valid[k]) continue;
      input.features(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = layer.values[k];
      input.valid[k] = 1;
    }
  }
  return input;
}

// Cells with a ground-truth class, and their targets.
struct Targets {
  std::vector<Eigen::Index> cells;
  std::vector<int> classes;
};

Targets collect_targets(const FusionInput& input, const LabelGrid& gt) {
  if (!(gt.spec == input.spec) || gt.labels.size() != input.cells()) {
    throw Error(ErrorCode::kDimensionMismatch, "ground truth and input grids differ");
  }
  Targets t;
  for (std::size_t k = 0; k < gt.labels.size(); ++k) {
    if (gt.labels[k].is_ignore()) continue;
    t.cells.push_back(static_cast<Eigen::Index>(k));
    t.classes.push_back(gt.labels[k].index());
  }
  return t;
}

void check_dimensions(const LateFusionHead& head, const FusionInput& input) {
  if (head.inputs() != input.channels()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "head expects " + std::to_string(head.inputs()) + " channels, input has " +
                    std::to_string(input.channels()));
  }
}

Eigen::MatrixXd standardized(const LateFusionHead& head, const Eigen::MatrixXd& x) {
  return ((x.colwise() - head.input_offset).array().colwise() * head.input_scale.array())
      .matrix();
}

}  // namespace

FusionInput assemble_early_fusion_input(const GridMapStack& stack, const SemanticGrid& semantic) {
  if (!(semantic.spec == stack.spec())) {
    throw Error(ErrorCode::kDimensionMismatch, "semantic grid and stack differ in grid spec");
  }
  if (semantic.encoding == SemanticEncoding::kArgmax) {
    throw Error(ErrorCode::kInvalidArgument, "argmax features are passed as an ArgmaxGrid");
  }
  FusionInput input = geometric_channels(stack, kNumClasses);
  const std::string prefix = std::string(encoding_name(semantic.encoding)) + "/";
  for (int c = 0; c < kNumClasses; ++c) {
    input.channel_names.push_back(prefix + std::string(class_name(static_cast<ClassId>(c))));
  }
  for (std::size_t k = 0; k < input.cells(); ++k) {
    const auto mass = semantic.cell(k);
    for (int c = 0; c < kNumClasses; ++c) {
      input.features(5 + c, static_cast<Eigen::Index>(k)) = mass[static_cast<std::size_t>(c)];
    }
    if (semantic.count[k] > 0) input.valid[k] = 1;
  }
  return input;
}

FusionInput assemble_early_fusion_input(const GridMapStack& stack, const ArgmaxGrid& argmax) {
  if (!(argmax.spec == stack.spec())) {
    throw Error(ErrorCode::kDimensionMismatch, "argmax grid and stack differ in grid spec");
  }
  FusionInput input = geometric_channels(stack, 1);
  input.channel_names.emplace_back("argmax");
  for (std::size_t k = 0; k < input.cells(); ++k) {
    const Label label = argmax.labels[k];
    if (label.is_ignore()) continue;
    input.features(5, static_cast<Eigen::Index>(k)) = label.index() + 1;
    input.valid[k] = 1;
  }
  return input;
}

// ---------------------------------------------------------------------------
// LateFusionHead

LateFusionHead LateFusionHead::initialize(int inputs, int hidden, std::uint64_t seed) {
  if (inputs < 1 || hidden < 1) {
    throw Error(ErrorCode::kInvalidArgument, "head needs inputs, hidden >= 1");
  }
  std::mt19937_64 rng(seed);
  const auto fill = [&](Eigen::MatrixXd& m, int fan_in, int fan_out) {
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
    }
  };
  LateFusionHead head;
  head.w1.resize(hidden, inputs);
  head.w2.resize(kNumClasses, hidden);
  fill(head.w1, inputs, hidden);
  fill(head.w2, hidden, kNumClasses);
  head.b1 = Eigen::VectorXd::Zero(hidden);
  head.b2 = Eigen::VectorXd::Zero(kNumClasses);
  head.input_offset = Eigen::VectorXd::Zero(inputs);
  head.input_scale = Eigen::VectorXd::Ones(inputs);
  return head;
}

std::size_t LateFusionHead::parameter_count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
}

std::vector<double> LateFusionHead::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (Eigen::Index r = 0; r < w1.rows(); ++r) {
    for (Eigen::Index c = 0; c < w1.cols(); ++c) out.push_back(w1(r, c));
  }
  out.insert(out.end(), b1.data(), b1.data() + b1.size());
  for (Eigen::Index r = 0; r < w2.rows(); ++r) {
    for (Eigen::Index c = 0; c < w2.cols(); ++c) out.push_back(w2(r, c));
  }
  out.insert(out.end(), b2.data(), b2.data() + b2.size());
  return out;
}

void LateFusionHead::set_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "parameter vector has wrong length");
  }
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < w1.rows(); ++r) {
    for (Eigen::Index c = 0; c < w1.cols(); ++c) w1(r, c) = values[i++];
  }
  for (Eigen::Index r = 0; r < b1.size(); ++r) b1(r) = values[i++];
  for (Eigen::Index r = 0; r < w2.rows(); ++r) {
    for (Eigen::Index c = 0; c < w2.cols(); ++c) w2(r, c) = values[i++];
  }
  for (Eigen::Index r = 0; r < b2.size(); ++r) b2(r) = values[i++];
}

void LateFusionHead::validate() const {
  const auto hidden_units = w1.rows();
  if (w1.cols() < 1 || hidden_units < 1 || b1.size() != hidden_units ||
      w2.rows() != kNumClasses || w2.cols() != hidden_units || b2.size() != kNumClasses ||
      input_offset.size() != w1.cols() || input_scale.size() != w1.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "late fusion head has inconsistent shapes");
  }
  if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !b2.allFinite() ||
      !input_offset.allFinite() || !input_scale.allFinite()) {
    throw Error(ErrorCode::kNumeric, "late fusion head has non-finite parameters");
  }
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd forward(const LateFusionHead& head, const FusionInput& input) {
  head.validate();
  check_dimensions(head, input);
  const Eigen::MatrixXd hidden =
      ((head.w1 * standardized(head, input.features)).colwise() + head.b1).cwiseMax(0.0);
  return (head.w2 * hidden).colwise() + head.b2;
}

LossAndGradient loss_and_gradient(const LateFusionHead& head,
                                  std::span<const TrainingExample* const> batch) {
  head.validate();
  LossAndGradient out;
  Eigen::MatrixXd g_w1 = Eigen::MatrixXd::Zero(head.w1.rows(), head.w1.cols());
  Eigen::VectorXd g_b1 = Eigen::VectorXd::Zero(head.b1.size());
  Eigen::MatrixXd g_w2 = Eigen::MatrixXd::Zero(head.w2.rows(), head.w2.cols());
  Eigen::VectorXd g_b2 = Eigen::VectorXd::Zero(head.b2.size());
  double loss_sum = 0.0;

  for (const TrainingExample* example : batch) {
    check_dimensions(head, example->input);
    const Targets targets = collect_targets(example->input, example->ground_truth);
    const auto n = static_cast<Eigen::Index>(targets.cells.size());
    if (n == 0) continue;
    Eigen::MatrixXd x(example->input.features.rows(), n);
    for (Eigen::Index k = 0; k < n; ++k) x.col(k) = example->input.features.col(targets.cells[static_cast<std::size_t>(k)]);
    x = standardized(head, x);

    const Eigen::MatrixXd pre = (head.w1 * x).colwise() + head.b1;
    const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
    Eigen::MatrixXd logits = (head.w2 * hidden).colwise() + head.b2;

    // Softmax in place; logits becomes dLoss/dLogits (before 1/N scaling).
    for (Eigen::Index k = 0; k < n; ++k) {
      auto col = logits.col(k);
      const double peak = col.maxCoeff();
      const double log_norm = peak + std::log((col.array() - peak).exp().sum());
      const int target = targets.classes[static_cast<std::size_t>(k)];
      loss_sum += log_norm - col(target);
      col = (col.array() - log_norm).exp().matrix();
      col(target) -= 1.0;
    }
    const Eigen::MatrixXd d_hidden =
        (head.w2.transpose() * logits).cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    g_w2.noalias() += logits * hidden.transpose();
    g_b2 += logits.rowwise().sum();
    g_w1.noalias() += d_hidden * x.transpose();
    g_b1 += d_hidden.rowwise().sum();
    out.cells += static_cast<std::size_t>(n);
  }
  if (out.cells == 0) {
    throw Error(ErrorCode::kInvalidArgument, "loss needs at least one non-ignore cell");
  }
  const double scale = 1.0 / static_cast<double>(out.cells);
  out.loss = loss_sum * scale;

  LateFusionHead gradient_shape = head;
  gradient_shape.w1 = g_w1 * scale;
  gradient_shape.b1 = g_b1 * scale;
  gradient_shape.w2 = g_w2 * scale;
  gradient_shape.b2 = g_b2 * scale;
  out.gradient = gradient_shape.parameters();
  return out;
}

LossAndGradient loss_and_gradient(const LateFusionHead& head, const FusionInput& input,
                                  const LabelGrid& ground_truth) {
  const TrainingExample example{input, ground_truth};
  const TrainingExample* batch[] = {&example};
  return loss_and_gradient(head, batch);
}

TrainResult train(LateFusionHead head, std::span<const TrainingExample> dataset,
                  const TrainOptions& options) {
  if (dataset.empty()) throw Error(ErrorCode::kInvalidArgument, "training needs data");
  if (options.epochs < 0 || !std::isfinite(options.learning_rate)) {
    throw Error(ErrorCode::kInvalidArgument, "epochs and learning rate must be valid");
  }
  head.validate();

  if (options.standardize) {
    const auto channels = head.inputs();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(channels);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(channels);
    double count = 0.0;
    for (const TrainingExample& ex : dataset) {
      check_dimensions(head, ex.input);
      for (std::size_t k = 0; k < ex.input.cells(); ++k) {
        if (!ex.input.valid[k]) continue;
        const auto col = ex.input.features.col(static_cast<Eigen::Index>(k));
        sum += col;
        sum_sq += col.cwiseProduct(col);
        count += 1.0;
      }
    }
    if (count > 0.0) {
      const Eigen::VectorXd mean = sum / count;
      const Eigen::VectorXd var = (sum_sq / count - mean.cwiseProduct(mean)).cwiseMax(0.0);
      head.input_offset = mean;
      head.input_scale = var.unaryExpr([](double v) { return v > 1e-12 ? 1.0 / std::sqrt(v) : 1.0; });
    }
  }

  std::vector<const TrainingExample*> order(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) order[i] = &dataset[i];
  const std::size_t batch_size =
      options.batch_size == 0 ? dataset.size() : std::min(options.batch_size, dataset.size());
  std::mt19937_64 rng(options.seed);

  TrainResult result;
  std::vector<double> params = head.parameters();
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    if (batch_size < dataset.size()) std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t epoch_cells = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      const auto batch = std::span<const TrainingExample* const>(order).subspan(start, stop - start);
      const LossAndGradient step = loss_and_gradient(head, batch);
      if (!std::isfinite(step.loss)) {
        std::ostringstream msg;
        msg << "training diverged at epoch " << epoch << ": loss " << step.loss
            << ", learning rate " << options.learning_rate;
        throw Error(ErrorCode::kNumeric, msg.str());
      }
      epoch_loss += step.loss * static_cast<double>(step.cells);
      epoch_cells += step.cells;
      for (std::size_t p = 0; p < params.size(); ++p) {
        params[p] -= options.learning_rate * step.gradient[p];
      }
      head.set_parameters(params);
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(epoch_cells));
  }
  result.head = std::move(head);
  return result;
}

LabelGrid predict(const LateFusionHead& head, const FusionInput& input) {
  const Eigen::MatrixXd logits = forward(head, input);
  LabelGrid out(input.spec);
  for (std::size_t k = 0; k < input.cells(); ++k) {
    if (!input.valid[k]) continue;
    const auto col = logits.col(static_cast<Eigen::Index>(k));
    out.labels[k] = static_cast<ClassId>(
        argmax_lowest(std::span<const double>(col.data(), static_cast<std::size_t>(col.size()))));
  }
  return out;
}

}  // namespace semgrid
