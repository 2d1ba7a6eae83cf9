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

// Independent reference implementations and fixture generators shared by the
// unit and acceptance suites.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "semgrid/core.hpp"
#include "semgrid/fusion.hpp"
#include "semgrid/gridmap.hpp"

namespace semgrid::testing {

// ---------------------------------------------------------------- generators

inline PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, const GridSpec& spec,
                               double margin = 1.0) {
  std::uniform_real_distribution<double> ux(spec.x_min - margin, spec.x_max() + margin);
  std::uniform_real_distribution<double> uy(spec.y_min - margin, spec.y_max() + margin);
  std::uniform_real_distribution<double> uz(-3.0, 4.0);
  std::uniform_real_distribution<double> ui(0.0, 1.0);
  std::vector<Point> pts(n);
  for (auto& p : pts) p = {ux(rng), uy(rng), uz(rng), ui(rng)};
  return PointCloud(std::move(pts));
}

// Points clustered on few cells so cells receive several points.
inline PointCloud clustered_cloud(std::mt19937_64& rng, std::size_t n, const GridSpec& spec,
                                  int cells) {
  std::uniform_int_distribution<std::int32_t> ui(0, static_cast<std::int32_t>(spec.n_x) - 1);
  std::uniform_int_distribution<std::int32_t> uj(0, static_cast<std::int32_t>(spec.n_y) - 1);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  std::uniform_real_distribution<double> uz(-2.0, 3.0);
  std::vector<CellIndex> centers(static_cast<std::size_t>(cells));
  for (auto& c : centers) c = {ui(rng), uj(rng)};
  std::uniform_int_distribution<std::size_t> pick(0, centers.size() - 1);
  std::vector<Point> pts(n);
  for (auto& p : pts) {
    const CellIndex c = centers[pick(rng)];
    p.x = spec.x_min + (c.i + 0.02 + 0.96 * frac(rng)) * spec.cell_size;
    p.y = spec.y_min + (c.j + 0.02 + 0.96 * frac(rng)) * spec.cell_size;
    p.z = uz(rng);
    p.intensity = frac(rng);
  }
  return PointCloud(std::move(pts));
}

inline std::vector<Label> random_labels(std::mt19937_64& rng, std::size_t n,
                                        double ignore_rate = 0.1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> c(0, kNumClasses - 1);
  std::vector<Label> out(n);
  for (auto& l : out) l = u(rng) < ignore_rate ? Label::ignore() : Label(static_cast<ClassId>(c(rng)));
  return out;
}

inline std::vector<double> random_probabilities(std::mt19937_64& rng, std::size_t n) {
  std::gamma_distribution<double> g(0.5, 1.0);
  std::vector<double> rows(n * kNumClasses);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int c = 0; c < kNumClasses; ++c) s += rows[i * kNumClasses + c] = g(rng) + 1e-9;
    for (int c = 0; c < kNumClasses; ++c) rows[i * kNumClasses + c] /= s;
  }
  return rows;
}

// ------------------------------------------------------ per-cell brute force

struct CellStats {
  double z_max = -std::numeric_limits<double>::infinity();
  double z_min = std::numeric_limits<double>::infinity();
  double intensity_sum = 0.0;
  std::size_t n = 0;
  std::vector<std::size_t> members;
};

// Groups points by the floor formula directly.
inline std::map<std::pair<long, long>, CellStats> brute_force_cells(const PointCloud& cloud,
                                                                     const GridSpec& spec) {
  std::map<std::pair<long, long>, CellStats> cells;
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    const Point& p = cloud[k];
    const long i = static_cast<long>(std::floor((p.x - spec.x_min) / spec.cell_size));
    const long j = static_cast<long>(std::floor((p.y - spec.y_min) / spec.cell_size));
    if (i < 0 || j < 0 || i >= static_cast<long>(spec.n_x) || j >= static_cast<long>(spec.n_y)) {
      continue;
    }
    CellStats& s = cells[{i, j}];
    s.z_max = std::max(s.z_max, p.z);
    s.z_min = std::min(s.z_min, p.z);
    s.intensity_sum += p.intensity;
    ++s.n;
    s.members.push_back(k);
  }
  return cells;
}

// Majority vote by explicit counting, lowest class on ties.
inline Label majority(const std::vector<Label>& labels) {
  std::array<int, kNumClasses> votes{};
  for (Label l : labels) {
    if (!l.is_ignore()) ++votes[static_cast<std::size_t>(l.index())];
  }
  int best = -1;
  for (int c = 0; c < kNumClasses; ++c) {
    if (votes[static_cast<std::size_t>(c)] > 0 &&
        (best < 0 || votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)])) {
      best = c;
    }
  }
  return best < 0 ? Label::ignore() : Label(static_cast<ClassId>(best));
}

// ------------------------------------------------------------- ray oracles

struct CellKey {
  long i, j;
  friend bool operator<(const CellKey& a, const CellKey& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  }
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

// Cells touched by stepping along the xy projection at a fixed arc length.
inline std::set<CellKey> sample_ray_cells(const Ray& ray, const GridSpec& spec, double step) {
  std::set<CellKey> cells;
  const double dx = ray.endpoint.x() - ray.origin.x();
  const double dy = ray.endpoint.y() - ray.origin.y();
  const double len = std::hypot(dx, dy);
  const auto n = static_cast<long>(std::ceil(len / step));
  for (long s = 0; s <= n; ++s) {
    const double t = n == 0 ? 0.0 : static_cast<double>(s) / static_cast<double>(n);
    const double x = ray.origin.x() + t * dx;
    const double y = ray.origin.y() + t * dy;
    const long i = static_cast<long>(std::floor((x - spec.x_min) / spec.cell_size));
    const long j = static_cast<long>(std::floor((y - spec.y_min) / spec.cell_size));
    if (i < 0 || j < 0 || i >= static_cast<long>(spec.n_x) || j >= static_cast<long>(spec.n_y)) {
      continue;
    }
    cells.insert({i, j});
  }
  return cells;
}

// Parameter interval [t_in, t_out] of the segment inside a closed cell box,
// or nullopt when it misses.
inline std::optional<std::pair<double, double>> segment_in_cell(const Ray& ray,
                                                                const GridSpec& spec,
                                                                CellKey c) {
  const double lo_x = spec.x_min + static_cast<double>(c.i) * spec.cell_size;
  const double lo_y = spec.y_min + static_cast<double>(c.j) * spec.cell_size;
  const double hi_x = lo_x + spec.cell_size;
  const double hi_y = lo_y + spec.cell_size;
  double t0 = 0.0, t1 = 1.0;
  const double o[2] = {ray.origin.x(), ray.origin.y()};
  const double d[2] = {ray.endpoint.x() - o[0], ray.endpoint.y() - o[1]};
  const double lo[2] = {lo_x, lo_y};
  const double hi[2] = {hi_x, hi_y};
  for (int a = 0; a < 2; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < lo[a] || o[a] > hi[a]) return std::nullopt;
      continue;
    }
    double ta = (lo[a] - o[a]) / d[a];
    double tb = (hi[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1) return std::nullopt;
  return std::make_pair(t0, t1);
}

// Length in meters of the xy segment inside cell c.
inline double crossing_length(const Ray& ray, const GridSpec& spec, CellKey c) {
  const auto iv = segment_in_cell(ray, spec, c);
  if (!iv) return 0.0;
  const double len = std::hypot(ray.endpoint.x() - ray.origin.x(), ray.endpoint.y() - ray.origin.y());
  return (iv->second - iv->first) * len;
}

// ---------------------------------------------------------- fusion oracles

struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
};

// Central finite differences over every parameter. Parameters whose
// perturbation moves any hidden pre-activation across zero are skipped: the
// loss is not differentiable there.
inline GradientCheck finite_difference_check(const LateFusionHead& head, const FusionInput& input,
                                             const LabelGrid& gt, double h = 1e-5) {
  const auto analytic = loss_and_gradient(head, input, gt).gradient;
  std::vector<double> params = head.parameters();
  GradientCheck out;
  LateFusionHead probe = head;
  const auto pre_signs = [&](const LateFusionHead& m) {
    const Eigen::MatrixXd x =
        ((input.features.colwise() - m.input_offset).array().colwise() * m.input_scale.array())
            .matrix();
    const Eigen::MatrixXd pre = (m.w1 * x).colwise() + m.b1;
    return (pre.array() > 0.0).eval();
  };
  for (std::size_t p = 0; p < params.size(); ++p) {
    const double saved = params[p];
    params[p] = saved + h;
    probe.set_parameters(params);
    const double up = loss_and_gradient(probe, input, gt).loss;
    const auto signs_up = pre_signs(probe);
    params[p] = saved - h;
    probe.set_parameters(params);
    const double down = loss_and_gradient(probe, input, gt).loss;
    const auto signs_down = pre_signs(probe);
    params[p] = saved;
    if ((signs_up != signs_down).any()) {
      ++out.skipped_kinks;
      continue;
    }
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[p]), std::abs(numeric), 1e-4});
    out.max_relative_error = std::max(out.max_relative_error, std::abs(analytic[p] - numeric) / denom);
    ++out.checked;
  }
  return out;
}

// Random small fusion problem for gradient checks.
struct SmallProblem {
  LateFusionHead head;
  FusionInput input;
  LabelGrid gt;
};

inline SmallProblem small_problem(std::uint64_t seed, int channels = 6, int hidden = 8,
                                  std::uint32_t n_x = 4, std::uint32_t n_y = 5) {
  std::mt19937_64 rng(seed * 7919 + 13);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> c(0, kNumClasses - 1);
  SmallProblem s;
  s.head = LateFusionHead::initialize(channels, hidden, seed);
  for (Eigen::Index k = 0; k < s.head.b1.size(); ++k) s.head.b1(k) = 0.1 * g(rng);
  for (Eigen::Index k = 0; k < s.head.b2.size(); ++k) s.head.b2(k) = 0.1 * g(rng);
  GridSpec spec{0.0, 0.0, 1.0, n_x, n_y};
  s.input.spec = spec;
  s.input.features.resize(channels, static_cast<Eigen::Index>(spec.cell_count()));
  for (Eigen::Index r = 0; r < s.input.features.rows(); ++r) {
    for (Eigen::Index k = 0; k < s.input.features.cols(); ++k) s.input.features(r, k) = g(rng);
  }
  for (int r = 0; r < channels; ++r) s.input.channel_names.push_back("c" + std::to_string(r));
  s.input.valid.assign(spec.cell_count(), 1);
  s.gt = LabelGrid(spec);
  for (std::size_t k = 0; k < spec.cell_count(); ++k) {
    s.gt.labels[k] = k % 7 == 3 ? Label::ignore() : Label(static_cast<ClassId>(c(rng)));
  }
  return s;
}

// Two-class grid where a fixed linear rule on the channels decides the
// label with a margin: road where w.x > 0.25, vehicle where w.x < -0.25.
struct SeparableFixture {
  FusionInput input;
  LabelGrid gt;
};

inline SeparableFixture separable_fixture(std::uint64_t seed, int channels = 6,
                                          std::uint32_t n_x = 40, std::uint32_t n_y = 40) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd w(channels);
  for (int r = 0; r < channels; ++r) w(r) = g(rng);
  w.normalize();
  SeparableFixture f;
  const GridSpec spec{0.0, 0.0, 1.0, n_x, n_y};
  f.input.spec = spec;
  f.input.features.resize(channels, static_cast<Eigen::Index>(spec.cell_count()));
  for (int r = 0; r < channels; ++r) f.input.channel_names.push_back("c" + std::to_string(r));
  f.input.valid.assign(spec.cell_count(), 1);
  f.gt = LabelGrid(spec);
  for (std::size_t k = 0; k < spec.cell_count(); ++k) {
    Eigen::VectorXd x(channels);
    double s = 0.0;
    do {
      for (int r = 0; r < channels; ++r) x(r) = g(rng);
      s = w.dot(x);
    } while (std::abs(s) < 0.25);
    f.input.features.col(static_cast<Eigen::Index>(k)) = x;
    f.gt.labels[k] = s > 0.0 ? Label(ClassId::kRoad) : Label(ClassId::kVehicle);
  }
  return f;
}

inline double cell_accuracy(const LabelGrid& pred, const LabelGrid& gt) {
  std::size_t ok = 0, n = 0;
  for (std::size_t k = 0; k < gt.labels.size(); ++k) {
    if (gt.labels[k].is_ignore()) continue;
    ++n;
    ok += pred.labels[k] == gt.labels[k];
  }
  return n ? static_cast<double>(ok) / static_cast<double>(n) : 0.0;
}

}  // namespace semgrid::testing
