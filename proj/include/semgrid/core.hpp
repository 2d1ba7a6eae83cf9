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
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "Eigen/Core"

namespace semgrid {

inline constexpr int kNumClasses = 11;

// Fixed class order; the numeric value is the channel index everywhere.
enum class ClassId : std::uint8_t {
  kBuilding = 0,
  kParking = 1,
  kPedestrian = 2,
  kPole = 3,
  kRoad = 4,
  kSidewalk = 5,
  kTerrain = 6,
  kTrunk = 7,
  kTwoWheel = 8,
  kVegetation = 9,
  kVehicle = 10,
};

std::string_view class_name(ClassId id);
std::optional<ClassId> class_from_name(std::string_view name);

// A class id or the ignore state. Encoded as one byte, 255 = ignore.
class Label {
 public:
  static constexpr std::uint8_t kIgnoreCode = 255;

  constexpr Label() = default;
  constexpr Label(ClassId id) : code_(static_cast<std::uint8_t>(id)) {}  // NOLINT

  static constexpr Label ignore() { return Label(); }
  // Throws on codes that are neither a class nor 255.
  static Label from_code(std::uint8_t code);

  constexpr bool is_ignore() const { return code_ == kIgnoreCode; }
  constexpr ClassId class_id() const { return static_cast<ClassId>(code_); }
  constexpr std::uint8_t code() const { return code_; }
  constexpr int index() const { return code_; }

  friend constexpr bool operator==(Label a, Label b) { return a.code_ == b.code_; }

 private:
  std::uint8_t code_ = kIgnoreCode;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;
};

// Columnar point set with optional per-point labels and class-probability
// rows (kNumClasses entries per point, row-major).
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Point> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  std::span<const Point> points() const { return points_; }
  const Point& operator[](std::size_t i) const { return points_[i]; }

  bool has_labels() const { return labels_set_; }
  std::span<const Label> labels() const { return labels_; }
  void set_labels(std::vector<Label> labels);

  bool has_probabilities() const { return probabilities_set_; }
  std::span<const double> probabilities() const { return probabilities_; }
  std::span<const double> probability_row(std::size_t i) const {
    return std::span<const double>(probabilities_).subspan(i * kNumClasses, kNumClasses);
  }
  // Rows must be nonnegative and sum to 1 within 1e-5.
  void set_probabilities(std::vector<double> rows);

  void clear_labels();
  void clear_probabilities();

  // Appends points (and matching optional columns) of other. Both clouds must
  // agree on which optional columns they carry.
  void append(const PointCloud& other);

  // Replaces coordinates, keeping the optional columns.
  void set_points(std::vector<Point> points);

 private:
  std::vector<Point> points_;
  std::vector<Label> labels_;
  std::vector<double> probabilities_;
  bool labels_set_ = false;
  bool probabilities_set_ = false;
};

// Rigid transform p' = R p + t.
class Pose {
 public:
  Pose() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}
  // Throws unless rotation is orthonormal with det +1 within 1e-6.
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static Pose identity() { return Pose(); }
  static Pose from_yaw(double yaw_radians, const Eigen::Vector3d& translation);
  // Row-major 3x4 [R | t], as stored in KITTI pose files.
  static Pose from_row_major_3x4(std::span<const double, 12> values);
  std::array<double, 12> to_row_major_3x4() const;

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Pose inverse() const;
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation_ * p + translation_; }

  // (a * b).apply(p) == a.apply(b.apply(p))
  friend Pose operator*(const Pose& a, const Pose& b);

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

struct CellIndex {
  std::int32_t i = 0;  // along x
  std::int32_t j = 0;  // along y
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

// Top-view raster geometry. Cell (i, j) covers
// [x_min + i*cell_size, x_min + (i+1)*cell_size) x [y_min + j*cell_size, ...).
struct GridSpec {
  double x_min = -50.05;
  double y_min = -25.05;
  double cell_size = 0.1;
  std::uint32_t n_x = 1001;
  std::uint32_t n_y = 501;

  // 1001 x 501 cells of 0.1 m centered on the sensor.
  static GridSpec default_spec() { return GridSpec{}; }
  // Parses "x_min,y_min,cell,n_x,n_y".
  static GridSpec parse(std::string_view text);

  void validate() const;
  std::size_t cell_count() const { return static_cast<std::size_t>(n_x) * n_y; }
  double x_max() const { return x_min + n_x * cell_size; }
  double y_max() const { return y_min + n_y * cell_size; }
  // Row-major storage offset: i is the outer index.
  std::size_t offset(CellIndex c) const {
    return static_cast<std::size_t>(c.i) * n_y + static_cast<std::size_t>(c.j);
  }
  CellIndex cell_at(std::size_t offset) const {
    return CellIndex{static_cast<std::int32_t>(offset / n_y),
                     static_cast<std::int32_t>(offset % n_y)};
  }
  bool contains(CellIndex c) const {
    return c.i >= 0 && c.j >= 0 && static_cast<std::uint32_t>(c.i) < n_x &&
           static_cast<std::uint32_t>(c.j) < n_y;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Floor-based cell lookup; nullopt when outside the grid. Throws on
// non-finite input.
std::optional<CellIndex> cell_index(double x, double y, const GridSpec& spec);

PointCloud transform_points(const PointCloud& cloud, const Pose& pose);

// Raw 16-bit annotation id -> class or ignore.
class ClassMap {
 public:
  ClassMap() = default;

  // The reduction to eleven classes: moving variants join their static
  // counterpart; building+fence, pole+traffic-sign, parking+other-ground.
  static ClassMap semantic_kitti();

  // Text config: '#' comments, an optional "classes <11 names>" line that
  // must match the fixed order, then "raw_id target" lines where target is a
  // class name or "ignore".
  static ClassMap parse(std::string_view text);
  static ClassMap load(const std::string& path);

  // Throws on duplicate raw ids.
  void add(std::uint16_t raw, Label target);
  bool contains(std::uint16_t raw) const { return table_.count(raw) != 0; }
  std::size_t size() const { return table_.size(); }

  // Throws ErrorCode::kUnknownLabel for ids absent from the table.
  Label remap(std::uint16_t raw) const;

  // Lowest raw id mapping to the class; used to write labels back out.
  std::uint16_t canonical_raw(ClassId id) const;

 private:
  std::unordered_map<std::uint16_t, Label> table_;
};

inline Label remap_label(std::uint16_t raw, const ClassMap& map) { return map.remap(raw); }

// Per-cell class-or-ignore raster; also the argmax encoding of a histogram.
struct LabelGrid {
  GridSpec spec;
  std::vector<Label> labels;

  LabelGrid() = default;
  explicit LabelGrid(const GridSpec& s) : spec(s), labels(s.cell_count()) {}

  Label& at(CellIndex c) { return labels[spec.offset(c)]; }
  Label at(CellIndex c) const { return labels[spec.offset(c)]; }
  friend bool operator==(const LabelGrid&, const LabelGrid&) = default;
};

using ArgmaxGrid = LabelGrid;

// Lowest index wins ties.
int argmax_lowest(std::span<const double> values);

}  // namespace semgrid
