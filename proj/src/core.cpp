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

#include "semgrid/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "Eigen/Geometry"
#include "Eigen/LU"
#include "semgrid/error.hpp"

namespace semgrid {
namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "building", "parking", "pedestrian", "pole",       "road",   "sidewalk",
    "terrain",  "trunk",   "two-wheel",  "vegetation", "vehicle"};

bool finite(const Point& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z) &&
         std::isfinite(p.intensity);
}

void check_finite(std::span<const Point> points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!finite(points[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "point " + std::to_string(i) + " has a non-finite field");
    }
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    if (pos >= s.size()) break;
    std::size_t end = pos;
    while (end < s.size() && s[end] != ' ' && s[end] != '\t') ++end;
    out.push_back(s.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

}  // namespace

std::string_view class_name(ClassId id) {
  return kClassNames.at(static_cast<std::size_t>(id));
}

std::optional<ClassId> class_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == name) return static_cast<ClassId>(i);
  }
  return std::nullopt;
}

Label Label::from_code(std::uint8_t code) {
  if (code == kIgnoreCode) return Label::ignore();
  if (code >= kNumClasses) {
    throw Error(ErrorCode::kFormat, "invalid label code " + std::to_string(code));
  }
  return Label(static_cast<ClassId>(code));
}

int argmax_lowest(std::span<const double> values) {
  int best = 0;
  for (std::size_t c = 1; c < values.size(); ++c) {
    if (values[c] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

// ---------------------------------------------------------------------------
// PointCloud

PointCloud::PointCloud(std::vector<Point> points) : points_(std::move(points)) {
  check_finite(points_);
}

void PointCloud::set_points(std::vector<Point> points) {
  if (points.size() != points_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "set_points: point count changed");
  }
  check_finite(points);
  points_ = std::move(points);
}

void PointCloud::set_labels(std::vector<Label> labels) {
  if (labels.size() != points_.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "label count " + std::to_string(labels.size()) + " != point count " +
                    std::to_string(points_.size()));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i].is_ignore() && labels[i].index() >= kNumClasses) {
      throw Error(ErrorCode::kInvalidArgument, "invalid label at point " + std::to_string(i));
    }
  }
  labels_ = std::move(labels);
  labels_set_ = true;
}

void PointCloud::set_probabilities(std::vector<double> rows) {
  if (rows.size() != points_.size() * kNumClasses) {
    throw Error(ErrorCode::kDimensionMismatch,
                "probability table has " + std::to_string(rows.size()) +
                    " entries, expected " + std::to_string(points_.size() * kNumClasses));
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    double sum = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
      const double v = rows[i * kNumClasses + c];
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "malformed probability row at point " + std::to_string(i));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-5) {
      throw Error(ErrorCode::kInvalidArgument,
                  "probability row at point " + std::to_string(i) + " sums to " +
                      std::to_string(sum));
    }
  }
  probabilities_ = std::move(rows);
  probabilities_set_ = true;
}

void PointCloud::clear_labels() {
  labels_.clear();
  labels_set_ = false;
}

void PointCloud::clear_probabilities() {
  probabilities_.clear();
  probabilities_set_ = false;
}

void PointCloud::append(const PointCloud& other) {
  if (!empty() && !other.empty() && (has_labels() != other.has_labels() ||
                                     has_probabilities() != other.has_probabilities())) {
    throw Error(ErrorCode::kInvalidArgument, "append: optional columns differ");
  }
  if (empty()) {
    labels_set_ = other.labels_set_;
    probabilities_set_ = other.probabilities_set_;
  }
  points_.insert(points_.end(), other.points_.begin(), other.points_.end());
  labels_.insert(labels_.end(), other.labels_.begin(), other.labels_.end());
  probabilities_.insert(probabilities_.end(), other.probabilities_.begin(),
                        other.probabilities_.end());
}

// ---------------------------------------------------------------------------
// Pose

Pose::Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "pose has non-finite entries");
  }
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  const double det = rotation.determinant();
  if (ortho > 1e-6 || std::abs(det - 1.0) > 1e-6) {
    throw Error(ErrorCode::kInvalidArgument, "pose rotation is not a proper rotation");
  }
}

Pose Pose::from_yaw(double yaw_radians, const Eigen::Vector3d& translation) {
  return Pose(Eigen::AngleAxisd(yaw_radians, Eigen::Vector3d::UnitZ()).toRotationMatrix(),
              translation);
}

Pose Pose::from_row_major_3x4(std::span<const double, 12> v) {
  Eigen::Matrix3d r;
  r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
  return Pose(r, Eigen::Vector3d(v[3], v[7], v[11]));
}

std::array<double, 12> Pose::to_row_major_3x4() const {
  std::array<double, 12> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[static_cast<std::size_t>(r * 4 + c)] = rotation_(r, c);
    out[static_cast<std::size_t>(r * 4 + 3)] = translation_(r);
  }
  return out;
}

Pose Pose::inverse() const {
  Pose inv;
  inv.rotation_ = rotation_.transpose();
  inv.translation_ = -(inv.rotation_ * translation_);
  return inv;
}

Pose operator*(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation_ = a.rotation_ * b.rotation_;
  out.translation_ = a.rotation_ * b.translation_ + a.translation_;
  return out;
}

// ---------------------------------------------------------------------------
// GridSpec

void GridSpec::validate() const {
  if (!std::isfinite(x_min) || !std::isfinite(y_min) || !std::isfinite(cell_size) ||
      cell_size <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "grid spec needs finite origin and cell_size > 0");
  }
  if (n_x < 1 || n_y < 1) {
    throw Error(ErrorCode::kInvalidArgument, "grid spec needs n_x, n_y >= 1");
  }
}

GridSpec GridSpec::parse(std::string_view text) {
  std::vector<std::string> parts;
  std::string current;
  for (char ch : text) {
    if (ch == ',') {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  parts.push_back(current);
  if (parts.size() != 5) {
    throw Error(ErrorCode::kInvalidArgument,
                "grid spec must be x_min,y_min,cell,n_x,n_y: '" + std::string(text) + "'");
  }
  GridSpec spec;
  try {
    std::size_t used = 0;
    auto to_double = [&](const std::string& s) {
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    };
    auto to_count = [&](const std::string& s) {
      const unsigned long v = std::stoul(s, &used);
      if (used != s.size() || v > std::numeric_limits<std::uint32_t>::max()) {
        throw std::invalid_argument(s);
      }
      return static_cast<std::uint32_t>(v);
    };
    spec.x_min = to_double(parts[0]);
    spec.y_min = to_double(parts[1]);
    spec.cell_size = to_double(parts[2]);
    spec.n_x = to_count(parts[3]);
    spec.n_y = to_count(parts[4]);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kInvalidArgument, "malformed grid spec '" + std::string(text) + "'");
  }
  spec.validate();
  return spec;
}

std::optional<CellIndex> cell_index(double x, double y, const GridSpec& spec) {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw Error(ErrorCode::kInvalidArgument, "cell_index: non-finite coordinate");
  }
  const double fi = std::floor((x - spec.x_min) / spec.cell_size);
  const double fj = std::floor((y - spec.y_min) / spec.cell_size);
  if (fi < 0.0 || fj < 0.0 || fi >= static_cast<double>(spec.n_x) ||
      fj >= static_cast<double>(spec.n_y)) {
    return std::nullopt;
  }
  return CellIndex{static_cast<std::int32_t>(fi), static_cast<std::int32_t>(fj)};
}

PointCloud transform_points(const PointCloud& cloud, const Pose& pose) {
  std::vector<Point> moved(cloud.points().begin(), cloud.points().end());
  const Eigen::Matrix3d& r = pose.rotation();
  const Eigen::Vector3d& t = pose.translation();
  for (Point& p : moved) {
    const Eigen::Vector3d q = r * Eigen::Vector3d(p.x, p.y, p.z) + t;
    p.x = q.x();
    p.y = q.y();
    p.z = q.z();
  }
  PointCloud out = cloud;
  out.set_points(std::move(moved));
  return out;
}

// ---------------------------------------------------------------------------
// ClassMap

ClassMap ClassMap::semantic_kitti() {
  using C = ClassId;
  ClassMap map;
  const std::pair<std::uint16_t, Label> table[] = {
      {0, Label::ignore()},     // unlabeled
      {1, Label::ignore()},     // outlier
      {10, C::kVehicle},        // car
      {11, C::kTwoWheel},       // bicycle
      {13, C::kVehicle},        // bus
      {15, C::kTwoWheel},       // motorcycle
      {16, C::kVehicle},        // on-rails
      {18, C::kVehicle},        // truck
      {20, C::kVehicle},        // other-vehicle
      {30, C::kPedestrian},     // person
      {31, C::kTwoWheel},       // bicyclist
      {32, C::kTwoWheel},       // motorcyclist
      {40, C::kRoad},           // road
      {44, C::kParking},        // parking
      {48, C::kSidewalk},       // sidewalk
      {49, C::kParking},        // other-ground
      {50, C::kBuilding},       // building
      {51, C::kBuilding},       // fence
      {52, C::kBuilding},       // other-structure
      {60, C::kRoad},           // lane-marking
      {70, C::kVegetation},     // vegetation
      {71, C::kTrunk},          // trunk
      {72, C::kTerrain},        // terrain
      {80, C::kPole},           // pole
      {81, C::kPole},           // traffic-sign
      {99, Label::ignore()},    // other-object
      {252, C::kVehicle},       // moving-car
      {253, C::kTwoWheel},      // moving-bicyclist
      {254, C::kPedestrian},    // moving-person
      {255, C::kTwoWheel},      // moving-motorcyclist
      {256, C::kVehicle},       // moving-on-rails
      {257, C::kVehicle},       // moving-bus
      {258, C::kVehicle},       // moving-truck
      {259, C::kVehicle},       // moving-other-vehicle
  };
  for (const auto& [raw, target] : table) map.add(raw, target);
  return map;
}

ClassMap ClassMap::parse(std::string_view text) {
  ClassMap map;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_ws(line);
    const std::string where = "class map line " + std::to_string(line_no);
    if (fields.front() == "classes") {
      if (fields.size() != kNumClasses + 1) {
        throw Error(ErrorCode::kFormat, where + ": palette needs 11 names");
      }
      for (int c = 0; c < kNumClasses; ++c) {
        if (fields[static_cast<std::size_t>(c) + 1] != kClassNames[static_cast<std::size_t>(c)]) {
          throw Error(ErrorCode::kFormat,
                      where + ": palette entry " + std::to_string(c) + " must be '" +
                          std::string(kClassNames[static_cast<std::size_t>(c)]) + "'");
        }
      }
      continue;
    }
    if (fields.size() != 2) {
      throw Error(ErrorCode::kFormat, where + ": expected 'raw_id target'");
    }
    unsigned raw = 0;
    const auto [ptr, ec] =
        std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), raw);
    if (ec != std::errc() || ptr != fields[0].data() + fields[0].size() || raw > 0xFFFF) {
      throw Error(ErrorCode::kFormat, where + ": bad raw id '" + std::string(fields[0]) + "'");
    }
    Label target;
    if (fields[1] != "ignore") {
      const auto id = class_from_name(fields[1]);
      if (!id) {
        throw Error(ErrorCode::kFormat, where + ": unknown class '" + std::string(fields[1]) + "'");
      }
      target = *id;
    }
    if (map.contains(static_cast<std::uint16_t>(raw))) {
      throw Error(ErrorCode::kFormat, where + ": duplicate raw id " + std::to_string(raw));
    }
    map.add(static_cast<std::uint16_t>(raw), target);
  }
  return map;
}

ClassMap ClassMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open class map '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

void ClassMap::add(std::uint16_t raw, Label target) {
  if (!table_.emplace(raw, target).second) {
    throw Error(ErrorCode::kFormat, "duplicate raw id " + std::to_string(raw));
  }
}

Label ClassMap::remap(std::uint16_t raw) const {
  const auto it = table_.find(raw);
  if (it == table_.end()) {
    throw Error(ErrorCode::kUnknownLabel, "unknown raw label id " + std::to_string(raw));
  }
  return it->second;
}

std::uint16_t ClassMap::canonical_raw(ClassId id) const {
  std::optional<std::uint16_t> best;
  for (const auto& [raw, target] : table_) {
    if (target == Label(id) && (!best || raw < *best)) best = raw;
  }
  if (!best) {
    throw Error(ErrorCode::kInvalidArgument,
                "class map has no raw id for '" + std::string(class_name(id)) + "'");
  }
  return *best;
}

}  // namespace semgrid
