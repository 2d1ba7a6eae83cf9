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

#include "semgrid/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "Eigen/LU"
#include "Eigen/SVD"
#include "semgrid/error.hpp"

namespace semgrid {
namespace {

template <typename T>
T load_le(const std::uint8_t* p) {
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

template <typename T>
void store_le(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

void check_record_size(std::size_t bytes, std::size_t record, const char* what) {
  if (bytes % record != 0) {
    throw Error(ErrorCode::kFormat, std::string(what) + " truncated at byte offset " +
                                        std::to_string(bytes - bytes % record));
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Nearest rotation in the Frobenius sense.
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

bool parse_numbers(std::string_view line, std::vector<double>& out) {
  out.clear();
  std::string buffer(line);
  std::istringstream in(buffer);
  in.imbue(std::locale::classic());
  std::string token;
  while (in >> token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || !std::isfinite(v)) return false;
    out.push_back(v);
  }
  return true;
}

Pose pose_from_numbers(const std::vector<double>& v, const std::string& where) {
  Eigen::Matrix3d r;
  r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
  const double error = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (error > 1e-4 || r.determinant() < 0.0) {
    throw Error(ErrorCode::kFormat, where + ": rotation is not orthonormal");
  }
  return Pose(orthonormalize(r), Eigen::Vector3d(v[3], v[7], v[11]));
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Scans

PointCloud parse_point_cloud(std::span<const std::uint8_t> bytes) {
  check_record_size(bytes.size(), 16, "point cloud");
  std::vector<Point> points(bytes.size() / 16);
  for (std::size_t i = 0; i < points.size(); ++i) {
    float v[4];
    for (std::size_t f = 0; f < 4; ++f) {
      const std::size_t offset = i * 16 + f * 4;
      v[f] = load_le<float>(bytes.data() + offset);
      if (!std::isfinite(v[f])) {
        throw Error(ErrorCode::kFormat,
                    "point cloud has a non-finite value at byte offset " + std::to_string(offset));
      }
    }
    points[i] = Point{v[0], v[1], v[2], std::clamp(static_cast<double>(v[3]), 0.0, 1.0)};
  }
  return PointCloud(std::move(points));
}

PointCloud read_point_cloud(const std::string& path) { return parse_point_cloud(read_file(path)); }

void write_point_cloud(const PointCloud& cloud, const std::string& path) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(cloud.size() * 16);
  for (const Point& p : cloud.points()) {
    store_le(bytes, static_cast<float>(p.x));
    store_le(bytes, static_cast<float>(p.y));
    store_le(bytes, static_cast<float>(p.z));
    store_le(bytes, static_cast<float>(p.intensity));
  }
  write_file(path, bytes);
}

std::vector<Label> parse_labels(std::span<const std::uint8_t> bytes, const ClassMap& map) {
  check_record_size(bytes.size(), 4, "label file");
  std::vector<Label> labels(bytes.size() / 4);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto raw = load_le<std::uint32_t>(bytes.data() + i * 4);
    labels[i] = map.remap(static_cast<std::uint16_t>(raw & 0xFFFFu));
  }
  return labels;
}

std::vector<Label> read_labels(const std::string& path, const ClassMap& map) {
  return parse_labels(read_file(path), map);
}

void write_raw_labels(std::span<const std::uint32_t> raw, const std::string& path) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(raw.size() * 4);
  for (std::uint32_t v : raw) store_le(bytes, v);
  write_file(path, bytes);
}

void write_labels(std::span<const Label> labels, const ClassMap& map, const std::string& path) {
  std::vector<std::uint32_t> raw(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    raw[i] = labels[i].is_ignore() ? 0u : map.canonical_raw(labels[i].class_id());
  }
  write_raw_labels(raw, path);
}

std::vector<double> parse_probabilities(std::span<const std::uint8_t> bytes) {
  check_record_size(bytes.size(), 4 * kNumClasses, "probability table");
  std::vector<double> rows(bytes.size() / 4);
  for (std::size_t k = 0; k < rows.size(); ++k) rows[k] = load_le<float>(bytes.data() + k * 4);
  return rows;
}

std::vector<double> read_probabilities(const std::string& path) {
  return parse_probabilities(read_file(path));
}

void write_probabilities(std::span<const double> rows, const std::string& path) {
  if (rows.size() % kNumClasses != 0) {
    throw Error(ErrorCode::kDimensionMismatch, "probability table is not a multiple of 11");
  }
  std::vector<std::uint8_t> bytes;
  bytes.reserve(rows.size() * 4);
  for (double v : rows) store_le(bytes, static_cast<float>(v));
  write_file(path, bytes);
}

// ---------------------------------------------------------------------------
// Poses

std::vector<Pose> parse_poses(std::string_view text, const std::optional<Pose>& calibration) {
  std::vector<Pose> poses;
  std::vector<double> numbers;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  const std::optional<Pose> calibration_inverse =
      calibration ? std::optional<Pose>(calibration->inverse()) : std::nullopt;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "pose line " + std::to_string(line_no);
    if (!parse_numbers(line, numbers) || numbers.size() != 12) {
      throw Error(ErrorCode::kFormat, where + ": expected 12 numbers");
    }
    Pose pose = pose_from_numbers(numbers, where);
    if (calibration) pose = *calibration_inverse * pose * *calibration;
    poses.push_back(pose);
  }
  return poses;
}

std::vector<Pose> read_poses(const std::string& path, const std::optional<Pose>& calibration) {
  return parse_poses(read_text(path), calibration);
}

void write_poses(std::span<const Pose> poses, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.imbue(std::locale::classic());
  out.precision(17);
  for (const Pose& pose : poses) {
    const auto v = pose.to_row_major_3x4();
    for (std::size_t k = 0; k < v.size(); ++k) out << (k ? " " : "") << v[k];
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

Pose parse_calibration(std::string_view text) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::vector<double> numbers;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;
    line = line.substr(first);
    if (line.rfind("Tr:", 0) != 0) continue;
    const std::string where = "calibration line " + std::to_string(line_no);
    if (!parse_numbers(line.substr(3), numbers) || numbers.size() != 12) {
      throw Error(ErrorCode::kFormat, where + ": expected 12 numbers after 'Tr:'");
    }
    return pose_from_numbers(numbers, where);
  }
  throw Error(ErrorCode::kFormat, "calibration has no 'Tr:' entry");
}

Pose read_calibration(const std::string& path) { return parse_calibration(read_text(path)); }

// ---------------------------------------------------------------------------
// Images

std::array<std::uint8_t, 3> class_color(ClassId id) {
  static constexpr std::array<std::array<double, 3>, kNumClasses> kLegend = {{
      {1.0, 0.7843137254901961, 0.0},                 // building+fence
      {1.0, 0.5882352941176471, 1.0},                 // parking+other-ground
      {1.0, 0.11764705882352941, 0.11764705882352941},  // pedestrian
      {1.0, 0.47058823529411764, 0.19607843137254902},  // pole+traffic-sign
      {1.0, 0.0, 1.0},                                // road
      {0.29411764705882354, 0.0, 0.29411764705882354},  // sidewalk
      {0.5882352941176471, 0.9411764705882353, 0.3137254901960784},  // terrain
      {0.5294117647058824, 0.23529411764705882, 0.0},   // trunk
      {0.11764705882352941, 0.23529411764705882, 0.5882352941176471},  // two-wheel
      {0.0, 0.6862745098039216, 0.0},                 // vegetation
      {0.0, 0.0, 1.0},                                // vehicle
  }};
  const auto& rgb = kLegend.at(static_cast<std::size_t>(id));
  return {static_cast<std::uint8_t>(std::lround(rgb[0] * 255.0)),
          static_cast<std::uint8_t>(std::lround(rgb[1] * 255.0)),
          static_cast<std::uint8_t>(std::lround(rgb[2] * 255.0))};
}

Image render_labels(const LabelGrid& grid) {
  Image image{grid.spec.n_y, grid.spec.n_x, 3, {}};
  image.pixels.assign(static_cast<std::size_t>(image.width) * image.height * 3, 0);
  for (std::uint32_t r = 0; r < image.height; ++r) {
    for (std::uint32_t c = 0; c < image.width; ++c) {
      const CellIndex cell{static_cast<std::int32_t>(grid.spec.n_x - 1 - r),
                           static_cast<std::int32_t>(grid.spec.n_y - 1 - c)};
      const Label label = grid.at(cell);
      if (label.is_ignore()) continue;
      const auto rgb = class_color(label.class_id());
      std::copy(rgb.begin(), rgb.end(),
                image.pixels.begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(r) * image.width + c) * 3));
    }
  }
  return image;
}

Image render_layer(const GridLayer& layer) {
  Image image{layer.spec.n_y, layer.spec.n_x, 1, {}};
  image.pixels.assign(static_cast<std::size_t>(image.width) * image.height, 0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < layer.values.size(); ++k) {
    if (!layer.valid[k]) continue;
    lo = std::min(lo, layer.values[k]);
    hi = std::max(hi, layer.values[k]);
  }
  for (std::uint32_t r = 0; r < image.height; ++r) {
    for (std::uint32_t c = 0; c < image.width; ++c) {
      const CellIndex cell{static_cast<std::int32_t>(layer.spec.n_x - 1 - r),
                           static_cast<std::int32_t>(layer.spec.n_y - 1 - c)};
      if (!layer.is_valid(cell)) continue;
      std::uint8_t gray = 128;
      if (hi > lo) {
        gray = static_cast<std::uint8_t>(std::lround((layer.value(cell) - lo) / (hi - lo) * 255.0));
      }
      image.pixels[static_cast<std::size_t>(r) * image.width + c] = gray;
    }
  }
  return image;
}

void write_image(const Image& image, const std::string& path) {
  std::ostringstream header;
  header << (image.channels == 3 ? "P6" : "P5") << '\n'
         << image.width << ' ' << image.height << "\n255\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> bytes(h.begin(), h.end());
  bytes.insert(bytes.end(), image.pixels.begin(), image.pixels.end());
  write_file(path, bytes);
}

void export_colormap_image(const LabelGrid& grid, const std::string& path) {
  write_image(render_labels(grid), path);
}

void export_colormap_image(const GridLayer& layer, const std::string& path) {
  write_image(render_layer(layer), path);
}

}  // namespace semgrid
