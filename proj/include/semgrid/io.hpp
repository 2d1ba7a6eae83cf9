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
#include <string_view>
#include <vector>

#include "semgrid/core.hpp"
#include "semgrid/gridmap.hpp"

namespace semgrid {

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

// Velodyne scans: little-endian f32 quadruples (x, y, z, intensity).
// Intensity is clamped to [0, 1].
PointCloud parse_point_cloud(std::span<const std::uint8_t> bytes);
PointCloud read_point_cloud(const std::string& path);
void write_point_cloud(const PointCloud& cloud, const std::string& path);

// Label files: one little-endian u32 per point, semantic id in the low 16
// bits, instance id in the high 16 bits.
std::vector<Label> parse_labels(std::span<const std::uint8_t> bytes, const ClassMap& map);
std::vector<Label> read_labels(const std::string& path, const ClassMap& map);
// Writes the lowest raw id of each class (0 for ignore).
void write_labels(std::span<const Label> labels, const ClassMap& map, const std::string& path);
void write_raw_labels(std::span<const std::uint32_t> raw, const std::string& path);

// Per-point probability table: little-endian f32, kNumClasses per point.
std::vector<double> parse_probabilities(std::span<const std::uint8_t> bytes);
std::vector<double> read_probabilities(const std::string& path);
void write_probabilities(std::span<const double> rows, const std::string& path);

// Pose files: one row-major 3x4 matrix (12 numbers) per line. With a
// calibration T_cal each pose becomes T_cal^-1 * T * T_cal. Rotations more
// than 1e-4 from orthonormal are rejected, the rest re-orthonormalized.
std::vector<Pose> parse_poses(std::string_view text, const std::optional<Pose>& calibration = {});
std::vector<Pose> read_poses(const std::string& path, const std::optional<Pose>& calibration = {});
void write_poses(std::span<const Pose> poses, const std::string& path);

// Reads the "Tr:" entry of a KITTI calib.txt.
Pose parse_calibration(std::string_view text);
Pose read_calibration(const std::string& path);

// 8-bit RGB per class, from the class legend colors.
std::array<std::uint8_t, 3> class_color(ClassId id);

// Image row r, column c shows cell (n_x - 1 - r, n_y - 1 - c): forward is up,
// left is left.
struct Image {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int channels = 1;  // 1 gray or 3 RGB
  std::vector<std::uint8_t> pixels;
};

// Palette colors; ignore is black.
Image render_labels(const LabelGrid& grid);
// Min-max scaled over valid cells; invalid cells black; a constant layer is
// mid-gray (128).
Image render_layer(const GridLayer& layer);
// Binary PPM (P6) or PGM (P5).
void write_image(const Image& image, const std::string& path);
void export_colormap_image(const LabelGrid& grid, const std::string& path);
void export_colormap_image(const GridLayer& layer, const std::string& path);

}  // namespace semgrid
