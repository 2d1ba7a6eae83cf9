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

// Sectioned binary raster container ("GMAP"). All integers and floats are
// little-endian:
//
//   char[4]  magic "GMAP"
//   u16      version (1)
//   f64      x_min, y_min, cell_size
//   u32      n_x, n_y
//   u16      layer count
//   per layer:
//     u16    name length, then UTF-8 name bytes
//     u8     dtype (0 = u8, 1 = f32, 2 = f64)
//     ...    n_x * n_y values, row-major (i outer, j inner)
//     u8     validity flag (0 | 1)
//     ...    if flagged: ceil(n_x * n_y / 8) bytes, bit (k % 8) of byte k / 8
//            is the validity of cell k, least significant bit first

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semgrid/core.hpp"
#include "semgrid/fusion.hpp"
#include "semgrid/gridmap.hpp"
#include "semgrid/semantic.hpp"
#include "semgrid/spherical.hpp"

namespace semgrid {

enum class DType : std::uint8_t { kU8 = 0, kF32 = 1, kF64 = 2 };

struct RasterLayer {
  std::string name;
  std::variant<std::vector<std::uint8_t>, std::vector<float>, std::vector<double>> data;
  std::optional<std::vector<std::uint8_t>> validity;  // one 0/1 byte per cell

  DType dtype() const { return static_cast<DType>(data.index()); }
  std::size_t size() const;
  double value(std::size_t k) const;
  std::vector<double> as_double() const;
};

struct RasterContainer {
  static constexpr std::uint16_t kVersion = 1;

  GridSpec spec;
  std::vector<RasterLayer> layers;

  const RasterLayer* find(std::string_view name) const;
  // Throws kFormat when absent.
  const RasterLayer& get(std::string_view name) const;
  RasterLayer& add(RasterLayer layer);
};

// Payload sizes are checked against the header before writing.
void write_raster(const RasterContainer& container, std::ostream& out);
void write_raster(const RasterContainer& container, const std::string& path);
RasterContainer read_raster(std::istream& in);
RasterContainer read_raster(const std::string& path);

// Byte-level equality of header and every payload.
bool bitwise_equal(const RasterContainer& a, const RasterContainer& b);

// --- typed views --------------------------------------------------------------
// Grid stacks: layers named after GridMapStack::kLayerNames with validity.
RasterContainer to_container(const GridMapStack& stack, DType dtype = DType::kF64);
GridMapStack stack_from_container(const RasterContainer& container);

// Semantic grids: "count" plus "<encoding>/<class>" layers.
RasterContainer to_container(const SemanticGrid& grid);
SemanticGrid semantic_from_container(const RasterContainer& container);
bool is_argmax_container(const RasterContainer& container);

// Label grids: one u8 layer (255 = ignore), named "label" or "argmax".
RasterContainer to_container(const LabelGrid& grid, std::string_view layer_name = "label");
LabelGrid label_grid_from_container(const RasterContainer& container);

// Fusion inputs: one f64 layer per channel plus a u8 "valid" layer.
RasterContainer to_container(const FusionInput& input);
FusionInput fusion_input_from_container(const RasterContainer& container);

// Late fusion heads: spec n_x = 1, n_y = parameter count; a single f64 layer
// "latefuse:in=<inputs>;hidden=<hidden>" holding w1, b1, w2, b2, then the
// input offset and scale.
RasterContainer to_container(const LateFusionHead& head);
LateFusionHead head_from_container(const RasterContainer& container);

// Range images: n_x = rows, n_y = columns, cell_size 1, and x_min / y_min
// carry the lower / upper field of view in degrees. Layers "range",
// "intensity" (f32) and "point_index" (f64, -1 when empty).
RasterContainer to_container(const RangeImage& image);
RangeImageSpec range_spec_from_container(const RasterContainer& container);

// Per-pixel class probabilities for lift_pixel_semantics: same geometry as a
// range image, layers "prob/<class>". Returns height x width x classes.
std::vector<double> pixel_probabilities_from_container(const RasterContainer& container);
RasterContainer pixel_probabilities_to_container(const RangeImageSpec& spec,
                                                 std::span<const double> probs);

}  // namespace semgrid
