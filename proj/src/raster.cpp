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

#include "semgrid/raster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "semgrid/error.hpp"

namespace semgrid {
namespace {

constexpr char kMagic[4] = {'G', 'M', 'A', 'P'};

template <typename T>
void put(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
void put_array(std::ostream& out, const std::vector<T>& values) {
  if constexpr (std::endian::native == std::endian::little || sizeof(T) == 1) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(T)));
  } else {
    for (const T& v : values) put(out, v);
  }
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get(const char* what) {
    unsigned char bytes[sizeof(T)];
    read_bytes(bytes, sizeof(T), what);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }

  template <typename T>
  std::vector<T> get_array(std::size_t count, const char* what) {
    std::vector<T> values(count);
    read_bytes(values.data(), count * sizeof(T), what);
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
      for (T& v : values) {
        auto* b = reinterpret_cast<unsigned char*>(&v);
        std::reverse(b, b + sizeof(T));
      }
    }
    return values;
  }

  void read_bytes(void* dst, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got != n) {
      throw Error(ErrorCode::kFormat, std::string("raster truncated reading ") + what +
                                          " at byte offset " + std::to_string(offset_ + got));
    }
    offset_ += n;
  }

  std::size_t offset() const { return offset_; }

 private:
  std::istream& in_;
  std::size_t offset_ = 0;
};

std::vector<std::uint8_t> pack_bits(const std::vector<std::uint8_t>& flags) {
  std::vector<std::uint8_t> packed((flags.size() + 7) / 8, 0);
  for (std::size_t k = 0; k < flags.size(); ++k) {
    if (flags[k]) packed[k / 8] |= static_cast<std::uint8_t>(1u << (k % 8));
  }
  return packed;
}

std::vector<std::uint8_t> unpack_bits(const std::vector<std::uint8_t>& packed, std::size_t n) {
  std::vector<std::uint8_t> flags(n);
  for (std::size_t k = 0; k < n; ++k) flags[k] = (packed[k / 8] >> (k % 8)) & 1u;
  return flags;
}

RasterLayer f64_layer(std::string name, std::vector<double> values,
                      std::optional<std::vector<std::uint8_t>> validity = std::nullopt) {
  RasterLayer layer;
  layer.name = std::move(name);
  layer.data = std::move(values);
  layer.validity = std::move(validity);
  return layer;
}

GridLayer grid_layer_from(const RasterContainer& c, std::string_view name) {
  const RasterLayer& layer = c.get(name);
  GridLayer out(c.spec);
  out.values = layer.as_double();
  if (layer.validity) {
    out.valid = *layer.validity;
  } else {
    std::fill(out.valid.begin(), out.valid.end(), std::uint8_t{1});
  }
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    if (!out.valid[k]) out.values[k] = 0.0;
  }
  return out;
}

}  // namespace

std::size_t RasterLayer::size() const {
  return std::visit([](const auto& v) { return v.size(); }, data);
}

double RasterLayer::value(std::size_t k) const {
  return std::visit([k](const auto& v) { return static_cast<double>(v[k]); }, data);
}

std::vector<double> RasterLayer::as_double() const {
  return std::visit([](const auto& v) { return std::vector<double>(v.begin(), v.end()); }, data);
}

const RasterLayer* RasterContainer::find(std::string_view name) const {
  for (const RasterLayer& layer : layers) {
    if (layer.name == name) return &layer;
  }
  return nullptr;
}

const RasterLayer& RasterContainer::get(std::string_view name) const {
  if (const RasterLayer* layer = find(name)) return *layer;
  throw Error(ErrorCode::kFormat, "raster has no layer '" + std::string(name) + "'");
}

RasterLayer& RasterContainer::add(RasterLayer layer) {
  layers.push_back(std::move(layer));
  return layers.back();
}

void write_raster(const RasterContainer& c, std::ostream& out) {
  c.spec.validate();
  const std::size_t cells = c.spec.cell_count();
  if (c.layers.size() > 0xFFFF) throw Error(ErrorCode::kInvalidArgument, "too many layers");
  for (const RasterLayer& layer : c.layers) {
    if (layer.size() != cells || (layer.validity && layer.validity->size() != cells)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "layer '" + layer.name + "' does not match the grid size");
    }
    if (layer.name.size() > 0xFFFF) throw Error(ErrorCode::kInvalidArgument, "layer name too long");
  }
  out.write(kMagic, 4);
  put<std::uint16_t>(out, RasterContainer::kVersion);
  put<double>(out, c.spec.x_min);
  put<double>(out, c.spec.y_min);
  put<double>(out, c.spec.cell_size);
  put<std::uint32_t>(out, c.spec.n_x);
  put<std::uint32_t>(out, c.spec.n_y);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(c.layers.size()));
  for (const RasterLayer& layer : c.layers) {
    put<std::uint16_t>(out, static_cast<std::uint16_t>(layer.name.size()));
    out.write(layer.name.data(), static_cast<std::streamsize>(layer.name.size()));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(layer.dtype()));
    std::visit([&](const auto& v) { put_array(out, v); }, layer.data);
    put<std::uint8_t>(out, layer.validity ? 1 : 0);
    if (layer.validity) put_array(out, pack_bits(*layer.validity));
  }
  if (!out) throw Error(ErrorCode::kIo, "raster write failed");
}

void write_raster(const RasterContainer& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  write_raster(c, out);
}

RasterContainer read_raster(std::istream& in) {
  Reader r(in);
  char magic[4];
  r.read_bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorCode::kFormat, "bad raster magic");
  const auto version = r.get<std::uint16_t>("version");
  if (version != RasterContainer::kVersion) {
    throw Error(ErrorCode::kFormat, "unsupported raster version " + std::to_string(version));
  }
  RasterContainer c;
  c.spec.x_min = r.get<double>("spec");
  c.spec.y_min = r.get<double>("spec");
  c.spec.cell_size = r.get<double>("spec");
  c.spec.n_x = r.get<std::uint32_t>("spec");
  c.spec.n_y = r.get<std::uint32_t>("spec");
  try {
    c.spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, std::string("raster header: ") + e.what());
  }
  const std::size_t cells = c.spec.cell_count();
  const auto layer_count = r.get<std::uint16_t>("layer count");
  for (std::uint16_t l = 0; l < layer_count; ++l) {
    RasterLayer layer;
    const auto name_length = r.get<std::uint16_t>("layer name");
    layer.name.resize(name_length);
    r.read_bytes(layer.name.data(), name_length, "layer name");
    const std::size_t dtype_offset = r.offset();
    switch (r.get<std::uint8_t>("dtype")) {
      case 0:
        layer.data = r.get_array<std::uint8_t>(cells, "u8 payload");
        break;
      case 1:
        layer.data = r.get_array<float>(cells, "f32 payload");
        break;
      case 2:
        layer.data = r.get_array<double>(cells, "f64 payload");
        break;
      default:
        throw Error(ErrorCode::kFormat,
                    "unknown dtype at byte offset " + std::to_string(dtype_offset));
    }
    const std::size_t flag_offset = r.offset();
    const auto has_validity = r.get<std::uint8_t>("validity flag");
    if (has_validity > 1) {
      throw Error(ErrorCode::kFormat,
                  "bad validity flag at byte offset " + std::to_string(flag_offset));
    }
    if (has_validity) {
      layer.validity = unpack_bits(r.get_array<std::uint8_t>((cells + 7) / 8, "validity"), cells);
    }
    c.layers.push_back(std::move(layer));
  }
  return c;
}

RasterContainer read_raster(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return read_raster(in);
}

bool bitwise_equal(const RasterContainer& a, const RasterContainer& b) {
  const auto same_double = [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; };
  if (!same_double(a.spec.x_min, b.spec.x_min) || !same_double(a.spec.y_min, b.spec.y_min) ||
      !same_double(a.spec.cell_size, b.spec.cell_size) || a.spec.n_x != b.spec.n_x ||
      a.spec.n_y != b.spec.n_y || a.layers.size() != b.layers.size()) {
    return false;
  }
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    const RasterLayer& la = a.layers[l];
    const RasterLayer& lb = b.layers[l];
    if (la.name != lb.name || la.dtype() != lb.dtype() || la.validity != lb.validity) return false;
    const bool same = std::visit(
        [&](const auto& va) {
          using V = std::decay_t<decltype(va)>;
          const auto& vb = std::get<V>(lb.data);
          return va.size() == vb.size() &&
                 std::memcmp(va.data(), vb.data(), va.size() * sizeof(typename V::value_type)) == 0;
        },
        la.data);
    if (!same) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Typed views

RasterContainer to_container(const GridMapStack& stack, DType dtype) {
  RasterContainer c;
  c.spec = stack.spec();
  const auto layers = stack.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    RasterLayer layer;
    layer.name = std::string(GridMapStack::kLayerNames[l]);
    switch (dtype) {
      case DType::kF64:
        layer.data = layers[l]->values;
        break;
      case DType::kF32:
        layer.data = std::vector<float>(layers[l]->values.begin(), layers[l]->values.end());
        break;
      case DType::kU8:
        throw Error(ErrorCode::kInvalidArgument, "grid stacks are stored as f32 or f64");
    }
    layer.validity = layers[l]->valid;
    c.add(std::move(layer));
  }
  return c;
}

GridMapStack stack_from_container(const RasterContainer& c) {
  GridMapStack stack;
  auto targets = stack.layers();
  for (std::size_t l = 0; l < targets.size(); ++l) {
    *targets[l] = grid_layer_from(c, GridMapStack::kLayerNames[l]);
  }
  return stack;
}

RasterContainer to_container(const SemanticGrid& grid) {
  if (grid.encoding == SemanticEncoding::kArgmax) {
    throw Error(ErrorCode::kInvalidArgument, "argmax grids are stored as label grids");
  }
  RasterContainer c;
  c.spec = grid.spec;
  const std::size_t cells = grid.spec.cell_count();
  c.add(f64_layer("count", std::vector<double>(grid.count.begin(), grid.count.end())));
  const std::string prefix = std::string(encoding_name(grid.encoding)) + "/";
  for (std::size_t ch = 0; ch < kNumClasses; ++ch) {
    std::vector<double> plane(cells);
    for (std::size_t k = 0; k < cells; ++k) plane[k] = grid.mass[k * kNumClasses + ch];
    c.add(f64_layer(prefix + std::string(class_name(static_cast<ClassId>(ch))), std::move(plane)));
  }
  return c;
}

bool is_argmax_container(const RasterContainer& c) { return c.find("argmax") != nullptr; }

SemanticGrid semantic_from_container(const RasterContainer& c) {
  std::optional<SemanticEncoding> encoding;
  for (auto e : {SemanticEncoding::kHistogram, SemanticEncoding::kSummed, SemanticEncoding::kMean}) {
    if (c.find(std::string(encoding_name(e)) + "/building")) encoding = e;
  }
  if (!encoding) throw Error(ErrorCode::kFormat, "raster holds no semantic class layers");
  SemanticGrid grid(c.spec, *encoding);
  const std::size_t cells = c.spec.cell_count();
  const RasterLayer& count = c.get("count");
  for (std::size_t k = 0; k < cells; ++k) {
    const double v = count.value(k);
    if (!(v >= 0.0) || v != std::floor(v) || v > 4294967295.0) {
      throw Error(ErrorCode::kFormat, "count layer holds a non-count value");
    }
    grid.count[k] = static_cast<std::uint32_t>(v);
  }
  const std::string prefix = std::string(encoding_name(*encoding)) + "/";
  for (std::size_t ch = 0; ch < kNumClasses; ++ch) {
    const RasterLayer& plane = c.get(prefix + std::string(class_name(static_cast<ClassId>(ch))));
    for (std::size_t k = 0; k < cells; ++k) grid.mass[k * kNumClasses + ch] = plane.value(k);
  }
  return grid;
}

RasterContainer to_container(const LabelGrid& grid, std::string_view layer_name) {
  RasterContainer c;
  c.spec = grid.spec;
  RasterLayer layer;
  layer.name = std::string(layer_name);
  std::vector<std::uint8_t> codes(grid.labels.size());
  for (std::size_t k = 0; k < codes.size(); ++k) codes[k] = grid.labels[k].code();
  layer.data = std::move(codes);
  c.add(std::move(layer));
  return c;
}

LabelGrid label_grid_from_container(const RasterContainer& c) {
  const RasterLayer* layer = c.find("label");
  if (!layer) layer = c.find("argmax");
  if (!layer) throw Error(ErrorCode::kFormat, "raster holds no 'label' layer");
  if (layer->dtype() != DType::kU8) throw Error(ErrorCode::kFormat, "label layer must be u8");
  const auto& codes = std::get<std::vector<std::uint8_t>>(layer->data);
  LabelGrid grid(c.spec);
  for (std::size_t k = 0; k < codes.size(); ++k) grid.labels[k] = Label::from_code(codes[k]);
  return grid;
}

RasterContainer to_container(const FusionInput& input) {
  RasterContainer c;
  c.spec = input.spec;
  const std::size_t cells = input.cells();
  for (int ch = 0; ch < input.channels(); ++ch) {
    std::vector<double> plane(cells);
    for (std::size_t k = 0; k < cells; ++k) plane[k] = input.features(ch, static_cast<Eigen::Index>(k));
    c.add(f64_layer(input.channel_names[static_cast<std::size_t>(ch)], std::move(plane)));
  }
  RasterLayer valid;
  valid.name = "valid";
  valid.data = input.valid;
  c.add(std::move(valid));
  return c;
}

FusionInput fusion_input_from_container(const RasterContainer& c) {
  FusionInput input;
  input.spec = c.spec;
  const std::size_t cells = c.spec.cell_count();
  std::vector<const RasterLayer*> channels;
  for (const RasterLayer& layer : c.layers) {
    if (layer.name == "valid") continue;
    channels.push_back(&layer);
    input.channel_names.push_back(layer.name);
  }
  if (channels.empty()) throw Error(ErrorCode::kFormat, "fusion input holds no channels");
  input.features.resize(static_cast<Eigen::Index>(channels.size()), static_cast<Eigen::Index>(cells));
  for (std::size_t ch = 0; ch < channels.size(); ++ch) {
    for (std::size_t k = 0; k < cells; ++k) {
      input.features(static_cast<Eigen::Index>(ch), static_cast<Eigen::Index>(k)) = channels[ch]->value(k);
    }
  }
  if (const RasterLayer* valid = c.find("valid")) {
    input.valid.resize(cells);
    for (std::size_t k = 0; k < cells; ++k) input.valid[k] = valid->value(k) != 0.0 ? 1 : 0;
  } else {
    input.valid.assign(cells, 1);
  }
  return input;
}

RasterContainer to_container(const LateFusionHead& head) {
  head.validate();
  std::vector<double> values = head.parameters();
  values.insert(values.end(), head.input_offset.data(),
                head.input_offset.data() + head.input_offset.size());
  values.insert(values.end(), head.input_scale.data(),
                head.input_scale.data() + head.input_scale.size());
  RasterContainer c;
  c.spec = GridSpec{0.0, 0.0, 1.0, 1, static_cast<std::uint32_t>(values.size())};
  c.add(f64_layer("latefuse:in=" + std::to_string(head.inputs()) +
                      ";hidden=" + std::to_string(head.hidden()),
                  std::move(values)));
  return c;
}

LateFusionHead head_from_container(const RasterContainer& c) {
  if (c.layers.size() != 1 || c.layers[0].name.rfind("latefuse:", 0) != 0) {
    throw Error(ErrorCode::kFormat, "raster does not hold a late fusion head");
  }
  const RasterLayer& layer = c.layers[0];
  int inputs = 0, hidden = 0;
  if (std::sscanf(layer.name.c_str(), "latefuse:in=%d;hidden=%d", &inputs, &hidden) != 2 ||
      inputs < 1 || hidden < 1) {
    throw Error(ErrorCode::kFormat, "malformed head layer name '" + layer.name + "'");
  }
  LateFusionHead head = LateFusionHead::initialize(inputs, hidden, 0);
  const std::vector<double> values = layer.as_double();
  const std::size_t trainable = head.parameter_count();
  if (values.size() != trainable + 2 * static_cast<std::size_t>(inputs)) {
    throw Error(ErrorCode::kFormat, "head payload size does not match its shape");
  }
  head.set_parameters(std::span<const double>(values).first(trainable));
  for (int i = 0; i < inputs; ++i) {
    head.input_offset(i) = values[trainable + static_cast<std::size_t>(i)];
    head.input_scale(i) = values[trainable + static_cast<std::size_t>(inputs + i)];
  }
  head.validate();
  return head;
}

RasterContainer to_container(const RangeImage& image) {
  RasterContainer c;
  c.spec = GridSpec{image.spec.fov_down_deg, image.spec.fov_up_deg, 1.0, image.spec.height,
                    image.spec.width};
  RasterLayer range;
  range.name = "range";
  range.data = std::vector<float>(image.range.begin(), image.range.end());
  c.add(std::move(range));
  RasterLayer intensity;
  intensity.name = "intensity";
  intensity.data = std::vector<float>(image.intensity.begin(), image.intensity.end());
  c.add(std::move(intensity));
  c.add(f64_layer("point_index",
                  std::vector<double>(image.point_index.begin(), image.point_index.end())));
  return c;
}

RangeImageSpec range_spec_from_container(const RasterContainer& c) {
  RangeImageSpec spec;
  spec.height = c.spec.n_x;
  spec.width = c.spec.n_y;
  spec.fov_down_deg = c.spec.x_min;
  spec.fov_up_deg = c.spec.y_min;
  spec.validate();
  return spec;
}

std::vector<double> pixel_probabilities_from_container(const RasterContainer& c) {
  const std::size_t pixels = c.spec.cell_count();
  std::vector<double> probs(pixels * kNumClasses);
  for (std::size_t ch = 0; ch < kNumClasses; ++ch) {
    const RasterLayer& plane =
        c.get("prob/" + std::string(class_name(static_cast<ClassId>(ch))));
    for (std::size_t k = 0; k < pixels; ++k) probs[k * kNumClasses + ch] = plane.value(k);
  }
  return probs;
}

RasterContainer pixel_probabilities_to_container(const RangeImageSpec& spec,
                                                 std::span<const double> probs) {
  if (probs.size() != spec.pixel_count() * kNumClasses) {
    throw Error(ErrorCode::kDimensionMismatch, "pixel probability raster has wrong size");
  }
  RasterContainer c;
  c.spec = GridSpec{spec.fov_down_deg, spec.fov_up_deg, 1.0, spec.height, spec.width};
  for (std::size_t ch = 0; ch < kNumClasses; ++ch) {
    std::vector<double> plane(spec.pixel_count());
    for (std::size_t k = 0; k < plane.size(); ++k) plane[k] = probs[k * kNumClasses + ch];
    c.add(f64_layer("prob/" + std::string(class_name(static_cast<ClassId>(ch))), std::move(plane)));
  }
  return c;
}

}  // namespace semgrid
