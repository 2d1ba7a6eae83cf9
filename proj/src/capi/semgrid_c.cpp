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

#include "semgrid/semgrid.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>
#include <vector>

#include "semgrid/core.hpp"
#include "semgrid/error.hpp"
#include "semgrid/eval.hpp"
#include "semgrid/fusion.hpp"
#include "semgrid/gridmap.hpp"
#include "semgrid/groundtruth.hpp"
#include "semgrid/io.hpp"
#include "semgrid/raster.hpp"
#include "semgrid/semantic.hpp"
#include "semgrid/spherical.hpp"
#include "semgrid/synth.hpp"

struct sg_cloud {
  semgrid::PointCloud cloud;
};
struct sg_classmap {
  semgrid::ClassMap map;
};
struct sg_raster {
  semgrid::RasterContainer c;
};
struct sg_sequence {
  semgrid::ScanSequence seq;
};
struct sg_head {
  semgrid::LateFusionHead head;
};
struct sg_confusion {
  semgrid::ConfusionMatrix cm;
};

namespace {

thread_local std::string g_last_error;

sg_status fail(sg_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

sg_status map_code(semgrid::ErrorCode code) {
  switch (code) {
    case semgrid::ErrorCode::kInvalidArgument: return SG_ERR_INVALID_ARGUMENT;
    case semgrid::ErrorCode::kIo: return SG_ERR_IO;
    case semgrid::ErrorCode::kFormat: return SG_ERR_FORMAT;
    case semgrid::ErrorCode::kUnknownLabel: return SG_ERR_UNKNOWN_LABEL;
    case semgrid::ErrorCode::kDimensionMismatch: return SG_ERR_DIMENSION;
    case semgrid::ErrorCode::kNumeric: return SG_ERR_NUMERIC;
  }
  return SG_ERR_INTERNAL;
}

template <typename F>
sg_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SG_OK;
  } catch (const semgrid::Error& e) {
    return fail(map_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SG_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw semgrid::Error(semgrid::ErrorCode::kInvalidArgument, what);
}

semgrid::GridSpec to_spec(const sg_grid_spec* s) {
  require(s != nullptr, "grid spec is null");
  semgrid::GridSpec spec{s->x_min, s->y_min, s->cell_size, s->n_x, s->n_y};
  spec.validate();
  return spec;
}

sg_grid_spec from_spec(const semgrid::GridSpec& s) {
  return sg_grid_spec{s.x_min, s.y_min, s.cell_size, s.n_x, s.n_y};
}

semgrid::Pose to_pose(const double* pose) {
  require(pose != nullptr, "pose is null");
  return semgrid::Pose::from_row_major_3x4(std::span<const double, 12>(pose, 12));
}

template <typename T>
void emit(T** out, T* value) {
  require(out != nullptr, "output pointer is null");
  *out = value;
}

sg_raster* new_raster(semgrid::RasterContainer c) { return new sg_raster{std::move(c)}; }

}  // namespace

extern "C" {

const char* sg_last_error(void) { return g_last_error.c_str(); }

const char* sg_status_string(sg_status status) {
  switch (status) {
    case SG_OK: return "ok";
    case SG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SG_ERR_IO: return "i/o error";
    case SG_ERR_FORMAT: return "format error";
    case SG_ERR_UNKNOWN_LABEL: return "unknown label";
    case SG_ERR_DIMENSION: return "dimension mismatch";
    case SG_ERR_NUMERIC: return "numeric error";
    case SG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* sg_version(void) { return "0.1.0"; }

const char* sg_class_name(int class_id) {
  if (class_id < 0 || class_id >= SG_NUM_CLASSES) return nullptr;
  return semgrid::class_name(static_cast<semgrid::ClassId>(class_id)).data();
}

int sg_class_from_name(const char* name) {
  if (!name) return -1;
  const auto id = semgrid::class_from_name(name);
  return id ? static_cast<int>(*id) : -1;
}

void sg_class_color(int class_id, uint8_t rgb[3]) {
  if (!rgb) return;
  if (class_id < 0 || class_id >= SG_NUM_CLASSES) {
    rgb[0] = rgb[1] = rgb[2] = 0;
    return;
  }
  const auto c = semgrid::class_color(static_cast<semgrid::ClassId>(class_id));
  std::memcpy(rgb, c.data(), 3);
}

sg_grid_spec sg_grid_spec_default(void) { return from_spec(semgrid::GridSpec::default_spec()); }

sg_status sg_grid_spec_parse(const char* text, sg_grid_spec* out) {
  return guard([&] {
    require(text && out, "null argument");
    *out = from_spec(semgrid::GridSpec::parse(text));
  });
}

sg_status sg_cell_index(const sg_grid_spec* spec, double x, double y, int32_t* i, int32_t* j,
                        int* in_bounds) {
  return guard([&] {
    require(i && j && in_bounds, "null argument");
    const auto c = semgrid::cell_index(x, y, to_spec(spec));
    *in_bounds = c ? 1 : 0;
    *i = c ? c->i : -1;
    *j = c ? c->j : -1;
  });
}

sg_range_spec sg_range_spec_default(void) {
  const semgrid::RangeImageSpec s;
  return sg_range_spec{s.width, s.height, s.fov_up_deg, s.fov_down_deg};
}

/* class maps */

sg_status sg_classmap_default(sg_classmap** out) {
  return guard([&] { emit(out, new sg_classmap{semgrid::ClassMap::semantic_kitti()}); });
}

sg_status sg_classmap_load(const char* path, sg_classmap** out) {
  return guard([&] {
    require(path, "path is null");
    emit(out, new sg_classmap{semgrid::ClassMap::load(path)});
  });
}

sg_status sg_classmap_remap(const sg_classmap* map, uint16_t raw, uint8_t* label) {
  return guard([&] {
    require(map && label, "null argument");
    *label = map->map.remap(raw).code();
  });
}

void sg_classmap_free(sg_classmap* map) { delete map; }

/* point clouds */

sg_status sg_cloud_create(const double* xyzi, size_t count, sg_cloud** out) {
  return guard([&] {
    require(xyzi || count == 0, "points are null");
    std::vector<semgrid::Point> pts(count);
    for (size_t k = 0; k < count; ++k) {
      pts[k] = {xyzi[4 * k], xyzi[4 * k + 1], xyzi[4 * k + 2], xyzi[4 * k + 3]};
    }
    emit(out, new sg_cloud{semgrid::PointCloud(std::move(pts))});
  });
}

sg_status sg_cloud_read(const char* path, sg_cloud** out) {
  return guard([&] {
    require(path, "path is null");
    emit(out, new sg_cloud{semgrid::read_point_cloud(path)});
  });
}

sg_status sg_cloud_write(const sg_cloud* cloud, const char* path) {
  return guard([&] {
    require(cloud && path, "null argument");
    semgrid::write_point_cloud(cloud->cloud, path);
  });
}

sg_status sg_cloud_clone(const sg_cloud* cloud, sg_cloud** out) {
  return guard([&] {
    require(cloud, "cloud is null");
    emit(out, new sg_cloud{cloud->cloud});
  });
}

void sg_cloud_free(sg_cloud* cloud) { delete cloud; }

size_t sg_cloud_size(const sg_cloud* cloud) { return cloud ? cloud->cloud.size() : 0; }

sg_status sg_cloud_get_points(const sg_cloud* cloud, double* xyzi, size_t count) {
  return guard([&] {
    require(cloud && xyzi, "null argument");
    if (count != cloud->cloud.size()) {
      throw semgrid::Error(semgrid::ErrorCode::kDimensionMismatch, "point count mismatch");
    }
    for (size_t k = 0; k < count; ++k) {
      const auto& p = cloud->cloud[k];
      xyzi[4 * k] = p.x;
      xyzi[4 * k + 1] = p.y;
      xyzi[4 * k + 2] = p.z;
      xyzi[4 * k + 3] = p.intensity;
    }
  });
}

sg_status sg_cloud_read_labels(sg_cloud* cloud, const char* path, const sg_classmap* map) {
  return guard([&] {
    require(cloud && path, "null argument");
    const semgrid::ClassMap fallback = map ? semgrid::ClassMap() : semgrid::ClassMap::semantic_kitti();
    cloud->cloud.set_labels(semgrid::read_labels(path, map ? map->map : fallback));
  });
}

sg_status sg_cloud_write_labels(const sg_cloud* cloud, const sg_classmap* map, const char* path) {
  return guard([&] {
    require(cloud && path, "null argument");
    require(cloud->cloud.has_labels(), "cloud has no labels");
    const semgrid::ClassMap fallback = map ? semgrid::ClassMap() : semgrid::ClassMap::semantic_kitti();
    semgrid::write_labels(cloud->cloud.labels(), map ? map->map : fallback, path);
  });
}

sg_status sg_cloud_set_labels(sg_cloud* cloud, const uint8_t* labels, size_t count) {
  return guard([&] {
    require(cloud && (labels || count == 0), "null argument");
    std::vector<semgrid::Label> v(count);
    for (size_t k = 0; k < count; ++k) v[k] = semgrid::Label::from_code(labels[k]);
    cloud->cloud.set_labels(std::move(v));
  });
}

sg_status sg_cloud_get_labels(const sg_cloud* cloud, uint8_t* labels, size_t count) {
  return guard([&] {
    require(cloud && labels, "null argument");
    require(cloud->cloud.has_labels(), "cloud has no labels");
    if (count != cloud->cloud.size()) {
      throw semgrid::Error(semgrid::ErrorCode::kDimensionMismatch, "label count mismatch");
    }
    for (size_t k = 0; k < count; ++k) labels[k] = cloud->cloud.labels()[k].code();
  });
}

int sg_cloud_has_labels(const sg_cloud* cloud) { return cloud && cloud->cloud.has_labels(); }

sg_status sg_cloud_set_probabilities(sg_cloud* cloud, const double* rows, size_t count) {
  return guard([&] {
    require(cloud && (rows || count == 0), "null argument");
    cloud->cloud.set_probabilities(std::vector<double>(rows, rows + count * SG_NUM_CLASSES));
  });
}

sg_status sg_cloud_get_probabilities(const sg_cloud* cloud, double* rows, size_t count) {
  return guard([&] {
    require(cloud && rows, "null argument");
    require(cloud->cloud.has_probabilities(), "cloud has no probabilities");
    if (count != cloud->cloud.size()) {
      throw semgrid::Error(semgrid::ErrorCode::kDimensionMismatch, "row count mismatch");
    }
    const auto p = cloud->cloud.probabilities();
    std::copy(p.begin(), p.end(), rows);
  });
}

sg_status sg_cloud_read_probabilities(sg_cloud* cloud, const char* path) {
  return guard([&] {
    require(cloud && path, "null argument");
    cloud->cloud.set_probabilities(semgrid::read_probabilities(path));
  });
}

sg_status sg_cloud_write_probabilities(const sg_cloud* cloud, const char* path) {
  return guard([&] {
    require(cloud && path, "null argument");
    require(cloud->cloud.has_probabilities(), "cloud has no probabilities");
    semgrid::write_probabilities(cloud->cloud.probabilities(), path);
  });
}

int sg_cloud_has_probabilities(const sg_cloud* cloud) {
  return cloud && cloud->cloud.has_probabilities();
}

sg_status sg_cloud_synth_probabilities(sg_cloud* cloud, double flip_rate, double concentration,
                                       uint64_t seed) {
  return guard([&] {
    require(cloud, "cloud is null");
    require(cloud->cloud.has_labels(), "cloud has no labels");
    cloud->cloud.set_probabilities(
        semgrid::synth_probabilities(cloud->cloud.labels(), flip_rate, concentration, seed));
  });
}

sg_status sg_cloud_transform(sg_cloud* cloud, const double pose[12]) {
  return guard([&] {
    require(cloud, "cloud is null");
    cloud->cloud = semgrid::transform_points(cloud->cloud, to_pose(pose));
  });
}

/* rasters */

sg_status sg_raster_read(const char* path, sg_raster** out) {
  return guard([&] {
    require(path, "path is null");
    emit(out, new_raster(semgrid::read_raster(std::string(path))));
  });
}

sg_status sg_raster_write(const sg_raster* raster, const char* path) {
  return guard([&] {
    require(raster && path, "null argument");
    semgrid::write_raster(raster->c, std::string(path));
  });
}

void sg_raster_free(sg_raster* raster) { delete raster; }

sg_status sg_raster_spec(const sg_raster* raster, sg_grid_spec* out) {
  return guard([&] {
    require(raster && out, "null argument");
    *out = from_spec(raster->c.spec);
  });
}

size_t sg_raster_layer_count(const sg_raster* raster) {
  return raster ? raster->c.layers.size() : 0;
}

const char* sg_raster_layer_name(const sg_raster* raster, size_t index) {
  if (!raster || index >= raster->c.layers.size()) return nullptr;
  return raster->c.layers[index].name.c_str();
}

int sg_raster_find_layer(const sg_raster* raster, const char* name) {
  if (!raster || !name) return -1;
  for (size_t k = 0; k < raster->c.layers.size(); ++k) {
    if (raster->c.layers[k].name == name) return static_cast<int>(k);
  }
  return -1;
}

sg_dtype sg_raster_layer_dtype(const sg_raster* raster, size_t index) {
  if (!raster || index >= raster->c.layers.size()) return SG_DTYPE_U8;
  return static_cast<sg_dtype>(raster->c.layers[index].dtype());
}

sg_status sg_raster_layer_values(const sg_raster* raster, size_t index, double* values,
                                 uint8_t* validity, size_t count) {
  return guard([&] {
    require(raster && values, "null argument");
    require(index < raster->c.layers.size(), "layer index out of range");
    const auto& layer = raster->c.layers[index];
    if (count != layer.size()) {
      throw semgrid::Error(semgrid::ErrorCode::kDimensionMismatch, "value count mismatch");
    }
    for (size_t k = 0; k < count; ++k) values[k] = layer.value(k);
    if (validity) {
      for (size_t k = 0; k < count; ++k) validity[k] = layer.validity ? (*layer.validity)[k] : 1;
    }
  });
}

sg_status sg_raster_render(const sg_raster* raster, const char* layer, const char* path) {
  return guard([&] {
    require(raster && layer && path, "null argument");
    const std::string name(layer);
    const auto& l = raster->c.get(name);
    if ((name == "label" || name == "argmax") && l.dtype() == semgrid::DType::kU8) {
      semgrid::RasterContainer only;
      only.spec = raster->c.spec;
      only.layers.push_back(l);
      only.layers.back().name = "label";
      semgrid::export_colormap_image(semgrid::label_grid_from_container(only), path);
      return;
    }
    semgrid::GridLayer g(raster->c.spec);
    g.values = l.as_double();
    if (l.validity) {
      g.valid = *l.validity;
    } else {
      std::fill(g.valid.begin(), g.valid.end(), std::uint8_t{1});
    }
    semgrid::export_colormap_image(g, path);
  });
}

/* encoders */

sg_status sg_encode_multilayer(const sg_cloud* cloud, const sg_grid_spec* spec,
                               const double origin[3], int use_f32, sg_raster** out) {
  return guard([&] {
    require(cloud, "cloud is null");
    const Eigen::Vector3d o = origin ? Eigen::Vector3d(origin[0], origin[1], origin[2])
                                     : Eigen::Vector3d::Zero();
    const auto stack = semgrid::encode_multilayer(cloud->cloud, to_spec(spec), o);
    emit(out, new_raster(semgrid::to_container(
                  stack, use_f32 ? semgrid::DType::kF32 : semgrid::DType::kF64)));
  });
}

sg_status sg_project_range_image(const sg_cloud* cloud, const sg_range_spec* spec,
                                 sg_raster** out, size_t* skipped) {
  return guard([&] {
    require(cloud && spec, "null argument");
    semgrid::RangeImageSpec s{spec->width, spec->height, spec->fov_up_deg, spec->fov_down_deg};
    const auto image = semgrid::project_to_range_image(cloud->cloud, s);
    if (skipped) *skipped = image.skipped_points;
    emit(out, new_raster(semgrid::to_container(image)));
  });
}

sg_status sg_lift_pixel_semantics(sg_cloud* cloud, const sg_raster* pixel_probs) {
  return guard([&] {
    require(cloud && pixel_probs, "null argument");
    const auto spec = semgrid::range_spec_from_container(pixel_probs->c);
    const auto probs = semgrid::pixel_probabilities_from_container(pixel_probs->c);
    const auto image = semgrid::project_to_range_image(cloud->cloud, spec);
    cloud->cloud = semgrid::lift_pixel_semantics(image, probs, cloud->cloud);
  });
}

sg_status sg_semantic_encode(const sg_cloud* cloud, const sg_grid_spec* spec,
                             sg_encoding encoding, sg_raster** out) {
  return guard([&] {
    require(cloud, "cloud is null");
    const auto s = to_spec(spec);
    switch (encoding) {
      case SG_ENCODING_HIST:
        emit(out, new_raster(semgrid::to_container(semgrid::encode_histogram(cloud->cloud, s))));
        return;
      case SG_ENCODING_ARGMAX:
        emit(out, new_raster(semgrid::to_container(
                      semgrid::encode_argmax(semgrid::encode_histogram(cloud->cloud, s)),
                      "argmax")));
        return;
      case SG_ENCODING_SUM:
        emit(out, new_raster(semgrid::to_container(semgrid::encode_summed(cloud->cloud, s))));
        return;
      case SG_ENCODING_MEAN:
        emit(out, new_raster(semgrid::to_container(
                      semgrid::encode_mean(semgrid::encode_summed(cloud->cloud, s)))));
        return;
    }
    require(false, "unknown encoding");
  });
}

/* ground truth */

sg_status sg_ground_truth_sparse(const sg_cloud* cloud, const sg_grid_spec* spec,
                                 sg_raster** out) {
  return guard([&] {
    require(cloud, "cloud is null");
    emit(out, new_raster(semgrid::to_container(
                  semgrid::sparse_ground_truth(cloud->cloud, to_spec(spec)))));
  });
}

sg_status sg_sequence_create(sg_sequence** out) {
  return guard([&] { emit(out, new sg_sequence{}); });
}

sg_status sg_sequence_add(sg_sequence* seq, const sg_cloud* cloud, const double pose[12]) {
  return guard([&] {
    require(seq && cloud, "null argument");
    require(cloud->cloud.has_labels(), "scan has no labels");
    seq->seq.scans.push_back(semgrid::Scan{cloud->cloud, to_pose(pose)});
  });
}

size_t sg_sequence_size(const sg_sequence* seq) { return seq ? seq->seq.scans.size() : 0; }

void sg_sequence_free(sg_sequence* seq) { delete seq; }

sg_dense_options sg_dense_options_default(void) {
  sg_dense_options o{};
  const semgrid::DenseOptions d;
  o.window = d.window;
  for (auto c : d.dynamic_classes) o.dynamic_classes[static_cast<int>(c)] = 1;
  return o;
}

sg_status sg_ground_truth_dense(const sg_sequence* seq, size_t reference,
                                const sg_grid_spec* spec, const sg_dense_options* options,
                                sg_raster** out) {
  return guard([&] {
    require(seq, "sequence is null");
    require(reference < seq->seq.scans.size(), "reference index out of range");
    const sg_dense_options o = options ? *options : sg_dense_options_default();
    semgrid::DenseOptions d;
    d.window = o.window;
    d.dynamic_classes.clear();
    for (int c = 0; c < SG_NUM_CLASSES; ++c) {
      if (o.dynamic_classes[c]) d.dynamic_classes.insert(static_cast<semgrid::ClassId>(c));
    }
    if (o.use_z_min) d.z_min = o.z_min;
    if (o.use_z_max) d.z_max = o.z_max;
    semgrid::ScanSequence view;
    view.reference = reference;
    view.scans = seq->seq.scans;
    emit(out, new_raster(semgrid::to_container(
                  semgrid::dense_ground_truth(view, to_spec(spec), d))));
  });
}

sg_status sg_read_poses(const char* path, const char* calib_path, double* poses, size_t capacity,
                        size_t* count) {
  return guard([&] {
    require(path && count, "null argument");
    std::optional<semgrid::Pose> calib;
    if (calib_path) calib = semgrid::read_calibration(calib_path);
    const auto list = semgrid::read_poses(path, calib);
    *count = list.size();
    if (!poses) return;
    require(capacity >= list.size(), "pose buffer too small");
    for (size_t k = 0; k < list.size(); ++k) {
      const auto m = list[k].to_row_major_3x4();
      std::copy(m.begin(), m.end(), poses + 12 * k);
    }
  });
}

/* evaluation */

sg_status sg_confusion_create(sg_confusion** out) {
  return guard([&] { emit(out, new sg_confusion{}); });
}

void sg_confusion_free(sg_confusion* cm) { delete cm; }

sg_status sg_confusion_accumulate(sg_confusion* cm, const sg_raster* prediction,
                                  const sg_raster* ground_truth) {
  return guard([&] {
    require(cm && prediction && ground_truth, "null argument");
    semgrid::accumulate(cm->cm, semgrid::label_grid_from_container(prediction->c),
                        semgrid::label_grid_from_container(ground_truth->c));
  });
}

sg_status sg_confusion_iou(const sg_confusion* cm, double iou[SG_NUM_CLASSES],
                           uint8_t defined[SG_NUM_CLASSES]) {
  return guard([&] {
    require(cm && iou && defined, "null argument");
    const auto v = semgrid::iou_per_class(cm->cm);
    for (int c = 0; c < SG_NUM_CLASSES; ++c) {
      defined[c] = v[c].has_value();
      iou[c] = v[c].value_or(0.0);
    }
  });
}

sg_status sg_confusion_miou(const sg_confusion* cm, double* miou) {
  return guard([&] {
    require(cm && miou, "null argument");
    *miou = semgrid::mean_iou(semgrid::iou_per_class(cm->cm));
  });
}

sg_status sg_mean_iou(const double* iou, const uint8_t* defined, size_t count, double* miou) {
  return guard([&] {
    require(iou && miou, "null argument");
    std::vector<std::optional<double>> v(count);
    for (size_t k = 0; k < count; ++k) {
      if (!defined || defined[k]) v[k] = iou[k];
    }
    *miou = semgrid::mean_iou(v);
  });
}

sg_status sg_confusion_report(const sg_confusion* cm, int json, char** out) {
  return guard([&] {
    require(cm && out, "null argument");
    const std::string s = json ? semgrid::report_json(cm->cm) : semgrid::report_text(cm->cm);
    char* buf = static_cast<char*>(std::malloc(s.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, s.c_str(), s.size() + 1);
    *out = buf;
  });
}

void sg_string_free(char* s) { std::free(s); }

/* fusion */

sg_status sg_fusion_assemble(const sg_raster* stack, const sg_raster* semantic, sg_raster** out) {
  return guard([&] {
    require(stack && semantic, "null argument");
    const auto s = semgrid::stack_from_container(stack->c);
    const auto input =
        semgrid::is_argmax_container(semantic->c)
            ? semgrid::assemble_early_fusion_input(s, semgrid::label_grid_from_container(semantic->c))
            : semgrid::assemble_early_fusion_input(s, semgrid::semantic_from_container(semantic->c));
    emit(out, new_raster(semgrid::to_container(input)));
  });
}

sg_status sg_head_create(int inputs, int hidden, uint64_t seed, sg_head** out) {
  return guard([&] {
    require(inputs > 0 && hidden > 0, "head dimensions must be positive");
    emit(out, new sg_head{semgrid::LateFusionHead::initialize(inputs, hidden, seed)});
  });
}

sg_status sg_head_from_raster(const sg_raster* raster, sg_head** out) {
  return guard([&] {
    require(raster, "raster is null");
    emit(out, new sg_head{semgrid::head_from_container(raster->c)});
  });
}

sg_status sg_head_to_raster(const sg_head* head, sg_raster** out) {
  return guard([&] {
    require(head, "head is null");
    emit(out, new_raster(semgrid::to_container(head->head)));
  });
}

void sg_head_free(sg_head* head) { delete head; }

int sg_head_inputs(const sg_head* head) { return head ? head->head.inputs() : 0; }
int sg_head_hidden(const sg_head* head) { return head ? head->head.hidden() : 0; }

sg_train_options sg_train_options_default(void) {
  const semgrid::TrainOptions t;
  return sg_train_options{t.epochs, t.learning_rate, t.seed, t.batch_size, t.standardize ? 1 : 0};
}

sg_status sg_head_train(sg_head* head, const sg_raster* const* inputs,
                        const sg_raster* const* ground_truth, size_t count,
                        const sg_train_options* options, double* loss_trace) {
  return guard([&] {
    require(head && inputs && ground_truth, "null argument");
    std::vector<semgrid::TrainingExample> data;
    data.reserve(count);
    for (size_t k = 0; k < count; ++k) {
      require(inputs[k] && ground_truth[k], "null example");
      data.push_back({semgrid::fusion_input_from_container(inputs[k]->c),
                      semgrid::label_grid_from_container(ground_truth[k]->c)});
    }
    const sg_train_options o = options ? *options : sg_train_options_default();
    semgrid::TrainOptions t;
    t.epochs = o.epochs;
    t.learning_rate = o.learning_rate;
    t.seed = o.seed;
    t.batch_size = o.batch_size;
    t.standardize = o.standardize != 0;
    auto result = semgrid::train(head->head, data, t);
    head->head = std::move(result.head);
    if (loss_trace) std::copy(result.loss_trace.begin(), result.loss_trace.end(), loss_trace);
  });
}

sg_status sg_head_loss(const sg_head* head, const sg_raster* input, const sg_raster* ground_truth,
                       double* loss) {
  return guard([&] {
    require(head && input && ground_truth && loss, "null argument");
    *loss = semgrid::loss_and_gradient(head->head, semgrid::fusion_input_from_container(input->c),
                                       semgrid::label_grid_from_container(ground_truth->c))
                .loss;
  });
}

sg_status sg_head_predict(const sg_head* head, const sg_raster* input, sg_raster** out) {
  return guard([&] {
    require(head && input, "null argument");
    emit(out, new_raster(semgrid::to_container(
                  semgrid::predict(head->head, semgrid::fusion_input_from_container(input->c)))));
  });
}

/* synthetic data */

sg_scene_options sg_scene_options_default(void) {
  const semgrid::SceneOptions s;
  return sg_scene_options{s.seed, s.beams, s.columns, s.range_noise, s.speed};
}

sg_status sg_synth_sequence_write(const sg_scene_options* options, int frames,
                                  const char* directory) {
  return guard([&] {
    require(directory, "directory is null");
    require(frames > 0, "frame count must be positive");
    const sg_scene_options o = options ? *options : sg_scene_options_default();
    semgrid::SceneOptions s;
    s.seed = o.seed;
    s.beams = o.beams;
    s.columns = o.columns;
    s.range_noise = o.range_noise;
    s.speed = o.speed;
    namespace fs = std::filesystem;
    const fs::path root(directory);
    if (!fs::is_directory(root)) {
      throw semgrid::Error(semgrid::ErrorCode::kIo, "not a directory: " + root.string());
    }
    fs::create_directories(root / "velodyne");
    fs::create_directories(root / "labels");
    const auto seq = semgrid::synth_sequence(s, frames);
    std::vector<semgrid::Pose> poses;
    char name[32];
    for (size_t k = 0; k < seq.size(); ++k) {
      std::snprintf(name, sizeof(name), "%06zu", k);
      semgrid::write_point_cloud(seq[k].cloud, (root / "velodyne" / (std::string(name) + ".bin")).string());
      semgrid::write_raw_labels(seq[k].raw_labels,
                                (root / "labels" / (std::string(name) + ".label")).string());
      poses.push_back(seq[k].pose);
    }
    semgrid::write_poses(poses, (root / "poses.txt").string());
    std::ofstream calib(root / "calib.txt");
    calib << "Tr: 1 0 0 0 0 1 0 0 0 0 1 0\n";
    if (!calib) throw semgrid::Error(semgrid::ErrorCode::kIo, "cannot write calib.txt");
  });
}

}  // extern "C"
