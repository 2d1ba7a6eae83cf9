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

/*
 * semgrid C API.
 *
 * Every function returns an sg_status. On failure the message of the last
 * error on the calling thread is available from sg_last_error(). Objects are
 * opaque handles created by sg_*_create / sg_*_read style functions and
 * released with the matching sg_*_free; free functions accept NULL.
 *
 * Grid-shaped results (multi-layer stacks, semantic grids, label grids,
 * fusion inputs, range images, head parameters) are all returned as
 * sg_raster handles, the in-memory form of the GMAP container file.
 */

#ifndef SEMGRID_SEMGRID_H_
#define SEMGRID_SEMGRID_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SEMGRID_BUILDING_LIBRARY)
#define SG_API __declspec(dllexport)
#else
#define SG_API __declspec(dllimport)
#endif
#else
#define SG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sg_status {
  SG_OK = 0,
  SG_ERR_INVALID_ARGUMENT = 1,
  SG_ERR_IO = 2,
  SG_ERR_FORMAT = 3,
  SG_ERR_UNKNOWN_LABEL = 4,
  SG_ERR_DIMENSION = 5,
  SG_ERR_NUMERIC = 6,
  SG_ERR_INTERNAL = 7
} sg_status;

#define SG_NUM_CLASSES 11
#define SG_LABEL_IGNORE 255

typedef struct sg_cloud sg_cloud;
typedef struct sg_classmap sg_classmap;
typedef struct sg_raster sg_raster;
typedef struct sg_sequence sg_sequence;
typedef struct sg_head sg_head;
typedef struct sg_confusion sg_confusion;

typedef struct sg_grid_spec {
  double x_min;
  double y_min;
  double cell_size;
  uint32_t n_x;
  uint32_t n_y;
} sg_grid_spec;

typedef struct sg_range_spec {
  uint32_t width;
  uint32_t height;
  double fov_up_deg;
  double fov_down_deg;
} sg_range_spec;

typedef enum sg_encoding {
  SG_ENCODING_HIST = 0,
  SG_ENCODING_ARGMAX = 1,
  SG_ENCODING_SUM = 2,
  SG_ENCODING_MEAN = 3
} sg_encoding;

typedef enum sg_dtype { SG_DTYPE_U8 = 0, SG_DTYPE_F32 = 1, SG_DTYPE_F64 = 2 } sg_dtype;

/* -- errors, classes, grid geometry -------------------------------------- */

SG_API const char* sg_last_error(void);
SG_API const char* sg_status_string(sg_status status);
SG_API const char* sg_version(void);

/* Name of class 0..10, or NULL. */
SG_API const char* sg_class_name(int class_id);
/* Class id for a name, or -1. */
SG_API int sg_class_from_name(const char* name);
SG_API void sg_class_color(int class_id, uint8_t rgb[3]);

SG_API sg_grid_spec sg_grid_spec_default(void);
/* Parses "x_min,y_min,cell,n_x,n_y". */
SG_API sg_status sg_grid_spec_parse(const char* text, sg_grid_spec* out);
/* *in_bounds is 0 when the point lies outside the grid. */
SG_API sg_status sg_cell_index(const sg_grid_spec* spec, double x, double y, int32_t* i, int32_t* j,
                               int* in_bounds);
SG_API sg_range_spec sg_range_spec_default(void);

/* -- class maps ------------------------------------------------------------ */

SG_API sg_status sg_classmap_default(sg_classmap** out);
SG_API sg_status sg_classmap_load(const char* path, sg_classmap** out);
/* *label is a class id or SG_LABEL_IGNORE. */
SG_API sg_status sg_classmap_remap(const sg_classmap* map, uint16_t raw, uint8_t* label);
SG_API void sg_classmap_free(sg_classmap* map);

/* -- point clouds ---------------------------------------------------------- */

/* xyzi holds 4 values per point. */
SG_API sg_status sg_cloud_create(const double* xyzi, size_t count, sg_cloud** out);
SG_API sg_status sg_cloud_read(const char* path, sg_cloud** out);
SG_API sg_status sg_cloud_write(const sg_cloud* cloud, const char* path);
SG_API sg_status sg_cloud_clone(const sg_cloud* cloud, sg_cloud** out);
SG_API void sg_cloud_free(sg_cloud* cloud);
SG_API size_t sg_cloud_size(const sg_cloud* cloud);
SG_API sg_status sg_cloud_get_points(const sg_cloud* cloud, double* xyzi, size_t count);

SG_API sg_status sg_cloud_read_labels(sg_cloud* cloud, const char* path, const sg_classmap* map);
SG_API sg_status sg_cloud_write_labels(const sg_cloud* cloud, const sg_classmap* map,
                                       const char* path);
SG_API sg_status sg_cloud_set_labels(sg_cloud* cloud, const uint8_t* labels, size_t count);
SG_API sg_status sg_cloud_get_labels(const sg_cloud* cloud, uint8_t* labels, size_t count);
SG_API int sg_cloud_has_labels(const sg_cloud* cloud);

/* rows holds SG_NUM_CLASSES values per point. */
SG_API sg_status sg_cloud_set_probabilities(sg_cloud* cloud, const double* rows, size_t count);
SG_API sg_status sg_cloud_get_probabilities(const sg_cloud* cloud, double* rows, size_t count);
SG_API sg_status sg_cloud_read_probabilities(sg_cloud* cloud, const char* path);
SG_API sg_status sg_cloud_write_probabilities(const sg_cloud* cloud, const char* path);
SG_API int sg_cloud_has_probabilities(const sg_cloud* cloud);
/* Synthesizes probability rows from the cloud's labels. */
SG_API sg_status sg_cloud_synth_probabilities(sg_cloud* cloud, double flip_rate,
                                              double concentration, uint64_t seed);
/* pose: row-major 3x4 [R | t]. */
SG_API sg_status sg_cloud_transform(sg_cloud* cloud, const double pose[12]);

/* -- rasters (GMAP containers) --------------------------------------------- */

SG_API sg_status sg_raster_read(const char* path, sg_raster** out);
SG_API sg_status sg_raster_write(const sg_raster* raster, const char* path);
SG_API void sg_raster_free(sg_raster* raster);
SG_API sg_status sg_raster_spec(const sg_raster* raster, sg_grid_spec* out);
SG_API size_t sg_raster_layer_count(const sg_raster* raster);
/* Returned name stays valid while the raster lives. */
SG_API const char* sg_raster_layer_name(const sg_raster* raster, size_t index);
SG_API int sg_raster_find_layer(const sg_raster* raster, const char* name);
SG_API sg_dtype sg_raster_layer_dtype(const sg_raster* raster, size_t index);
/* Copies n_x * n_y values; validity (optional) receives 0/1 per cell, all 1
 * when the layer carries no validity mask. */
SG_API sg_status sg_raster_layer_values(const sg_raster* raster, size_t index, double* values,
                                        uint8_t* validity, size_t count);
/* Writes one layer as an image: u8 label layers ("label", "argmax") with the
 * class palette (PPM), anything else min-max scaled gray (PGM). */
SG_API sg_status sg_raster_render(const sg_raster* raster, const char* layer, const char* path);

/* -- encoders -------------------------------------------------------------- */

/* Five-layer stack; origin may be NULL for (0, 0, 0). use_f32 stores
 * payloads as f32 instead of f64. */
SG_API sg_status sg_encode_multilayer(const sg_cloud* cloud, const sg_grid_spec* spec,
                                      const double origin[3], int use_f32, sg_raster** out);
SG_API sg_status sg_project_range_image(const sg_cloud* cloud, const sg_range_spec* spec,
                                        sg_raster** out, size_t* skipped);
/* Replaces the cloud's probabilities with those of a per-pixel raster
 * (layers "prob/<class>", range image geometry). */
SG_API sg_status sg_lift_pixel_semantics(sg_cloud* cloud, const sg_raster* pixel_probs);
SG_API sg_status sg_semantic_encode(const sg_cloud* cloud, const sg_grid_spec* spec,
                                    sg_encoding encoding, sg_raster** out);

/* -- ground truth ---------------------------------------------------------- */

SG_API sg_status sg_ground_truth_sparse(const sg_cloud* cloud, const sg_grid_spec* spec,
                                        sg_raster** out);

SG_API sg_status sg_sequence_create(sg_sequence** out);
/* Copies the labeled cloud; pose maps scan frame to world (row-major 3x4). */
SG_API sg_status sg_sequence_add(sg_sequence* seq, const sg_cloud* cloud, const double pose[12]);
SG_API size_t sg_sequence_size(const sg_sequence* seq);
SG_API void sg_sequence_free(sg_sequence* seq);

typedef struct sg_dense_options {
  int window;
  /* dynamic_classes[c] != 0 marks class c as movable. */
  uint8_t dynamic_classes[SG_NUM_CLASSES];
  int use_z_min;
  double z_min;
  int use_z_max;
  double z_max;
} sg_dense_options;

SG_API sg_dense_options sg_dense_options_default(void);
SG_API sg_status sg_ground_truth_dense(const sg_sequence* seq, size_t reference,
                                       const sg_grid_spec* spec, const sg_dense_options* options,
                                       sg_raster** out);

/* Reads a pose file (12 numbers per line); calib_path may be NULL. poses
 * receives 12 values per pose; call with poses = NULL to query the count. */
SG_API sg_status sg_read_poses(const char* path, const char* calib_path, double* poses,
                               size_t capacity, size_t* count);

/* -- evaluation ------------------------------------------------------------ */

SG_API sg_status sg_confusion_create(sg_confusion** out);
SG_API void sg_confusion_free(sg_confusion* cm);
/* Both rasters must hold a label layer on the same grid. */
SG_API sg_status sg_confusion_accumulate(sg_confusion* cm, const sg_raster* prediction,
                                         const sg_raster* ground_truth);
/* defined[c] is 0 where IoU is undefined. */
SG_API sg_status sg_confusion_iou(const sg_confusion* cm, double iou[SG_NUM_CLASSES],
                                  uint8_t defined[SG_NUM_CLASSES]);
SG_API sg_status sg_confusion_miou(const sg_confusion* cm, double* miou);
SG_API sg_status sg_mean_iou(const double* iou, const uint8_t* defined, size_t count, double* miou);
/* Allocated report; release with sg_string_free. */
SG_API sg_status sg_confusion_report(const sg_confusion* cm, int json, char** out);
SG_API void sg_string_free(char* s);

/* -- fusion ---------------------------------------------------------------- */

/* semantic: hist / sum / mean grid or an argmax label grid. */
SG_API sg_status sg_fusion_assemble(const sg_raster* stack, const sg_raster* semantic,
                                    sg_raster** out);

SG_API sg_status sg_head_create(int inputs, int hidden, uint64_t seed, sg_head** out);
SG_API sg_status sg_head_from_raster(const sg_raster* raster, sg_head** out);
SG_API sg_status sg_head_to_raster(const sg_head* head, sg_raster** out);
SG_API void sg_head_free(sg_head* head);
SG_API int sg_head_inputs(const sg_head* head);
SG_API int sg_head_hidden(const sg_head* head);

typedef struct sg_train_options {
  int epochs;
  double learning_rate;
  uint64_t seed;
  size_t batch_size; /* 0 = full batch */
  int standardize;
} sg_train_options;

SG_API sg_train_options sg_train_options_default(void);
/* Trains in place. loss_trace (optional) receives one value per epoch. */
SG_API sg_status sg_head_train(sg_head* head, const sg_raster* const* inputs,
                               const sg_raster* const* ground_truth, size_t count,
                               const sg_train_options* options, double* loss_trace);
SG_API sg_status sg_head_loss(const sg_head* head, const sg_raster* input,
                              const sg_raster* ground_truth, double* loss);
SG_API sg_status sg_head_predict(const sg_head* head, const sg_raster* input, sg_raster** out);

/* -- synthetic data -------------------------------------------------------- */

typedef struct sg_scene_options {
  uint64_t seed;
  uint32_t beams;
  uint32_t columns;
  double range_noise;
  double speed;
} sg_scene_options;

SG_API sg_scene_options sg_scene_options_default(void);
/* Writes velodyne/%06d.bin, labels/%06d.label, poses.txt and calib.txt
 * under directory (which must exist). */
SG_API sg_status sg_synth_sequence_write(const sg_scene_options* options, int frames,
                                         const char* directory);

#ifdef __cplusplus
}
#endif

#endif /* SEMGRID_SEMGRID_H_ */
