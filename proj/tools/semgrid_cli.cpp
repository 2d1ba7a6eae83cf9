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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semgrid/semgrid.h"

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(sg_status s) {
  if (s != SG_OK) throw Failure(std::string(sg_status_string(s)) + ": " + sg_last_error());
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Cloud = std::unique_ptr<sg_cloud, Deleter<sg_cloud, sg_cloud_free>>;
using Raster = std::unique_ptr<sg_raster, Deleter<sg_raster, sg_raster_free>>;
using ClassMap = std::unique_ptr<sg_classmap, Deleter<sg_classmap, sg_classmap_free>>;
using Head = std::unique_ptr<sg_head, Deleter<sg_head, sg_head_free>>;
using Confusion = std::unique_ptr<sg_confusion, Deleter<sg_confusion, sg_confusion_free>>;
using Sequence = std::unique_ptr<sg_sequence, Deleter<sg_sequence, sg_sequence_free>>;

Raster read_raster(const std::string& path) {
  sg_raster* r = nullptr;
  check(sg_raster_read(path.c_str(), &r));
  return Raster(r);
}

void write_raster(const Raster& r, const std::string& path) {
  check(sg_raster_write(r.get(), path.c_str()));
}

ClassMap load_class_map(const std::string& path) {
  sg_classmap* m = nullptr;
  check(path.empty() ? sg_classmap_default(&m) : sg_classmap_load(path.c_str(), &m));
  return ClassMap(m);
}

Cloud read_cloud(const std::string& scan, const std::string& labels, const ClassMap& map) {
  sg_cloud* c = nullptr;
  check(sg_cloud_read(scan.c_str(), &c));
  Cloud cloud(c);
  if (!labels.empty()) check(sg_cloud_read_labels(cloud.get(), labels.c_str(), map.get()));
  return cloud;
}

sg_grid_spec parse_spec(const std::string& text) {
  if (text.empty()) return sg_grid_spec_default();
  sg_grid_spec spec;
  check(sg_grid_spec_parse(text.c_str(), &spec));
  return spec;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string frame_name(int k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", k);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semgrid: semantic grid maps from lidar scans"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sg_version()));

  std::string spec_text;
  app.add_option("--spec", spec_text, "grid as x_min,y_min,cell,n_x,n_y")->capture_default_str();
  std::string class_map_path;
  app.add_option("--class-map", class_map_path, "class map file (default SemanticKITTI)");

  // encode
  auto* encode = app.add_subcommand("encode", "multi-layer grid map of one scan");
  std::string scan, labels, out;
  std::vector<double> origin;
  bool f32 = false;
  encode->add_option("--scan", scan, "point cloud (.bin)")->required();
  encode->add_option("--out", out, "output container")->required();
  encode->add_option("--origin", origin, "sensor origin x y z")->expected(3);
  encode->add_flag("--f32", f32, "store f32 payloads");

  // project
  auto* project = app.add_subcommand("project", "spherical range image");
  sg_range_spec range = sg_range_spec_default();
  project->add_option("--scan", scan)->required();
  project->add_option("--out", out)->required();
  project->add_option("--width", range.width)->capture_default_str();
  project->add_option("--height", range.height)->capture_default_str();
  project->add_option("--fov-up", range.fov_up_deg)->capture_default_str();
  project->add_option("--fov-down", range.fov_down_deg)->capture_default_str();

  // semantic-encode
  auto* sem = app.add_subcommand("semantic-encode", "grid-level semantic encoding");
  std::string encoding = "hist", probs, pixel_probs;
  std::optional<double> synth_eps;
  double concentration = 4.0;
  std::uint64_t seed = 0;
  sem->add_option("--scan", scan)->required();
  sem->add_option("--out", out)->required();
  sem->add_option("--encoding", encoding)
      ->check(CLI::IsMember({"hist", "argmax", "sum", "mean"}))
      ->capture_default_str();
  sem->add_option("--labels", labels, "label file (hard predictions or synthesis truth)");
  auto* probs_opt = sem->add_option("--probs", probs, "per-point probability table");
  auto* eps_opt = sem->add_option("--synth-eps", synth_eps, "synthesize predictions, flip rate");
  auto* pix_opt = sem->add_option("--pixel-probs", pixel_probs, "per-pixel probabilities to lift");
  probs_opt->excludes(eps_opt)->excludes(pix_opt);
  eps_opt->excludes(pix_opt);
  sem->add_option("--concentration", concentration)->capture_default_str();
  sem->add_option("--seed", seed)->capture_default_str();

  // groundtruth
  auto* gt = app.add_subcommand("groundtruth", "sparse or dense ground-truth grid");
  std::string mode = "sparse", sequence_dir, dynamic = "vehicle,two-wheel,pedestrian";
  int frame = 0, window = 50;
  std::optional<double> z_min, z_max;
  gt->add_option("--mode", mode)->check(CLI::IsMember({"sparse", "dense"}))->capture_default_str();
  gt->add_option("--scan", scan, "sparse: point cloud");
  gt->add_option("--labels", labels, "sparse: label file");
  gt->add_option("--sequence", sequence_dir, "dense: directory with velodyne/, labels/, poses.txt");
  gt->add_option("--frame", frame, "dense: reference frame")->capture_default_str();
  gt->add_option("--window", window, "dense: scans on each side")->capture_default_str();
  gt->add_option("--dynamic-classes", dynamic, "dense: comma list, or 'none'")->capture_default_str();
  gt->add_option("--z-min", z_min);
  gt->add_option("--z-max", z_max);
  gt->add_option("--out", out)->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "confusion matrix and IoU");
  std::vector<std::string> preds, gts;
  std::string json_out;
  eval->add_option("--pred", preds, "predicted label grids")->required();
  eval->add_option("--gt", gts, "ground-truth label grids")->required();
  eval->add_option("--json", json_out, "also write a JSON report");

  // fuse-assemble
  auto* fa = app.add_subcommand("fuse-assemble", "stack + semantic grid -> fusion input");
  std::string stack_path, semantic_path;
  fa->add_option("--stack", stack_path)->required();
  fa->add_option("--semantic", semantic_path)->required();
  fa->add_option("--out", out)->required();

  // fuse-train
  auto* ft = app.add_subcommand("fuse-train", "train the late fusion head");
  std::vector<std::string> inputs;
  sg_train_options topt = sg_train_options_default();
  int hidden = 32;
  bool standardize = false;
  std::string trace_path;
  ft->add_option("--input", inputs, "fusion inputs")->required();
  ft->add_option("--gt", gts, "ground-truth grids, one per input")->required();
  ft->add_option("--out", out, "head container")->required();
  ft->add_option("--epochs", topt.epochs)->capture_default_str();
  ft->add_option("--lr", topt.learning_rate)->capture_default_str();
  ft->add_option("--seed", topt.seed)->capture_default_str();
  ft->add_option("--batch-size", topt.batch_size, "0 = full batch")->capture_default_str();
  ft->add_option("--hidden", hidden)->capture_default_str();
  ft->add_flag("--standardize", standardize);
  ft->add_option("--loss-trace", trace_path, "write per-epoch loss");

  // fuse-predict
  auto* fp = app.add_subcommand("fuse-predict", "apply a trained head");
  std::string head_path;
  fp->add_option("--head", head_path)->required();
  fp->add_option("--input", scan, "fusion input")->required();
  fp->add_option("--out", out)->required();

  // synth-scene
  auto* ss = app.add_subcommand("synth-scene", "write a synthetic labeled sequence");
  sg_scene_options scene = sg_scene_options_default();
  int frames = 10;
  ss->add_option("--out", out, "output directory")->required();
  ss->add_option("--frames", frames)->capture_default_str();
  ss->add_option("--seed", scene.seed)->capture_default_str();
  ss->add_option("--beams", scene.beams)->capture_default_str();
  ss->add_option("--columns", scene.columns)->capture_default_str();
  ss->add_option("--noise", scene.range_noise)->capture_default_str();
  ss->add_option("--speed", scene.speed)->capture_default_str();

  // render
  auto* render = app.add_subcommand("render", "write one layer as PPM/PGM");
  std::string in_path, layer = "label";
  render->add_option("--in", in_path)->required();
  render->add_option("--layer", layer)->capture_default_str();
  render->add_option("--out", out)->required();

  // info
  auto* info = app.add_subcommand("info", "describe a container");
  info->add_option("--in", in_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const sg_grid_spec spec = parse_spec(spec_text);

    if (*encode) {
      const ClassMap map = load_class_map(class_map_path);
      const Cloud cloud = read_cloud(scan, "", map);
      sg_raster* r = nullptr;
      check(sg_encode_multilayer(cloud.get(), &spec, origin.empty() ? nullptr : origin.data(),
                                 f32 ? 1 : 0, &r));
      write_raster(Raster(r), out);
    } else if (*project) {
      const ClassMap map = load_class_map(class_map_path);
      const Cloud cloud = read_cloud(scan, "", map);
      sg_raster* r = nullptr;
      size_t skipped = 0;
      check(sg_project_range_image(cloud.get(), &range, &r, &skipped));
      write_raster(Raster(r), out);
      if (skipped) std::fprintf(stderr, "skipped %zu points at the sensor origin\n", skipped);
    } else if (*sem) {
      const ClassMap map = load_class_map(class_map_path);
      const Cloud cloud = read_cloud(scan, labels, map);
      if (!probs.empty()) check(sg_cloud_read_probabilities(cloud.get(), probs.c_str()));
      if (synth_eps) {
        if (labels.empty()) throw Failure("--synth-eps needs --labels");
        check(sg_cloud_synth_probabilities(cloud.get(), *synth_eps, concentration, seed));
      }
      if (!pixel_probs.empty()) {
        const Raster pp = read_raster(pixel_probs);
        check(sg_lift_pixel_semantics(cloud.get(), pp.get()));
      }
      sg_encoding e = SG_ENCODING_HIST;
      if (encoding == "argmax") e = SG_ENCODING_ARGMAX;
      if (encoding == "sum") e = SG_ENCODING_SUM;
      if (encoding == "mean") e = SG_ENCODING_MEAN;
      sg_raster* r = nullptr;
      check(sg_semantic_encode(cloud.get(), &spec, e, &r));
      write_raster(Raster(r), out);
    } else if (*gt) {
      const ClassMap map = load_class_map(class_map_path);
      sg_raster* r = nullptr;
      if (mode == "sparse") {
        if (scan.empty() || labels.empty()) throw Failure("sparse mode needs --scan and --labels");
        const Cloud cloud = read_cloud(scan, labels, map);
        check(sg_ground_truth_sparse(cloud.get(), &spec, &r));
      } else {
        if (sequence_dir.empty()) throw Failure("dense mode needs --sequence");
        namespace fs = std::filesystem;
        const fs::path root(sequence_dir);
        const fs::path calib = root / "calib.txt";
        const std::string calib_s = calib.string();
        size_t n = 0;
        const std::string poses_s = (root / "poses.txt").string();
        const char* calib_c = fs::exists(calib) ? calib_s.c_str() : nullptr;
        check(sg_read_poses(poses_s.c_str(), calib_c, nullptr, 0, &n));
        std::vector<double> poses(12 * n);
        check(sg_read_poses(poses_s.c_str(), calib_c, poses.data(), n, &n));
        if (frame < 0 || static_cast<size_t>(frame) >= n) throw Failure("--frame out of range");
        sg_sequence* sq = nullptr;
        check(sg_sequence_create(&sq));
        Sequence seq(sq);
        const int lo = std::max(0, frame - window);
        const int hi = std::min(static_cast<int>(n) - 1, frame + window);
        for (int k = lo; k <= hi; ++k) {
          const std::string name = frame_name(k);
          const Cloud cloud = read_cloud((root / "velodyne" / (name + ".bin")).string(),
                                         (root / "labels" / (name + ".label")).string(), map);
          check(sg_sequence_add(seq.get(), cloud.get(), poses.data() + 12 * k));
        }
        sg_dense_options d = sg_dense_options_default();
        d.window = window;
        std::fill(std::begin(d.dynamic_classes), std::end(d.dynamic_classes), 0);
        if (dynamic != "none") {
          for (const auto& name : split(dynamic, ',')) {
            const int id = sg_class_from_name(name.c_str());
            if (id < 0) throw Failure("unknown class '" + name + "'");
            d.dynamic_classes[id] = 1;
          }
        }
        if (z_min) d.use_z_min = 1, d.z_min = *z_min;
        if (z_max) d.use_z_max = 1, d.z_max = *z_max;
        check(sg_ground_truth_dense(seq.get(), static_cast<size_t>(frame - lo), &spec, &d, &r));
      }
      write_raster(Raster(r), out);
    } else if (*eval) {
      if (preds.size() != gts.size()) throw Failure("--pred and --gt counts differ");
      sg_confusion* c = nullptr;
      check(sg_confusion_create(&c));
      Confusion cm(c);
      for (size_t k = 0; k < preds.size(); ++k) {
        const Raster p = read_raster(preds[k]);
        const Raster g = read_raster(gts[k]);
        check(sg_confusion_accumulate(cm.get(), p.get(), g.get()));
      }
      char* text = nullptr;
      check(sg_confusion_report(cm.get(), 0, &text));
      std::fputs(text, stdout);
      sg_string_free(text);
      if (!json_out.empty()) {
        char* js = nullptr;
        check(sg_confusion_report(cm.get(), 1, &js));
        std::ofstream f(json_out);
        f << js << "\n";
        sg_string_free(js);
        if (!f) throw Failure("cannot write " + json_out);
      }
    } else if (*fa) {
      const Raster st = read_raster(stack_path);
      const Raster se = read_raster(semantic_path);
      sg_raster* r = nullptr;
      check(sg_fusion_assemble(st.get(), se.get(), &r));
      write_raster(Raster(r), out);
    } else if (*ft) {
      if (inputs.size() != gts.size()) throw Failure("--input and --gt counts differ");
      std::vector<Raster> xs, ys;
      std::vector<const sg_raster*> xp, yp;
      for (size_t k = 0; k < inputs.size(); ++k) {
        xs.push_back(read_raster(inputs[k]));
        ys.push_back(read_raster(gts[k]));
        xp.push_back(xs.back().get());
        yp.push_back(ys.back().get());
      }
      const int channels = static_cast<int>(sg_raster_layer_count(xs.front().get())) - 1;
      sg_head* h = nullptr;
      check(sg_head_create(channels, hidden, topt.seed, &h));
      Head head(h);
      topt.standardize = standardize ? 1 : 0;
      std::vector<double> trace(static_cast<size_t>(std::max(topt.epochs, 0)));
      check(sg_head_train(head.get(), xp.data(), yp.data(), xp.size(), &topt, trace.data()));
      sg_raster* r = nullptr;
      check(sg_head_to_raster(head.get(), &r));
      write_raster(Raster(r), out);
      if (!trace.empty()) {
        std::printf("loss %.6f -> %.6f over %d epochs\n", trace.front(), trace.back(), topt.epochs);
      }
      if (!trace_path.empty()) {
        std::ofstream f(trace_path);
        for (double v : trace) f << v << "\n";
        if (!f) throw Failure("cannot write " + trace_path);
      }
    } else if (*fp) {
      const Raster hr = read_raster(head_path);
      sg_head* h = nullptr;
      check(sg_head_from_raster(hr.get(), &h));
      Head head(h);
      const Raster x = read_raster(scan);
      sg_raster* r = nullptr;
      check(sg_head_predict(head.get(), x.get(), &r));
      write_raster(Raster(r), out);
    } else if (*ss) {
      std::filesystem::create_directories(out);
      check(sg_synth_sequence_write(&scene, frames, out.c_str()));
    } else if (*render) {
      const Raster r = read_raster(in_path);
      check(sg_raster_render(r.get(), layer.c_str(), out.c_str()));
    } else if (*info) {
      const Raster r = read_raster(in_path);
      sg_grid_spec s;
      check(sg_raster_spec(r.get(), &s));
      std::printf("grid %g,%g,%g,%u,%u\n", s.x_min, s.y_min, s.cell_size, s.n_x, s.n_y);
      static const char* kTypes[] = {"u8", "f32", "f64"};
      for (size_t k = 0; k < sg_raster_layer_count(r.get()); ++k) {
        std::printf("  %-24s %s\n", sg_raster_layer_name(r.get(), k),
                    kTypes[sg_raster_layer_dtype(r.get(), k)]);
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
