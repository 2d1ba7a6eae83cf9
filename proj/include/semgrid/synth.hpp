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

#include <cstdint>
#include <vector>

#include "semgrid/core.hpp"

namespace semgrid {

// Street scene ray-cast by a spinning multi-beam sensor: road with lane
// markings, sidewalk, parking strip, terrain, buildings, fences, poles and
// signs, trees, parked and moving vehicles, pedestrians and cyclists. Raw
// labels use SemanticKITTI ids, so the default class map applies.
struct SceneOptions {
  std::uint64_t seed = 0;
  std::uint32_t beams = 64;
  std::uint32_t columns = 2048;
  double fov_up_deg = 3.0;
  double fov_down_deg = -25.0;
  double sensor_height = 1.73;
  double max_range = 80.0;
  double range_noise = 0.02;     // meters, Gaussian
  double speed = 1.0;            // ego meters per frame along +x
};

struct SyntheticFrame {
  PointCloud cloud;                    // sensor frame, labels set
  std::vector<std::uint32_t> raw_labels;  // semantic id | instance << 16
  Pose pose;                           // sensor -> world
};

std::vector<SyntheticFrame> synth_sequence(const SceneOptions& options, int frames);
SyntheticFrame synth_scan(const SceneOptions& options);

}  // namespace semgrid
