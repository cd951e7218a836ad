/* Copyright (c) 2026 The Tubekit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tubekit/geometry.hpp"
#include "tubekit/motion.hpp"
#include "tubekit/pooling.hpp"

namespace tubekit {

enum class MotionModel { kStatic, kLinear, kMixed };

struct SceneConfig {
  std::string video = "synth";
  double frame_width = 320.0;
  double frame_height = 240.0;
  int t0 = 0;
  int length = 10;
  std::size_t objects = 4;
  MotionModel motion = MotionModel::kMixed;
  double min_object_size = 24.0;
  double max_object_size = 64.0;
  /// Largest per-frame speed component (pixels/frame).
  double max_speed = 3.0;
  /// Keep object start boxes pairwise disjoint.
  bool disjoint_objects = true;
  std::size_t points_per_object = 30;
  std::size_t clutter_tracks = 0;
  /// Point tracks: uniform end-point noise in [-noise, noise] per axis.
  double track_noise = 0.0;
  /// Feature volume: uniform additive noise in [0, noise].
  double feature_noise = 0.0;
  std::size_t feature_channels = 4;
  double feature_stride = 16.0;
  std::size_t classes = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PlantedObject {
  Track track;
  LabeledTube tube;
  Displacement displacement;
  /// Sampled velocity had to be reduced to keep the object inside the frame.
  bool velocity_clamped = false;
};

struct Scene {
  SceneConfig config;
  std::vector<PlantedObject> objects;
  /// Object point tracks first (points_per_object per object, object order),
  /// then clutter.
  std::vector<PointTrack> point_tracks;
  /// Start-frame object boxes, one per object.
  std::vector<Box> seed_boxes;
  FeatureVolume features;

  Chunk chunk() const { return {config.video, config.t0, config.length}; }
  std::vector<Track> tracks() const;
  std::vector<LabeledTube> planted_tubes() const;
};

/// Deterministic scene: the same config (including seed) always yields
/// bit-identical output.
Scene generate_scene(const SceneConfig& config);

}  // namespace tubekit
