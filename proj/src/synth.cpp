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

#include "tubekit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace tubekit {

namespace {

// Positions are kept on a dyadic grid so that displacements survive
// start + d - start exactly in double arithmetic.
constexpr double kGrid = 64.0;

double quantize(double v) { return std::round(v * kGrid) / kGrid; }

class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1) from the top 53 bits; platform independent unlike <random> distributions.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
};

bool overlaps_any(const Box& b, const std::vector<PlantedObject>& objects) {
  return std::any_of(objects.begin(), objects.end(),
                     [&](const PlantedObject& o) { return intersection_area(b, o.tube.tube.start) > 0.0; });
}

}  // namespace

void SceneConfig::validate() const {
  if (length < 1) throw std::invalid_argument("scene config: chunk length must be >= 1");
  if (!(frame_width > 0.0) || !(frame_height > 0.0)) throw std::invalid_argument("scene config: empty frame");
  if (!(min_object_size > 0.0) || max_object_size < min_object_size) {
    throw std::invalid_argument("scene config: bad object size range");
  }
  if (max_object_size > std::min(frame_width, frame_height)) {
    throw std::invalid_argument("scene config: objects larger than the frame");
  }
  if (max_speed < 0.0 || track_noise < 0.0 || feature_noise < 0.0) {
    throw std::invalid_argument("scene config: speeds and noise levels must be >= 0");
  }
  if (feature_channels < 1 || !(feature_stride > 0.0) || classes < 1) {
    throw std::invalid_argument("scene config: bad feature or class settings");
  }
}

std::vector<Track> Scene::tracks() const {
  std::vector<Track> out;
  out.reserve(objects.size());
  for (const auto& o : objects) out.push_back(o.track);
  return out;
}

std::vector<LabeledTube> Scene::planted_tubes() const {
  std::vector<LabeledTube> out;
  out.reserve(objects.size());
  for (const auto& o : objects) out.push_back(o.tube);
  return out;
}

Scene generate_scene(const SceneConfig& config) {
  config.validate();
  SceneRng rng(config.seed);
  Scene scene;
  scene.config = config;

  const double span = static_cast<double>(config.length - 1);
  for (std::size_t i = 0; i < config.objects; ++i) {
    Box start;
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      const double w = quantize(rng.uniform(config.min_object_size, config.max_object_size));
      const double h = quantize(rng.uniform(config.min_object_size, config.max_object_size));
      const double x = quantize(rng.uniform(0.0, config.frame_width - w));
      const double y = quantize(rng.uniform(0.0, config.frame_height - h));
      start = Box{x, y, x + w, y + h};
      placed = !config.disjoint_objects || !overlaps_any(start, scene.objects);
    }
    if (!placed) throw std::invalid_argument("generate_scene: cannot place disjoint objects; lower the object count");

    bool moving = config.motion == MotionModel::kLinear;
    if (config.motion == MotionModel::kMixed) moving = rng.unit() < 0.5;
    double dx = 0.0;
    double dy = 0.0;
    if (moving) {
      dx = quantize(rng.uniform(-config.max_speed, config.max_speed) * span);
      dy = quantize(rng.uniform(-config.max_speed, config.max_speed) * span);
    }

    PlantedObject obj;
    const double cdx = std::clamp(dx, -start.x1, config.frame_width - start.x2);
    const double cdy = std::clamp(dy, -start.y1, config.frame_height - start.y2);
    obj.velocity_clamped = cdx != dx || cdy != dy;
    obj.displacement = {cdx, cdy};

    const int class_id = static_cast<int>(rng.below(config.classes));
    obj.tube = LabeledTube{Tube{config.t0, config.length, start, start.translated(cdx, cdy)}, class_id};
    if (config.length == 1) obj.tube.tube.end = start;
    obj.track.video = config.video;
    obj.track.class_id = class_id;
    for (int k = 0; k < config.length; ++k) {
      obj.track.entries.push_back(TrackEntry{config.t0 + k, interpolate_tube(obj.tube.tube, k)});
    }
    scene.seed_boxes.push_back(start);
    scene.objects.push_back(std::move(obj));
  }

  for (const auto& obj : scene.objects) {
    const Box& b = obj.tube.tube.start;
    for (std::size_t p = 0; p < config.points_per_object; ++p) {
      const double x0 = quantize(b.x1 + rng.uniform(0.05, 0.95) * b.width());
      const double y0 = quantize(b.y1 + rng.uniform(0.05, 0.95) * b.height());
      double nx = 0.0;
      double ny = 0.0;
      if (config.track_noise > 0.0) {
        nx = rng.uniform(-config.track_noise, config.track_noise);
        ny = rng.uniform(-config.track_noise, config.track_noise);
      }
      scene.point_tracks.push_back(
          PointTrack{x0, y0, x0 + obj.displacement.dx + nx, y0 + obj.displacement.dy + ny});
    }
  }
  for (std::size_t c = 0; c < config.clutter_tracks; ++c) {
    const double x0 = rng.uniform(0.0, config.frame_width);
    const double y0 = rng.uniform(0.0, config.frame_height);
    const double x1 = rng.uniform(0.0, config.frame_width);
    const double y1 = rng.uniform(0.0, config.frame_height);
    scene.point_tracks.push_back(PointTrack{x0, y0, x1, y1});
  }

  const double stride = config.feature_stride;
  const VolumeShape shape{static_cast<std::size_t>(config.length), config.feature_channels,
                          static_cast<std::size_t>(std::ceil(config.frame_height / stride)),
                          static_cast<std::size_t>(std::ceil(config.frame_width / stride))};
  FeatureVolume features(shape, stride);
  for (std::size_t t = 0; t < shape.frames; ++t) {
    for (const auto& obj : scene.objects) {
      const Box b = interpolate_tube(obj.tube.tube, static_cast<int>(t));
      const double sigma = std::max(0.25 * std::min(b.width(), b.height()), 0.5 * stride);
      const std::size_t c = static_cast<std::size_t>(obj.tube.class_id) % shape.channels;
      for (std::size_t y = 0; y < shape.height; ++y) {
        const double ey = (static_cast<double>(y) + 0.5) * stride - b.center_y();
        for (std::size_t x = 0; x < shape.width; ++x) {
          const double ex = (static_cast<double>(x) + 0.5) * stride - b.center_x();
          const double bump = std::exp(-(ex * ex + ey * ey) / (2.0 * sigma * sigma));
          double& v = features.at(t, c, y, x);
          v = std::max(v, bump);
        }
      }
    }
  }
  if (config.feature_noise > 0.0) {
    for (double& v : features.values()) v += rng.uniform(0.0, config.feature_noise);
  }
  scene.features = std::move(features);
  return scene;
}

}  // namespace tubekit
