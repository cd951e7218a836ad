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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tubekit/geometry.hpp"
#include "tubekit/suppression.hpp"

namespace tubekit {

struct Detection {
  std::string video;
  int frame = 0;
  Box box;
  double score = 0.0;
  int class_id = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct GroundTruthBox {
  std::string video;
  int frame = 0;
  Box box;
  int class_id = 0;

  friend bool operator==(const GroundTruthBox&, const GroundTruthBox&) = default;
};

struct RecallCount {
  std::size_t covered = 0;
  std::size_t total = 0;

  /// Empty when there is nothing to recall.
  std::optional<double> ratio() const;
  RecallCount& operator+=(const RecallCount& other);
};

/// Ground-truth tubes with tube overlap >= threshold against at least one
/// proposal. All tubes must share t0 and length.
RecallCount tube_recall_count(std::span<const Tube> proposals, std::span<const Tube> ground_truth,
                              double threshold = 0.5);
std::optional<double> tube_recall(std::span<const Tube> proposals, std::span<const Tube> ground_truth,
                                  double threshold = 0.5);

/// Proposals are split into per-frame boxes; every annotated track box on a
/// frame of `chunk` counts as one ground truth, recalled when some proposal
/// box on the same frame has IoU >= threshold with it.
RecallCount box_recall_count(std::span<const Tube> proposals, std::span<const Track> tracks, const Chunk& chunk,
                             double threshold = 0.5);
std::optional<double> box_recall(std::span<const Tube> proposals, std::span<const Track> tracks,
                                 const Chunk& chunk, double threshold = 0.5);

/// Splits scored tubes into per-frame boxes that inherit score and class,
/// then applies NMS per frame and class. Output is ordered by frame, class,
/// then descending score. Every tube needs a class.
std::vector<Detection> tubes_to_detections(std::span<const ScoredTube> tubes, const std::string& video,
                                           double nms_threshold);

/// Per-class average precision, all-points interpolation. Detections are
/// matched greedily in descending score order to the highest-IoU unmatched
/// ground truth of the same class and frame. Classes without ground truth are
/// absent from the result.
std::map<int, double> average_precision(std::span<const Detection> detections,
                                        std::span<const GroundTruthBox> ground_truth, double iou_threshold = 0.5);

/// Per-class fraction of positive frames whose top-scoring detection of the
/// class has IoU >= threshold with a ground truth of the class.
std::map<int, double> corloc(std::span<const Detection> detections, std::span<const GroundTruthBox> ground_truth,
                             double iou_threshold = 0.5);

/// Mean of the per-class values; empty for an empty map.
std::optional<double> mean_over_classes(const std::map<int, double>& per_class);

struct MetricReport {
  std::string metric;
  std::optional<double> value;
  std::map<std::string, double> parameters;
  std::map<int, double> per_class;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

}  // namespace tubekit
