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
#include <optional>
#include <span>
#include <vector>

#include "tubekit/geometry.hpp"

namespace tubekit {

struct ScoredTube {
  Tube tube;
  double score = 0.0;
  std::optional<int> class_id;

  friend bool operator==(const ScoredTube&, const ScoredTube&) = default;
};

struct ScoredBox {
  Box box;
  int frame = 0;
  double score = 0.0;
  std::optional<int> class_id;

  friend bool operator==(const ScoredBox&, const ScoredBox&) = default;
};

/// Greedy NMS on per-frame boxes. Returns kept input indices in descending
/// score order; equal scores keep the lower input index first. An item is
/// discarded when its IoU with a kept item is strictly above `threshold`.
/// Class and frame fields are ignored: callers partition beforehand.
std::vector<std::size_t> nms_boxes(std::span<const ScoredBox> items, double threshold);

/// nms_boxes with tube overlap as the similarity.
std::vector<std::size_t> nms_tubes(std::span<const ScoredTube> items, double threshold);

/// Input indices ordered by descending score, ties by ascending index.
template <class Scored>
std::vector<std::size_t> order_by_score(std::span<const Scored> items);

}  // namespace tubekit
