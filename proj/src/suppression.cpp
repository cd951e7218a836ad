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

#include "tubekit/suppression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tubekit {

template <class Scored>
std::vector<std::size_t> order_by_score(std::span<const Scored> items) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return items[a].score > items[b].score; });
  return order;
}

template std::vector<std::size_t> order_by_score<ScoredBox>(std::span<const ScoredBox>);
template std::vector<std::size_t> order_by_score<ScoredTube>(std::span<const ScoredTube>);

namespace {

template <class Scored, class Similarity>
std::vector<std::size_t> greedy_nms(std::span<const Scored> items, double threshold, Similarity similarity) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("nms: threshold outside [0, 1]");
  for (const auto& item : items) {
    if (!std::isfinite(item.score)) throw std::invalid_argument("nms: non-finite score");
  }

  const auto order = order_by_score(items);
  std::vector<char> suppressed(items.size(), 0);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t cur = order[i];
    if (suppressed[cur]) continue;
    kept.push_back(cur);
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const std::size_t other = order[j];
      if (!suppressed[other] && similarity(items[cur], items[other]) > threshold) suppressed[other] = 1;
    }
  }
  return kept;
}

}  // namespace

std::vector<std::size_t> nms_boxes(std::span<const ScoredBox> items, double threshold) {
  return greedy_nms(items, threshold, [](const ScoredBox& a, const ScoredBox& b) { return iou(a.box, b.box); });
}

std::vector<std::size_t> nms_tubes(std::span<const ScoredTube> items, double threshold) {
  return greedy_nms(items, threshold,
                    [](const ScoredTube& a, const ScoredTube& b) { return tube_overlap(a.tube, b.tube); });
}

}  // namespace tubekit
