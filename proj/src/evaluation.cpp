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

#include "tubekit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <tuple>

namespace tubekit {

std::optional<double> RecallCount::ratio() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(covered) / static_cast<double>(total);
}

RecallCount& RecallCount::operator+=(const RecallCount& other) {
  covered += other.covered;
  total += other.total;
  return *this;
}

RecallCount tube_recall_count(std::span<const Tube> proposals, std::span<const Tube> ground_truth,
                              double threshold) {
  auto aligned = [](const Tube& a, const Tube& b) { return a.t0 == b.t0 && a.length == b.length; };
  if (!ground_truth.empty()) {
    for (const auto& t : ground_truth) {
      if (!aligned(t, ground_truth.front())) throw std::invalid_argument("tube_recall: ground truth not chunk aligned");
    }
    for (const auto& p : proposals) {
      if (!aligned(p, ground_truth.front())) throw std::invalid_argument("tube_recall: proposal not chunk aligned");
    }
  }

  RecallCount count{0, ground_truth.size()};
  for (const auto& gt : ground_truth) {
    const bool hit = std::any_of(proposals.begin(), proposals.end(),
                                 [&](const Tube& p) { return tube_overlap(p, gt) >= threshold; });
    if (hit) ++count.covered;
  }
  return count;
}

std::optional<double> tube_recall(std::span<const Tube> proposals, std::span<const Tube> ground_truth,
                                  double threshold) {
  return tube_recall_count(proposals, ground_truth, threshold).ratio();
}

RecallCount box_recall_count(std::span<const Tube> proposals, std::span<const Track> tracks, const Chunk& chunk,
                             double threshold) {
  RecallCount count;
  for (const auto& track : tracks) {
    for (const auto& entry : track.entries) {
      if (!chunk.contains(entry.frame)) continue;
      ++count.total;
      for (const auto& p : proposals) {
        const int k = entry.frame - p.t0;
        if (k < 0 || k >= p.length) continue;
        if (iou(interpolate_tube(p, k), entry.box) >= threshold) {
          ++count.covered;
          break;
        }
      }
    }
  }
  return count;
}

std::optional<double> box_recall(std::span<const Tube> proposals, std::span<const Track> tracks,
                                 const Chunk& chunk, double threshold) {
  return box_recall_count(proposals, tracks, chunk, threshold).ratio();
}

std::vector<Detection> tubes_to_detections(std::span<const ScoredTube> tubes, const std::string& video,
                                           double nms_threshold) {
  // (frame, class) -> per-frame boxes in tube order
  std::map<std::pair<int, int>, std::vector<ScoredBox>> groups;
  for (const auto& st : tubes) {
    if (!st.class_id) throw std::invalid_argument("tubes_to_detections: tube without class");
    for (int k = 0; k < st.tube.length; ++k) {
      const int frame = st.tube.t0 + k;
      groups[{frame, *st.class_id}].push_back(ScoredBox{interpolate_tube(st.tube, k), frame, st.score, st.class_id});
    }
  }

  std::vector<Detection> out;
  for (const auto& [key, boxes] : groups) {
    for (std::size_t i : nms_boxes(boxes, nms_threshold)) {
      out.push_back(Detection{video, key.first, boxes[i].box, boxes[i].score, key.second});
    }
  }
  return out;
}

namespace {

using FrameKey = std::tuple<std::string, int>;

std::set<int> classes_of(std::span<const GroundTruthBox> gt) {
  std::set<int> classes;
  for (const auto& g : gt) classes.insert(g.class_id);
  return classes;
}

}  // namespace

std::map<int, double> average_precision(std::span<const Detection> detections,
                                        std::span<const GroundTruthBox> ground_truth, double iou_threshold) {
  for (const auto& d : detections) {
    if (!std::isfinite(d.score)) throw std::invalid_argument("average_precision: non-finite score");
  }

  std::map<int, double> ap;
  for (int cls : classes_of(ground_truth)) {
    std::map<FrameKey, std::vector<std::size_t>> gt_on_frame;
    std::size_t n_gt = 0;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (ground_truth[g].class_id != cls) continue;
      gt_on_frame[{ground_truth[g].video, ground_truth[g].frame}].push_back(g);
      ++n_gt;
    }

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < detections.size(); ++i) {
      if (detections[i].class_id == cls) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return detections[a].score > detections[b].score; });

    std::vector<char> matched(ground_truth.size(), 0);
    std::vector<double> precision;
    std::vector<double> recall;
    std::size_t tp = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      const Detection& d = detections[order[rank]];
      std::optional<std::size_t> best;
      double best_iou = iou_threshold;
      if (auto it = gt_on_frame.find({d.video, d.frame}); it != gt_on_frame.end()) {
        for (std::size_t g : it->second) {
          if (matched[g]) continue;
          const double o = iou(d.box, ground_truth[g].box);
          if (o >= best_iou && (!best || o > best_iou)) {
            best = g;
            best_iou = o;
          }
        }
      }
      if (best) {
        matched[*best] = 1;
        ++tp;
      }
      precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
      recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
    }

    // Precision envelope, then area under the step curve.
    for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
    double area = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < recall.size(); ++i) {
      if (recall[i] > prev_recall) {
        area += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
      }
    }
    ap[cls] = std::clamp(area, 0.0, 1.0);
  }
  return ap;
}

std::map<int, double> corloc(std::span<const Detection> detections, std::span<const GroundTruthBox> ground_truth,
                             double iou_threshold) {
  std::map<int, double> out;
  for (int cls : classes_of(ground_truth)) {
    std::map<FrameKey, std::vector<const Box*>> positives;
    for (const auto& g : ground_truth) {
      if (g.class_id == cls) positives[{g.video, g.frame}].push_back(&g.box);
    }

    std::map<FrameKey, const Detection*> top;
    for (const auto& d : detections) {
      if (d.class_id != cls) continue;
      auto& slot = top[{d.video, d.frame}];
      if (slot == nullptr || d.score > slot->score) slot = &d;
    }

    std::size_t correct = 0;
    for (const auto& [key, boxes] : positives) {
      auto it = top.find(key);
      if (it == top.end()) continue;
      const bool hit = std::any_of(boxes.begin(), boxes.end(),
                                   [&](const Box* b) { return iou(it->second->box, *b) >= iou_threshold; });
      if (hit) ++correct;
    }
    out[cls] = static_cast<double>(correct) / static_cast<double>(positives.size());
  }
  return out;
}

std::optional<double> mean_over_classes(const std::map<int, double>& per_class) {
  if (per_class.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [cls, v] : per_class) sum += v;
  return sum / static_cast<double>(per_class.size());
}

}  // namespace tubekit
