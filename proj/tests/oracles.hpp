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

// Reference implementations used by the unit and acceptance tests. They are
// written from the definitions, share no code with the library beyond its
// value types, and favour obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "tubekit/anchors.hpp"
#include "tubekit/evaluation.hpp"
#include "tubekit/geometry.hpp"
#include "tubekit/pooling.hpp"

namespace tubekit::oracle {

// Boxes with integer corners in [0, 64] are rasterised onto unit pixels.
inline bool pixel_in(const Box& b, int px, int py) {
  return px >= b.x1 && px + 1 <= b.x2 && py >= b.y1 && py + 1 <= b.y2;
}

inline double raster_iou(const Box& a, const Box& b) {
  long inter = 0;
  long uni = 0;
  for (int py = 0; py < 64; ++py) {
    for (int px = 0; px < 64; ++px) {
      const bool ia = pixel_in(a, px, py);
      const bool ib = pixel_in(b, px, py);
      inter += (ia && ib) ? 1 : 0;
      uni += (ia || ib) ? 1 : 0;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

inline double raster_tube_overlap(const Tube& a, const Tube& b) {
  return std::min(raster_iou(a.start, b.start), raster_iou(a.end, b.end));
}

/// Random box with integer corners, 1..max_side on each axis, inside [0, 64).
inline Box random_int_box(std::mt19937_64& rng, int max_side = 32) {
  std::uniform_int_distribution<int> side(1, max_side);
  const int w = side(rng);
  const int h = side(rng);
  std::uniform_int_distribution<int> px(0, 63 - w);
  std::uniform_int_distribution<int> py(0, 63 - h);
  const int x = px(rng);
  const int y = py(rng);
  return {double(x), double(y), double(x + w), double(y + h)};
}

/// Distinct values (tie-free) or a few coarse levels (many ties).
inline FeatureVolume random_volume(std::mt19937_64& rng, VolumeShape shape, double stride, bool distinct) {
  std::vector<double> v(shape.size());
  if (distinct) {
    std::iota(v.begin(), v.end(), 0.0);
    std::shuffle(v.begin(), v.end(), rng);
    for (double& x : v) x = x * 0.01 - 1.0;
  } else {
    std::uniform_int_distribution<int> coarse(0, 4);  // plenty of ties
    for (double& x : v) x = coarse(rng);
  }
  return FeatureVolume(shape, stride, std::move(v));
}

inline Tube random_tube(std::mt19937_64& rng, int length, double extent) {
  std::uniform_real_distribution<double> pos(-0.2 * extent, extent);
  std::uniform_real_distribution<double> side(1.0, 0.8 * extent);
  auto box = [&] {
    const double x = pos(rng);
    const double y = pos(rng);
    return Box{x, y, x + side(rng), y + side(rng)};
  };
  return Tube{0, length, box(), box()};
}

/// Textbook greedy suppression: pick the best remaining item (lowest index
/// on equal scores), drop everything too similar to it, repeat.
inline std::vector<std::size_t> greedy_nms(const std::vector<double>& scores,
                                           const std::function<double(std::size_t, std::size_t)>& similarity,
                                           double threshold) {
  std::set<std::size_t> alive;
  for (std::size_t i = 0; i < scores.size(); ++i) alive.insert(i);
  std::vector<std::size_t> kept;
  while (!alive.empty()) {
    std::size_t best = *alive.begin();
    for (std::size_t i : alive) {
      if (scores[i] > scores[best]) best = i;
    }
    kept.push_back(best);
    alive.erase(best);
    for (auto it = alive.begin(); it != alive.end();) {
      it = similarity(best, *it) > threshold ? alive.erase(it) : std::next(it);
    }
  }
  return kept;
}

/// Nested-loop TOI pooling: for each output cell, scan (t, y, x) in order
/// and keep the first strict maximum; average mode sums per-frame maxima in
/// frame order and divides by the contributing frame count.
struct PoolResult {
  std::vector<double> values;
  std::vector<VolumeIndex> argmax;  // max mode
};

inline PoolResult pool(const FeatureVolume& v, const Tube& tube, std::size_t side, TemporalMode mode) {
  const auto& s = v.shape();
  const double stride = v.stride();
  const std::size_t frames = s.frames;
  auto edge_lo = [&](double coord, std::size_t n) {
    double c = std::floor(coord / stride);
    c = std::max(0.0, std::min(c, double(n)));
    return std::size_t(c);
  };
  auto edge_hi = [&](double coord, std::size_t n) {
    double c = std::ceil(coord / stride);
    c = std::max(0.0, std::min(c, double(n)));
    return std::size_t(c);
  };

  PoolResult r;
  r.values.assign(s.channels * side * side, 0.0);
  r.argmax.assign(r.values.size(), {});
  std::vector<bool> seen(r.values.size(), false);
  std::size_t contributing = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    Box b = tube.start;
    if (t > 0) {
      if (t + 1 == frames) {
        b = tube.end;
      } else {
        const double f = double(t) / double(frames - 1);
        b = {tube.start.x1 + f * (tube.end.x1 - tube.start.x1), tube.start.y1 + f * (tube.end.y1 - tube.start.y1),
             tube.start.x2 + f * (tube.end.x2 - tube.start.x2), tube.start.y2 + f * (tube.end.y2 - tube.start.y2)};
      }
    }
    const std::size_t r0 = edge_lo(b.y1, s.height);
    const std::size_t r1 = edge_hi(b.y2, s.height);
    const std::size_t c0 = edge_lo(b.x1, s.width);
    const std::size_t c1 = edge_hi(b.x2, s.width);
    if (r1 <= r0 || c1 <= c0) continue;
    ++contributing;
    const std::size_t rows = r1 - r0;
    const std::size_t cols = c1 - c0;
    for (std::size_t c = 0; c < s.channels; ++c) {
      for (std::size_t py = 0; py < side; ++py) {
        const std::size_t y0 = r0 + (py * rows) / side;
        std::size_t y1 = r0 + ((py + 1) * rows + side - 1) / side;
        if (y1 <= y0) y1 = y0 + 1;
        for (std::size_t px = 0; px < side; ++px) {
          const std::size_t x0 = c0 + (px * cols) / side;
          std::size_t x1 = c0 + ((px + 1) * cols + side - 1) / side;
          if (x1 <= x0) x1 = x0 + 1;
          double best = 0.0;
          bool have = false;
          VolumeIndex at{};
          for (std::size_t y = y0; y < y1; ++y) {
            for (std::size_t x = x0; x < x1; ++x) {
              const double val = v.at(t, c, y, x);
              if (!have || val > best) {
                best = val;
                at = {t, y, x};
                have = true;
              }
            }
          }
          const std::size_t cell = (c * side + py) * side + px;
          if (mode == TemporalMode::kMax) {
            if (!seen[cell] || best > r.values[cell]) {
              r.values[cell] = best;
              r.argmax[cell] = at;
              seen[cell] = true;
            }
          } else {
            r.values[cell] += best;
          }
        }
      }
    }
  }
  if (mode == TemporalMode::kAverage && contributing > 0) {
    for (double& x : r.values) x /= double(contributing);
  }
  return r;
}

/// Scalar objective sum(weights * pooled) for finite differences.
inline double pooled_dot(const FeatureVolume& v, const Tube& tube, std::size_t side, TemporalMode mode,
                         const std::vector<double>& weights) {
  const auto r = pool(v, tube, side, mode);
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * r.values[i];
  return s;
}

/// Decode one box from centre/log-size deltas.
inline Box decode_box(const Box& a, double tx, double ty, double tw, double th) {
  const double aw = a.x2 - a.x1;
  const double ah = a.y2 - a.y1;
  const double cx = (a.x1 + a.x2) / 2 + tx * aw;
  const double cy = (a.y1 + a.y2) / 2 + ty * ah;
  const double w = aw * std::exp(tw);
  const double h = ah * std::exp(th);
  return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
}

/// Decode every anchor, clamp, drop empty results, sort by score
/// (stable), greedy tube suppression, truncate.
inline std::vector<ScoredTube> propose(const std::vector<double>& scores, const std::vector<double>& deltas,
                                       const AnchorGrid& grid, double width, double height, std::size_t top_n,
                                       double threshold) {
  std::vector<ScoredTube> cands;
  for (std::size_t a = 0; a < grid.anchors.size(); ++a) {
    const auto& d = &deltas[a * 8];
    Tube t = grid.anchors[a];
    t.start = decode_box(t.start, d[0], d[1], d[2], d[3]);
    t.end = decode_box(t.end, d[4], d[5], d[6], d[7]);
    auto clamp = [&](Box b) {
      b.x1 = std::clamp(b.x1, 0.0, width);
      b.x2 = std::clamp(b.x2, 0.0, width);
      b.y1 = std::clamp(b.y1, 0.0, height);
      b.y2 = std::clamp(b.y2, 0.0, height);
      return b;
    };
    t.start = clamp(t.start);
    t.end = clamp(t.end);
    if (!(t.start.x2 > t.start.x1 && t.start.y2 > t.start.y1 && t.end.x2 > t.end.x1 && t.end.y2 > t.end.y1)) {
      continue;
    }
    cands.push_back({t, scores[a], std::nullopt});
  }
  std::vector<double> s;
  for (const auto& c : cands) s.push_back(c.score);
  const auto kept = greedy_nms(
      s, [&](std::size_t i, std::size_t j) { return tube_overlap(cands[i].tube, cands[j].tube); }, threshold);
  std::vector<ScoredTube> out;
  for (std::size_t i = 0; i < kept.size() && out.size() < top_n; ++i) out.push_back(cands[kept[i]]);
  return out;
}

/// Precision-recall area with the precision envelope, computed as the mean
/// over ground truths of the best precision at or beyond the rank where each
/// one was found (missed ground truths contribute 0).
inline std::map<int, double> average_precision(const std::vector<Detection>& dets,
                                               const std::vector<GroundTruthBox>& gts, double thr) {
  std::map<int, double> out;
  std::set<int> classes;
  for (const auto& g : gts) classes.insert(g.class_id);
  for (int cls : classes) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (dets[i].class_id == cls) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
    std::vector<std::size_t> cls_gt;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gts[g].class_id == cls) cls_gt.push_back(g);
    }
    std::vector<bool> used(gts.size(), false);
    std::vector<bool> tp;
    for (std::size_t i : order) {
      double best = -1.0;
      std::optional<std::size_t> pick;
      for (std::size_t g : cls_gt) {
        if (used[g] || gts[g].video != dets[i].video || gts[g].frame != dets[i].frame) continue;
        const double o = iou(dets[i].box, gts[g].box);
        if (o > best) {
          best = o;
          pick = g;
        }
      }
      const bool hit = pick && best >= thr;
      if (hit) used[*pick] = true;
      tp.push_back(hit);
    }
    std::vector<double> precision;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < tp.size(); ++k) {
      hits += tp[k] ? 1 : 0;
      precision.push_back(double(hits) / double(k + 1));
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < tp.size(); ++k) {
      if (!tp[k]) continue;
      sum += *std::max_element(precision.begin() + std::ptrdiff_t(k), precision.end());
    }
    out[cls] = sum / double(cls_gt.size());
  }
  return out;
}

inline std::map<int, double> corloc(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts,
                                    double thr) {
  using Key = std::pair<std::string, int>;
  std::map<int, std::set<Key>> positive;
  for (const auto& g : gts) positive[g.class_id].insert({g.video, g.frame});
  std::map<int, double> out;
  for (const auto& [cls, frames] : positive) {
    std::size_t good = 0;
    for (const auto& [video, frame] : frames) {
      const Detection* top = nullptr;
      for (const auto& d : dets) {
        if (d.class_id == cls && d.video == video && d.frame == frame && (top == nullptr || d.score > top->score)) {
          top = &d;
        }
      }
      if (top == nullptr) continue;
      for (const auto& g : gts) {
        if (g.class_id == cls && g.video == video && g.frame == frame && iou(top->box, g.box) >= thr) {
          ++good;
          break;
        }
      }
    }
    out[cls] = double(good) / double(frames.size());
  }
  return out;
}

/// All-pairs tube recall.
inline double tube_recall(const std::vector<Tube>& props, const std::vector<Tube>& gts, double thr) {
  std::size_t hit = 0;
  for (const auto& g : gts) {
    bool any = false;
    for (const auto& p : props) any = any || tube_overlap(p, g) >= thr;
    hit += any ? 1 : 0;
  }
  return double(hit) / double(gts.size());
}

/// All-pairs box recall over the annotated frames of `chunk`.
inline double box_recall(const std::vector<Tube>& props, const std::vector<Track>& tracks, const Chunk& chunk,
                         double thr) {
  std::size_t hit = 0;
  std::size_t total = 0;
  for (const auto& tr : tracks) {
    for (const auto& e : tr.entries) {
      if (e.frame < chunk.t0 || e.frame >= chunk.t0 + chunk.length) continue;
      ++total;
      bool any = false;
      for (const auto& p : props) any = any || iou(interpolate_tube(p, e.frame - chunk.t0), e.box) >= thr;
      hit += any ? 1 : 0;
    }
  }
  return double(hit) / double(total);
}

}  // namespace tubekit::oracle
