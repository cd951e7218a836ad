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

#include "tubekit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tubekit/error.hpp"

namespace tubekit {

bool Box::valid() const {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
         x2 > x1 && y2 > y1;
}

double intersection_area(const Box& a, const Box& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const Box& a, const Box& b) {
  if (!a.valid() || !b.valid()) throw std::invalid_argument("iou: box with non-positive extent");
  const double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double tube_overlap(const Tube& a, const Tube& b) {
  if (!a.valid() || !b.valid()) throw std::invalid_argument("tube_overlap: invalid tube");
  return std::min(iou(a.start, b.start), iou(a.end, b.end));
}

Box interpolate_tube(const Tube& tube, int k) {
  if (k < 0 || k >= tube.length) {
    throw std::invalid_argument("interpolate_tube: frame offset " + std::to_string(k) +
                                " outside [0, " + std::to_string(tube.length - 1) + "]");
  }
  if (k == 0 || tube.length == 1) return tube.start;
  if (k == tube.length - 1) return tube.end;
  const double f = static_cast<double>(k) / static_cast<double>(tube.length - 1);
  auto lerp = [f](double s, double e) { return s + f * (e - s); };
  return {lerp(tube.start.x1, tube.end.x1), lerp(tube.start.y1, tube.end.y1),
          lerp(tube.start.x2, tube.end.x2), lerp(tube.start.y2, tube.end.y2)};
}

LinearFit fit_linear_tube(std::span<const TrackEntry> entries, const Chunk& chunk) {
  if (chunk.length < 1) throw std::invalid_argument("fit_linear_tube: chunk length < 1");
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].frame <= entries[i - 1].frame) {
      throw std::invalid_argument("fit_linear_tube: track frames not strictly increasing");
    }
  }

  std::vector<double> offsets;
  std::vector<std::array<double, 4>> values;
  for (const auto& e : entries) {
    if (!chunk.contains(e.frame)) continue;
    offsets.push_back(static_cast<double>(e.frame - chunk.t0));
    values.push_back(e.box.coords());
  }
  if (offsets.empty()) throw std::invalid_argument("fit_linear_tube: track does not intersect chunk");

  const double n = static_cast<double>(offsets.size());
  double mean_k = 0.0;
  for (double k : offsets) mean_k += k;
  mean_k /= n;
  double sxx = 0.0;
  for (double k : offsets) sxx += (k - mean_k) * (k - mean_k);

  const double last = static_cast<double>(chunk.length - 1);
  std::array<double, 4> at_start{};
  std::array<double, 4> at_end{};
  double max_residual = 0.0;
  for (int c = 0; c < 4; ++c) {
    double mean_v = 0.0;
    for (const auto& v : values) mean_v += v[c];
    mean_v /= n;
    double sxy = 0.0;
    for (std::size_t i = 0; i < offsets.size(); ++i) sxy += (offsets[i] - mean_k) * (values[i][c] - mean_v);
    // One sample (sxx == 0) gives a constant fit.
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    const double intercept = mean_v - slope * mean_k;
    at_start[c] = intercept;
    at_end[c] = intercept + slope * last;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      max_residual = std::max(max_residual, std::abs(values[i][c] - (intercept + slope * offsets[i])));
    }
  }

  LinearFit fit;
  fit.tube = Tube{chunk.t0, chunk.length, Box::from_coords(at_start), Box::from_coords(at_end)};
  if (chunk.length == 1) fit.tube.end = fit.tube.start;
  if (!fit.tube.valid()) throw std::invalid_argument("fit_linear_tube: fitted tube is degenerate");
  fit.coverage = n / static_cast<double>(chunk.length);
  fit.max_residual = max_residual;
  return fit;
}

Box clip_box(const Box& box, double width, double height) {
  if (!(width > 0.0) || !(height > 0.0)) throw std::invalid_argument("clip_box: non-positive frame size");
  Box out{std::clamp(box.x1, 0.0, width), std::clamp(box.y1, 0.0, height), std::clamp(box.x2, 0.0, width),
          std::clamp(box.y2, 0.0, height)};
  if (!out.valid()) throw OutsideFrameError("clip_box: box lies outside the frame");
  return out;
}

Tube clip_tube(const Tube& tube, double width, double height) {
  return Tube{tube.t0, tube.length, clip_box(tube.start, width, height), clip_box(tube.end, width, height)};
}

}  // namespace tubekit
