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

#include "tubekit/pooling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace tubekit {

FeatureVolume::FeatureVolume(VolumeShape shape, double stride)
    : FeatureVolume(shape, stride, std::vector<double>(shape.size(), 0.0)) {}

FeatureVolume::FeatureVolume(VolumeShape shape, double stride, std::vector<double> values)
    : shape_(shape), stride_(stride), values_(std::move(values)) {
  if (shape_.frames == 0 || shape_.channels == 0 || shape_.height == 0 || shape_.width == 0) {
    throw std::invalid_argument("FeatureVolume: every dimension must be at least 1");
  }
  if (!(stride_ > 0.0) || !std::isfinite(stride_)) throw std::invalid_argument("FeatureVolume: stride must be positive");
  if (values_.size() != shape_.size()) {
    throw std::invalid_argument("FeatureVolume: " + std::to_string(values_.size()) + " values for " +
                                std::to_string(shape_.size()) + " elements");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("FeatureVolume: non-finite value");
  }
}

CellRange map_to_cells(double lo, double hi, double stride, std::size_t extent) {
  const double n = static_cast<double>(extent);
  const double first = std::clamp(std::floor(lo / stride), 0.0, n);
  const double last = std::clamp(std::ceil(hi / stride), 0.0, n);
  return {static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
}

CellRange pooling_bin(const CellRange& range, std::size_t p, std::size_t bins) {
  const std::size_t len = range.end - range.begin;
  const std::size_t lo = (p * len) / bins;
  const std::size_t hi = std::max(((p + 1) * len + bins - 1) / bins, lo + 1);
  return {range.begin + lo, range.begin + hi};
}

namespace {

// Spatial max pooling of one frame into `values`/`where` (C x P x P).
// Returns false when the box maps to no cell of the frame.
bool pool_frame(const FeatureVolume& volume, std::size_t t, const Box& box, std::size_t side, double* values,
                VolumeIndex* where) {
  const auto& s = volume.shape();
  const CellRange rows = map_to_cells(box.y1, box.y2, volume.stride(), s.height);
  const CellRange cols = map_to_cells(box.x1, box.x2, volume.stride(), s.width);
  if (rows.empty() || cols.empty()) return false;

  for (std::size_t c = 0; c < s.channels; ++c) {
    for (std::size_t py = 0; py < side; ++py) {
      const CellRange ybin = pooling_bin(rows, py, side);
      for (std::size_t px = 0; px < side; ++px) {
        const CellRange xbin = pooling_bin(cols, px, side);
        double best = volume.at(t, c, ybin.begin, xbin.begin);
        VolumeIndex best_at{t, ybin.begin, xbin.begin};
        for (std::size_t y = ybin.begin; y < ybin.end; ++y) {
          for (std::size_t x = xbin.begin; x < xbin.end; ++x) {
            const double v = volume.at(t, c, y, x);
            if (v > best) {
              best = v;
              best_at = {t, y, x};
            }
          }
        }
        const std::size_t cell = (c * side + py) * side + px;
        values[cell] = best;
        where[cell] = best_at;
      }
    }
  }
  return true;
}

}  // namespace

PooledMap toi_pool_forward(const FeatureVolume& volume, const Tube& tube, std::size_t side, TemporalMode mode) {
  const auto& s = volume.shape();
  if (side == 0) throw std::invalid_argument("toi_pool_forward: pooled side must be at least 1");
  if (!tube.valid()) throw std::invalid_argument("toi_pool_forward: invalid tube");
  if (tube.length < 1 || static_cast<std::size_t>(tube.length) != s.frames) {
    throw std::invalid_argument("toi_pool_forward: tube spans " + std::to_string(tube.length) +
                                " frames, volume has " + std::to_string(s.frames));
  }

  const std::size_t cells = s.channels * side * side;
  PooledMap out;
  out.channels = s.channels;
  out.side = side;
  out.mode = mode;
  out.values.assign(cells, 0.0);
  out.source_shape = s;
  out.source_stride = volume.stride();

  std::vector<double> frame_values(cells);
  std::vector<VolumeIndex> frame_where(cells);
  for (std::size_t t = 0; t < s.frames; ++t) {
    const Box box = interpolate_tube(tube, static_cast<int>(t));
    if (!pool_frame(volume, t, box, side, frame_values.data(), frame_where.data())) continue;

    const bool first = out.frames.empty();
    out.frames.push_back(t);
    out.frame_argmax.insert(out.frame_argmax.end(), frame_where.begin(), frame_where.end());
    if (mode == TemporalMode::kMax) {
      if (first) {
        out.values = frame_values;
        out.argmax = frame_where;
      } else {
        for (std::size_t i = 0; i < cells; ++i) {
          if (frame_values[i] > out.values[i]) {
            out.values[i] = frame_values[i];
            out.argmax[i] = frame_where[i];
          }
        }
      }
    } else {
      for (std::size_t i = 0; i < cells; ++i) out.values[i] += frame_values[i];
    }
  }

  if (out.frames.empty()) throw std::invalid_argument("toi_pool_forward: tube lies outside the feature volume");
  if (mode == TemporalMode::kAverage) {
    const double n = static_cast<double>(out.frames.size());
    for (double& v : out.values) v /= n;
  }
  return out;
}

std::vector<PooledMap> toi_pool_forward_batch(const FeatureVolume& volume, std::span<const Tube> tubes,
                                              std::size_t side, TemporalMode mode, std::size_t threads) {
  std::vector<PooledMap> out(tubes.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(tubes.size(), 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < tubes.size(); ++i) out[i] = toi_pool_forward(volume, tubes[i], side, mode);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(tubes.size());
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < tubes.size(); i = next++) {
          try {
            out[i] = toi_pool_forward(volume, tubes[i], side, mode);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

FeatureVolume toi_pool_backward(std::span<const double> grad_out, const PooledMap& pooled) {
  const std::size_t cells = pooled.channels * pooled.side * pooled.side;
  if (grad_out.size() != cells || pooled.values.size() != cells) {
    throw std::invalid_argument("toi_pool_backward: gradient has " + std::to_string(grad_out.size()) +
                                " entries, pooled map has " + std::to_string(cells));
  }
  if (pooled.source_shape.channels != pooled.channels) {
    throw std::invalid_argument("toi_pool_backward: pooled map does not match its source shape");
  }

  FeatureVolume grad(pooled.source_shape, pooled.source_stride);
  const std::size_t per_cell = pooled.side * pooled.side;
  if (pooled.mode == TemporalMode::kMax) {
    if (pooled.argmax.size() != cells) throw std::invalid_argument("toi_pool_backward: missing argmax record");
    for (std::size_t i = 0; i < cells; ++i) {
      const auto& at = pooled.argmax[i];
      grad.at(at.t, i / per_cell, at.y, at.x) += grad_out[i];
    }
    return grad;
  }

  const std::size_t n = pooled.frames.size();
  if (n == 0 || pooled.frame_argmax.size() != n * cells) {
    throw std::invalid_argument("toi_pool_backward: missing per-frame argmax record");
  }
  const double share = 1.0 / static_cast<double>(n);
  for (std::size_t f = 0; f < n; ++f) {
    for (std::size_t i = 0; i < cells; ++i) {
      const auto& at = pooled.frame_argmax[f * cells + i];
      grad.at(at.t, i / per_cell, at.y, at.x) += grad_out[i] * share;
    }
  }
  return grad;
}

PooledMap roi_pool_forward(const FeatureVolume& volume, std::size_t frame, const Box& box, std::size_t side) {
  const auto& s = volume.shape();
  if (frame >= s.frames) throw std::invalid_argument("roi_pool_forward: frame index out of range");
  if (side == 0) throw std::invalid_argument("roi_pool_forward: pooled side must be at least 1");
  if (!box.valid()) throw std::invalid_argument("roi_pool_forward: invalid box");

  const std::size_t cells = s.channels * side * side;
  PooledMap out;
  out.channels = s.channels;
  out.side = side;
  out.mode = TemporalMode::kMax;
  out.values.assign(cells, 0.0);
  out.argmax.assign(cells, {});
  out.source_shape = s;
  out.source_stride = volume.stride();
  if (!pool_frame(volume, frame, box, side, out.values.data(), out.argmax.data())) {
    throw std::invalid_argument("roi_pool_forward: box lies outside the feature map");
  }
  out.frames = {frame};
  out.frame_argmax = out.argmax;
  return out;
}

FeatureVolume roi_pool_backward(std::span<const double> grad_out, const PooledMap& pooled) {
  return toi_pool_backward(grad_out, pooled);
}

}  // namespace tubekit
