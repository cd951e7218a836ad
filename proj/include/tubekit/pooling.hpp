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
#include <span>
#include <vector>

#include "tubekit/geometry.hpp"

namespace tubekit {

struct VolumeShape {
  std::size_t frames = 1;
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t size() const { return frames * channels * height * width; }
  friend bool operator==(const VolumeShape&, const VolumeShape&) = default;
};

/// Dense T x C x H x W tensor, row-major. `stride` is the number of pixels
/// per feature cell and ties cell (y, x) to the pixel square
/// [x*stride, (x+1)*stride) x [y*stride, (y+1)*stride).
class FeatureVolume {
 public:
  FeatureVolume() = default;
  /// Zero-filled volume.
  FeatureVolume(VolumeShape shape, double stride);
  FeatureVolume(VolumeShape shape, double stride, std::vector<double> values);

  const VolumeShape& shape() const { return shape_; }
  double stride() const { return stride_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  std::size_t offset(std::size_t t, std::size_t c, std::size_t y, std::size_t x) const {
    return ((t * shape_.channels + c) * shape_.height + y) * shape_.width + x;
  }
  double at(std::size_t t, std::size_t c, std::size_t y, std::size_t x) const { return values_[offset(t, c, y, x)]; }
  double& at(std::size_t t, std::size_t c, std::size_t y, std::size_t x) { return values_[offset(t, c, y, x)]; }

  friend bool operator==(const FeatureVolume&, const FeatureVolume&) = default;

 private:
  VolumeShape shape_;
  double stride_ = 1.0;
  std::vector<double> values_;
};

enum class TemporalMode { kMax, kAverage };

struct VolumeIndex {
  std::size_t t = 0;
  std::size_t y = 0;
  std::size_t x = 0;

  friend bool operator==(const VolumeIndex&, const VolumeIndex&) = default;
};

/// C x P x P pooled features plus the routing needed by the backward pass.
struct PooledMap {
  std::size_t channels = 0;
  std::size_t side = 0;
  TemporalMode mode = TemporalMode::kMax;
  std::vector<double> values;
  /// Source element of every output cell. Max mode only.
  std::vector<VolumeIndex> argmax;
  /// Frames whose mapped region was non-empty, ascending.
  std::vector<std::size_t> frames;
  /// Spatial argmax per contributing frame: frames.size() x C x P x P.
  std::vector<VolumeIndex> frame_argmax;
  VolumeShape source_shape;
  double source_stride = 1.0;

  std::size_t cell(std::size_t c, std::size_t py, std::size_t px) const { return (c * side + py) * side + px; }
};

/// Integer cell range [begin, end) along one axis.
struct CellRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool empty() const { return end <= begin; }
};

/// Feature-cell span of the pixel interval [lo, hi): floor(lo/stride) to
/// ceil(hi/stride), clamped to [0, extent]. Empty when fully outside.
CellRange map_to_cells(double lo, double hi, double stride, std::size_t extent);

/// Bin `p` of `bins` over `range`: floor(p*L/P) to ceil((p+1)*L/P) relative
/// to range.begin. Never empty for a non-empty range.
CellRange pooling_bin(const CellRange& range, std::size_t p, std::size_t bins);

/// Tube-of-interest pooling. Frame k of the tube samples frame k of the
/// volume at interpolate_tube(tube, k), max-pools it to side x side per
/// channel, and the per-frame maps are aggregated over time by `mode`.
/// Frames whose mapped region is empty do not contribute.
///
/// Throws std::invalid_argument if tube.length differs from the volume's
/// frame count, `side` is zero, or no frame of the tube maps inside the volume.
PooledMap toi_pool_forward(const FeatureVolume& volume, const Tube& tube, std::size_t side,
                           TemporalMode mode = TemporalMode::kMax);

/// Pools many tubes; work is split across `threads` workers (0 picks the
/// hardware concurrency). Output order and values match sequential calls.
std::vector<PooledMap> toi_pool_forward_batch(const FeatureVolume& volume, std::span<const Tube> tubes,
                                              std::size_t side, TemporalMode mode, std::size_t threads = 0);

/// Gradient of the pooled output with respect to the source volume.
/// Max mode routes each output gradient to its argmax; average mode gives
/// each contributing frame's spatial argmax grad / (number of frames).
FeatureVolume toi_pool_backward(std::span<const double> grad_out, const PooledMap& pooled);

/// Region-of-interest pooling of a single frame of `volume`.
PooledMap roi_pool_forward(const FeatureVolume& volume, std::size_t frame, const Box& box, std::size_t side);

FeatureVolume roi_pool_backward(std::span<const double> grad_out, const PooledMap& pooled);

}  // namespace tubekit
