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

#include <array>
#include <span>
#include <string>
#include <vector>

namespace tubekit {

/// Axis-aligned rectangle in continuous pixel coordinates. Right and bottom
/// edges are exclusive, so a box is valid only with strictly positive extent.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }
  bool valid() const;

  Box translated(double dx, double dy) const { return {x1 + dx, y1 + dy, x2 + dx, y2 + dy}; }
  std::array<double, 4> coords() const { return {x1, y1, x2, y2}; }
  static Box from_coords(const std::array<double, 4>& c) { return {c[0], c[1], c[2], c[3]}; }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Linear space-time tube over `length` frames starting at frame `t0`,
/// represented by its first- and last-frame boxes.
struct Tube {
  int t0 = 0;
  int length = 1;
  Box start;
  Box end;

  bool valid() const { return length >= 1 && start.valid() && end.valid(); }
  bool static_motion() const { return start == end; }

  friend bool operator==(const Tube&, const Tube&) = default;
};

/// A tube carrying an object class, e.g. a linearised ground-truth track.
struct LabeledTube {
  Tube tube;
  int class_id = 0;

  friend bool operator==(const LabeledTube&, const LabeledTube&) = default;
};

struct TrackEntry {
  int frame = 0;
  Box box;

  friend bool operator==(const TrackEntry&, const TrackEntry&) = default;
};

/// Ground-truth box sequence of one object. Frames are strictly increasing.
struct Track {
  std::string video;
  int class_id = 0;
  std::vector<TrackEntry> entries;

  friend bool operator==(const Track&, const Track&) = default;
};

struct Chunk {
  std::string video;
  int t0 = 0;
  int length = 1;

  int last_frame() const { return t0 + length - 1; }
  bool contains(int frame) const { return frame >= t0 && frame < t0 + length; }
};

/// Result of linearising a track inside a chunk.
struct LinearFit {
  Tube tube;
  /// Annotated frames inside the chunk divided by chunk length.
  double coverage = 0.0;
  /// Largest absolute per-coordinate residual of the least-squares lines.
  double max_residual = 0.0;
};

/// Intersection over union. Throws std::invalid_argument on invalid boxes.
double iou(const Box& a, const Box& b);

/// Overlap area of two boxes (0 when disjoint). No validity check.
double intersection_area(const Box& a, const Box& b);

/// Minimum of the start-box IoU and the end-box IoU. Tubes are compared
/// end-to-end; `t0` is not inspected.
double tube_overlap(const Tube& a, const Tube& b);

/// Box at frame offset `k` (0 <= k < length) under uniform linear motion.
Box interpolate_tube(const Tube& tube, int k);

/// Per-coordinate ordinary least squares over the entries inside `chunk`,
/// evaluated at offsets 0 and length-1. A single entry yields a static tube.
/// Throws std::invalid_argument when no entry falls inside the chunk, when
/// frames are not strictly increasing, or when the fitted endpoints are not
/// valid boxes.
LinearFit fit_linear_tube(std::span<const TrackEntry> entries, const Chunk& chunk);

/// Clamps a box to [0,width]x[0,height]. Throws OutsideFrameError if nothing
/// of the box remains.
Box clip_box(const Box& box, double width, double height);

/// Clamps both end boxes. Throws OutsideFrameError if either end vanishes.
Tube clip_tube(const Tube& tube, double width, double height);

}  // namespace tubekit
