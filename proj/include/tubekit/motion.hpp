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
#include <cstdint>
#include <span>
#include <vector>

#include "tubekit/geometry.hpp"

namespace tubekit {

/// Point displacement between the first and last frame of a chunk.
struct PointTrack {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double dx() const { return x1 - x0; }
  double dy() const { return y1 - y0; }

  friend bool operator==(const PointTrack&, const PointTrack&) = default;
};

struct MotionConfig {
  int direction_bins = 16;
  int hypotheses = 4;
  /// Tracks moving less than this (pixels) are stationary.
  double stationary_epsilon = 0.5;
  int ransac_iterations = 100;
  double inlier_threshold = 2.0;
  /// Groups with fewer tracks are not turned into hypotheses.
  std::size_t min_group_size = 3;

  void validate() const;
  friend bool operator==(const MotionConfig&, const MotionConfig&) = default;
};

/// Direction group of a track: kStationaryGroup or a bin in [0, direction_bins).
inline constexpr int kStationaryGroup = -1;

/// Bin centred on the direction angle; bin 0 covers rightward motion.
int direction_group(const PointTrack& track, const MotionConfig& config);

struct Displacement {
  double dx = 0.0;
  double dy = 0.0;

  friend bool operator==(const Displacement&, const Displacement&) = default;
};

struct TranslationConsensus {
  Displacement displacement;
  std::size_t inliers = 0;
};

/// RANSAC over single-track translation hypotheses. The consensus is the
/// mean displacement of the best hypothesis' inliers; ties in inlier count
/// keep the earlier hypothesis. Deterministic for a given `seed`.
TranslationConsensus estimate_translation(std::span<const PointTrack> tracks, const MotionConfig& config,
                                          std::uint64_t seed);

struct MotionProposal {
  Tube tube;
  std::size_t seed_index = 0;
  /// Direction group that produced the hypothesis; kStationaryGroup also
  /// marks the fallback tube.
  int group = kStationaryGroup;
  std::size_t group_size = 0;
  std::size_t inliers = 0;
  /// True for the zero-motion tube emitted when no group qualified.
  bool fallback = false;
};

struct MotionChunk {
  int t0 = 0;
  int length = 10;
  double frame_width = 0.0;
  double frame_height = 0.0;
};

/// Turns start-frame seed boxes into tube proposals by clustering the
/// displacements of their interior point tracks into direction groups and
/// fitting one translation per populated group. Per seed box, hypotheses are
/// ordered by group population (largest first). Seeds use independent RNG
/// streams derived from (seed, seed index).
///
/// Throws std::invalid_argument for chunk length < 2 or an invalid config,
/// and OutsideFrameError for a seed box outside the frame.
std::vector<MotionProposal> tube_proposals_from_tracks(std::span<const Box> seeds,
                                                       std::span<const PointTrack> tracks, const MotionChunk& chunk,
                                                       const MotionConfig& config, std::uint64_t seed);

/// Seed for the RNG stream of one seed box.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace tubekit
