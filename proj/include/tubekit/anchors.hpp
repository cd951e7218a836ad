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
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tubekit/geometry.hpp"
#include "tubekit/suppression.hpp"

namespace tubekit {

/// Anchor shapes attached to every seed location of a feature volume.
/// Aspect ratios are width:height.
struct AnchorConfig {
  double stride = 16.0;
  std::vector<double> scales{16.0, 32.0, 64.0, 128.0, 256.0, 512.0};
  std::vector<double> aspect_ratios{1.0};

  std::size_t anchors_per_seed() const { return scales.size() * aspect_ratios.size(); }
  void validate() const;

  friend bool operator==(const AnchorConfig&, const AnchorConfig&) = default;
};

/// Zero-motion reference tubes, seed-major (row-major over the feature grid),
/// then scale-major within a seed: anchor k = scale_index * |ratios| + ratio_index.
struct AnchorGrid {
  int height = 0;
  int width = 0;
  AnchorConfig config;
  std::vector<Tube> anchors;

  std::size_t anchors_per_seed() const { return config.anchors_per_seed(); }
  std::size_t index(int row, int col, std::size_t k) const {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)) *
               anchors_per_seed() +
           k;
  }
};

/// Start-box (tx, ty, tw, th) followed by end-box (tx, ty, tw, th).
using RegressionParams = std::array<double, 8>;

AnchorGrid generate_anchor_grid(int height, int width, const AnchorConfig& config, int tube_length,
                                int t0 = 0);

RegressionParams encode_regression(const Tube& anchor, const Tube& target);

/// Inverse of encode_regression. Throws std::invalid_argument when the
/// result has non-finite or non-positive extent.
Tube decode_regression(const Tube& anchor, const RegressionParams& params);

enum class AnchorLabel { kNegative, kPositive, kIgnore };

struct AnchorLabelThresholds {
  double positive = 0.5;  // overlap >= positive
  double negative = 0.3;  // overlap <= negative

  friend bool operator==(const AnchorLabelThresholds&, const AnchorLabelThresholds&) = default;
};

/// Class-agnostic labels from the best tube overlap over all ground truths.
std::vector<AnchorLabel> assign_anchor_labels(std::span<const Tube> anchors, std::span<const Tube> ground_truth,
                                              const AnchorLabelThresholds& thresholds = {});

enum class ProposalLabel { kForeground, kBackground, kExcluded };

struct ProposalLabelThresholds {
  double foreground = 0.5;      // overlap >= foreground
  double background_low = 0.1;  // background_low <= overlap < foreground

  friend bool operator==(const ProposalLabelThresholds&, const ProposalLabelThresholds&) = default;
};

struct ProposalAssignment {
  ProposalLabel label = ProposalLabel::kExcluded;
  /// Class of the matched ground truth for foreground proposals.
  std::optional<int> class_id;
  /// Best-overlap ground truth (lowest index on ties); empty without ground truth.
  std::optional<std::size_t> matched;
  double overlap = 0.0;
  /// encode_regression(proposal, matched) for foreground proposals.
  std::optional<RegressionParams> target;
};

std::vector<ProposalAssignment> assign_proposal_labels(std::span<const Tube> proposals,
                                                       std::span<const LabeledTube> ground_truth,
                                                       const ProposalLabelThresholds& thresholds = {});

struct ProposalOptions {
  double frame_width = 0.0;
  double frame_height = 0.0;
  std::size_t top_n = 300;
  double nms_threshold = 0.7;
};

/// Decodes every anchor with its regression slice, clips to the frame,
/// suppresses with tube NMS and keeps the `top_n` best survivors.
///
/// `scores` is laid out H'xW'xK and `deltas` H'xW'xKx8, both in the grid's
/// anchor order. Anchors whose decoded tube is degenerate or lies outside the
/// frame are dropped before suppression.
std::vector<ScoredTube> propose_from_maps(std::span<const double> scores, std::span<const double> deltas,
                                          const AnchorGrid& grid, const ProposalOptions& options);

double smooth_l1(double x);
double smooth_l1_gradient(double x);

}  // namespace tubekit
