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

#include "tubekit/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tubekit/error.hpp"

namespace tubekit {

void AnchorConfig::validate() const {
  if (!(stride > 0.0)) throw std::invalid_argument("anchor config: stride must be positive");
  if (scales.empty()) throw std::invalid_argument("anchor config: no scales");
  if (aspect_ratios.empty()) throw std::invalid_argument("anchor config: no aspect ratios");
  for (double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("anchor config: scale must be positive");
  }
  for (double r : aspect_ratios) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("anchor config: aspect ratio must be positive");
  }
}

AnchorGrid generate_anchor_grid(int height, int width, const AnchorConfig& config, int tube_length, int t0) {
  if (height < 1 || width < 1) throw std::invalid_argument("generate_anchor_grid: empty feature grid");
  if (tube_length < 1) throw std::invalid_argument("generate_anchor_grid: tube length < 1");
  config.validate();

  // Shapes are shared by all seeds; only the center moves.
  std::vector<std::pair<double, double>> shapes;
  shapes.reserve(config.anchors_per_seed());
  for (double scale : config.scales) {
    for (double ratio : config.aspect_ratios) {
      const double root = std::sqrt(ratio);
      shapes.emplace_back(scale * root, scale / root);
    }
  }

  AnchorGrid grid{height, width, config, {}};
  grid.anchors.reserve(static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * shapes.size());
  for (int i = 0; i < height; ++i) {
    const double cy = (i + 0.5) * config.stride;
    for (int j = 0; j < width; ++j) {
      const double cx = (j + 0.5) * config.stride;
      for (const auto& [w, h] : shapes) {
        const Box box{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
        grid.anchors.push_back(Tube{t0, tube_length, box, box});
      }
    }
  }
  return grid;
}

namespace {

std::array<double, 4> encode_box(const Box& anchor, const Box& target) {
  if (!anchor.valid()) throw std::invalid_argument("encode_regression: degenerate anchor box");
  if (!target.valid()) throw std::invalid_argument("encode_regression: degenerate target box");
  return {(target.center_x() - anchor.center_x()) / anchor.width(),
          (target.center_y() - anchor.center_y()) / anchor.height(), std::log(target.width() / anchor.width()),
          std::log(target.height() / anchor.height())};
}

Box decode_box(const Box& anchor, double tx, double ty, double tw, double th) {
  if (!anchor.valid()) throw std::invalid_argument("decode_regression: degenerate anchor box");
  if (tx == 0.0 && ty == 0.0 && tw == 0.0 && th == 0.0) return anchor;
  const double cx = anchor.center_x() + tx * anchor.width();
  const double cy = anchor.center_y() + ty * anchor.height();
  const double w = anchor.width() * std::exp(tw);
  const double h = anchor.height() * std::exp(th);
  const Box out{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
  if (!out.valid()) throw std::invalid_argument("decode_regression: non-finite or empty decoded box");
  return out;
}

}  // namespace

RegressionParams encode_regression(const Tube& anchor, const Tube& target) {
  const auto s = encode_box(anchor.start, target.start);
  const auto e = encode_box(anchor.end, target.end);
  return {s[0], s[1], s[2], s[3], e[0], e[1], e[2], e[3]};
}

Tube decode_regression(const Tube& anchor, const RegressionParams& p) {
  return Tube{anchor.t0, anchor.length, decode_box(anchor.start, p[0], p[1], p[2], p[3]),
              decode_box(anchor.end, p[4], p[5], p[6], p[7])};
}

namespace {

void require_shared_length(std::span<const Tube> tubes, int length, const char* what) {
  for (const auto& t : tubes) {
    if (t.length != length) throw std::invalid_argument(std::string(what) + ": tubes of different chunk lengths");
  }
}

}  // namespace

std::vector<AnchorLabel> assign_anchor_labels(std::span<const Tube> anchors, std::span<const Tube> ground_truth,
                                              const AnchorLabelThresholds& thresholds) {
  if (!anchors.empty()) {
    require_shared_length(anchors, anchors.front().length, "assign_anchor_labels");
    require_shared_length(ground_truth, anchors.front().length, "assign_anchor_labels");
  }
  std::vector<AnchorLabel> labels;
  labels.reserve(anchors.size());
  for (const auto& anchor : anchors) {
    double best = 0.0;
    for (const auto& gt : ground_truth) best = std::max(best, tube_overlap(anchor, gt));
    if (best >= thresholds.positive) {
      labels.push_back(AnchorLabel::kPositive);
    } else if (best <= thresholds.negative) {
      labels.push_back(AnchorLabel::kNegative);
    } else {
      labels.push_back(AnchorLabel::kIgnore);
    }
  }
  return labels;
}

std::vector<ProposalAssignment> assign_proposal_labels(std::span<const Tube> proposals,
                                                       std::span<const LabeledTube> ground_truth,
                                                       const ProposalLabelThresholds& thresholds) {
  if (!proposals.empty()) {
    const int length = proposals.front().length;
    require_shared_length(proposals, length, "assign_proposal_labels");
    for (const auto& gt : ground_truth) {
      if (gt.tube.length != length) {
        throw std::invalid_argument("assign_proposal_labels: tubes of different chunk lengths");
      }
    }
  }

  std::vector<ProposalAssignment> out;
  out.reserve(proposals.size());
  for (const auto& proposal : proposals) {
    ProposalAssignment a;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      const double o = tube_overlap(proposal, ground_truth[g].tube);
      if (!a.matched || o > a.overlap) {
        a.matched = g;
        a.overlap = o;
      }
    }
    if (a.matched && a.overlap >= thresholds.foreground) {
      a.label = ProposalLabel::kForeground;
      a.class_id = ground_truth[*a.matched].class_id;
      a.target = encode_regression(proposal, ground_truth[*a.matched].tube);
    } else if (a.overlap >= thresholds.background_low) {
      a.label = ProposalLabel::kBackground;
    } else {
      a.label = ProposalLabel::kExcluded;
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<ScoredTube> propose_from_maps(std::span<const double> scores, std::span<const double> deltas,
                                          const AnchorGrid& grid, const ProposalOptions& options) {
  const std::size_t n = grid.anchors.size();
  if (n != static_cast<std::size_t>(grid.height) * static_cast<std::size_t>(grid.width) * grid.anchors_per_seed()) {
    throw std::invalid_argument("propose_from_maps: anchor grid is inconsistent with its dimensions");
  }
  if (scores.size() != n) {
    throw std::invalid_argument("propose_from_maps: score map has " + std::to_string(scores.size()) +
                                " entries, expected " + std::to_string(n));
  }
  if (deltas.size() != n * 8) {
    throw std::invalid_argument("propose_from_maps: regression map has " + std::to_string(deltas.size()) +
                                " entries, expected " + std::to_string(n * 8));
  }

  if (!(options.frame_width > 0.0) || !(options.frame_height > 0.0)) {
    throw std::invalid_argument("propose_from_maps: non-positive frame size");
  }

  std::vector<ScoredTube> candidates;
  candidates.reserve(n);
  for (std::size_t a = 0; a < n; ++a) {
    RegressionParams p;
    std::copy_n(deltas.begin() + static_cast<std::ptrdiff_t>(a * 8), 8, p.begin());
    try {
      Tube t = decode_regression(grid.anchors[a], p);
      t = clip_tube(t, options.frame_width, options.frame_height);
      candidates.push_back(ScoredTube{t, scores[a], std::nullopt});
    } catch (const OutsideFrameError&) {
    } catch (const std::invalid_argument&) {
      // degenerate decode
    }
  }

  const auto kept = nms_tubes(std::span<const ScoredTube>(candidates), options.nms_threshold);
  std::vector<ScoredTube> out;
  out.reserve(std::min(kept.size(), options.top_n));
  for (std::size_t i = 0; i < kept.size() && out.size() < options.top_n; ++i) out.push_back(candidates[kept[i]]);
  return out;
}

double smooth_l1(double x) {
  const double ax = std::abs(x);
  return ax < 1.0 ? 0.5 * x * x : ax - 0.5;
}

double smooth_l1_gradient(double x) {
  if (x <= -1.0) return -1.0;
  if (x >= 1.0) return 1.0;
  return x;
}

}  // namespace tubekit
