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

#include "tubekit/motion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include "tubekit/error.hpp"

namespace tubekit {

void MotionConfig::validate() const {
  if (direction_bins < 1) throw std::invalid_argument("motion config: direction_bins must be >= 1");
  if (hypotheses < 1) throw std::invalid_argument("motion config: hypotheses must be >= 1");
  if (!(stationary_epsilon >= 0.0)) throw std::invalid_argument("motion config: stationary_epsilon must be >= 0");
  if (!(inlier_threshold >= 0.0)) throw std::invalid_argument("motion config: inlier_threshold must be >= 0");
  if (ransac_iterations < 1) throw std::invalid_argument("motion config: ransac_iterations must be >= 1");
}

int direction_group(const PointTrack& track, const MotionConfig& config) {
  const double dx = track.dx();
  const double dy = track.dy();
  if (std::hypot(dx, dy) < config.stationary_epsilon) return kStationaryGroup;
  const double sector = 2.0 * std::numbers::pi / config.direction_bins;
  double angle = std::atan2(dy, dx) + 0.5 * sector;
  if (angle < 0.0) angle += 2.0 * std::numbers::pi;
  const int bin = static_cast<int>(std::floor(angle / sector));
  return bin % config.direction_bins;
}

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser over the combined key
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

TranslationConsensus estimate_translation(std::span<const PointTrack> tracks, const MotionConfig& config,
                                          std::uint64_t seed) {
  if (tracks.empty()) throw std::invalid_argument("estimate_translation: no tracks");
  std::mt19937_64 rng(seed);
  const double thr2 = config.inlier_threshold * config.inlier_threshold;

  auto count_inliers = [&](const Displacement& model) {
    std::size_t n = 0;
    for (const auto& t : tracks) {
      const double ex = t.dx() - model.dx;
      const double ey = t.dy() - model.dy;
      if (ex * ex + ey * ey <= thr2) ++n;
    }
    return n;
  };

  Displacement best_model;
  std::size_t best_inliers = 0;
  for (int it = 0; it < config.ransac_iterations; ++it) {
    const auto& pick = tracks[rng() % tracks.size()];
    const Displacement model{pick.dx(), pick.dy()};
    const std::size_t n = count_inliers(model);
    if (n > best_inliers) {
      best_inliers = n;
      best_model = model;
    }
  }

  // Mean of inlier residuals around the model keeps a unanimous set exact.
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& t : tracks) {
    const double ex = t.dx() - best_model.dx;
    const double ey = t.dy() - best_model.dy;
    if (ex * ex + ey * ey <= thr2) {
      sx += ex;
      sy += ey;
    }
  }
  const double n = static_cast<double>(best_inliers);
  return {{best_model.dx + sx / n, best_model.dy + sy / n}, best_inliers};
}

std::vector<MotionProposal> tube_proposals_from_tracks(std::span<const Box> seeds,
                                                       std::span<const PointTrack> tracks, const MotionChunk& chunk,
                                                       const MotionConfig& config, std::uint64_t seed) {
  if (chunk.length < 2) throw std::invalid_argument("tube_proposals_from_tracks: chunk length must be >= 2");
  config.validate();

  std::vector<MotionProposal> out;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    const Box start = clip_box(seeds[s], chunk.frame_width, chunk.frame_height);
    const Box& raw = seeds[s];

    std::map<int, std::vector<PointTrack>> groups;
    for (const auto& t : tracks) {
      if (t.x0 >= raw.x1 && t.x0 < raw.x2 && t.y0 >= raw.y1 && t.y0 < raw.y2) {
        groups[direction_group(t, config)].push_back(t);
      }
    }

    std::vector<std::pair<int, const std::vector<PointTrack>*>> ranked;
    for (const auto& [g, members] : groups) {
      if (members.size() >= config.min_group_size) ranked.emplace_back(g, &members);
    }
    // std::map iteration is ascending by group id, so the stable sort breaks
    // population ties by the lower id (stationary first).
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second->size() > b.second->size(); });
    if (ranked.size() > static_cast<std::size_t>(config.hypotheses)) ranked.resize(config.hypotheses);

    const std::uint64_t stream = derive_stream_seed(seed, s);
    std::size_t emitted = 0;
    for (std::size_t h = 0; h < ranked.size(); ++h) {
      const auto& [group, members] = ranked[h];
      const auto consensus = estimate_translation(*members, config, derive_stream_seed(stream, h));
      Box end;
      try {
        end = clip_box(raw.translated(consensus.displacement.dx, consensus.displacement.dy), chunk.frame_width,
                       chunk.frame_height);
      } catch (const OutsideFrameError&) {
        continue;
      }
      out.push_back(MotionProposal{Tube{chunk.t0, chunk.length, start, end}, s, group, members->size(),
                                   consensus.inliers, false});
      ++emitted;
    }
    if (emitted == 0) {
      out.push_back(MotionProposal{Tube{chunk.t0, chunk.length, start, start}, s, kStationaryGroup, 0, 0, true});
    }
  }
  return out;
}

}  // namespace tubekit
