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
#include <optional>
#include <span>
#include <vector>

#include "tubekit/geometry.hpp"
#include "tubekit/suppression.hpp"

namespace tubekit {

struct BatchConfig {
  std::size_t chunks = 4;
  std::size_t items_per_chunk = 64;
  double max_positive_fraction = 0.25;
  /// Used by compose_hard_batch only.
  double max_hard_negative_fraction = 0.5;

  std::size_t batch_size() const { return chunks * items_per_chunk; }
  std::size_t positive_cap() const;
  std::size_t hard_negative_cap() const;
  void validate() const;

  friend bool operator==(const BatchConfig&, const BatchConfig&) = default;
};

/// Tube-CNN proposal batches: 4 chunks x 64 proposals, at most 25% positive.
BatchConfig tube_cnn_batch_config();
/// TPN anchor batches: 4 chunks x 128 anchors, at most 50% positive.
BatchConfig tpn_batch_config();
/// Hard-negative batches: Tube-CNN size, at most 25% positive, 50% hard.
BatchConfig hard_negative_batch_config();

/// A labeled candidate. `id` is the caller's index of the proposal or
/// anchor inside its chunk.
struct PoolItem {
  std::size_t chunk = 0;
  std::size_t id = 0;
  std::optional<double> score;

  friend bool operator==(const PoolItem&, const PoolItem&) = default;
};

struct ChunkPool {
  std::vector<PoolItem> positives;
  /// Overlap in [0.1, 0.5).
  std::vector<PoolItem> negatives;
  /// Overlap below 0.1; only re-enter training through hard mining.
  std::vector<PoolItem> far_negatives;
};

using LabeledPool = std::vector<ChunkPool>;

enum class ItemKind { kPositive, kNegative, kHardNegative };

struct BatchItem {
  PoolItem item;
  ItemKind kind = ItemKind::kNegative;

  friend bool operator==(const BatchItem&, const BatchItem&) = default;
};

struct Batch {
  std::vector<std::size_t> chunks;
  std::vector<BatchItem> items;
  /// Fewer items than the configured batch size.
  bool underfilled = false;

  std::size_t count(ItemKind kind) const;
  friend bool operator==(const Batch&, const Batch&) = default;
};

/// Hierarchical sampling: `config.chunks` chunks uniformly without
/// replacement (chunks with no positives and no negatives are skipped), then
/// items per chunk without replacement. The positive cap applies to the whole
/// batch and is spread over the sampled chunks; unused positive slots are
/// filled with negatives. Deterministic for a given seed.
Batch sample_batch(const LabeledPool& pool, const BatchConfig& config, std::uint64_t seed);

/// Indices of proposals with zero tube overlap against every ground truth,
/// best `top_k` by score (ties by lower index).
std::vector<std::size_t> mine_hard_negatives(std::span<const ScoredTube> proposals,
                                             std::span<const Tube> ground_truth, std::size_t top_k);

/// Candidate count kept by mining when none is configured: twice the hard
/// slots of one batch.
std::size_t default_mining_top_k(const BatchConfig& config);

/// Batch of at most positive_cap() random positives, the first
/// hard_negative_cap() hard negatives in the given order, and random
/// negatives for the remainder.
Batch compose_hard_batch(std::span<const PoolItem> positives, std::span<const PoolItem> hard_negatives,
                         std::span<const PoolItem> negatives, const BatchConfig& config, std::uint64_t seed);

}  // namespace tubekit
