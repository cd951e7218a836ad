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

#include "tubekit/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace tubekit {

namespace {

std::size_t fraction_of(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

// First `k` elements of a uniformly shuffled copy.
std::vector<PoolItem> draw(std::span<const PoolItem> items, std::size_t k, std::mt19937_64& rng) {
  std::vector<PoolItem> copy(items.begin(), items.end());
  std::shuffle(copy.begin(), copy.end(), rng);
  copy.resize(std::min(k, copy.size()));
  return copy;
}

}  // namespace

std::size_t BatchConfig::positive_cap() const { return fraction_of(max_positive_fraction, batch_size()); }

std::size_t BatchConfig::hard_negative_cap() const { return fraction_of(max_hard_negative_fraction, batch_size()); }

void BatchConfig::validate() const {
  if (chunks < 1 || items_per_chunk < 1) throw std::invalid_argument("batch config: counts must be >= 1");
  auto in_unit = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (!in_unit(max_positive_fraction) || !in_unit(max_hard_negative_fraction)) {
    throw std::invalid_argument("batch config: fractions must lie in [0, 1]");
  }
}

BatchConfig tube_cnn_batch_config() { return {4, 64, 0.25, 0.0}; }

BatchConfig tpn_batch_config() { return {4, 128, 0.5, 0.0}; }

BatchConfig hard_negative_batch_config() { return {4, 64, 0.25, 0.5}; }

std::size_t Batch::count(ItemKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [kind](const BatchItem& b) { return b.kind == kind; }));
}

Batch sample_batch(const LabeledPool& pool, const BatchConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);

  std::vector<std::size_t> eligible;
  for (std::size_t c = 0; c < pool.size(); ++c) {
    if (!pool[c].positives.empty() || !pool[c].negatives.empty()) eligible.push_back(c);
  }
  std::shuffle(eligible.begin(), eligible.end(), rng);

  Batch batch;
  batch.chunks.assign(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(
                                                               std::min(eligible.size(), config.chunks)));
  batch.underfilled = batch.chunks.size() < config.chunks;

  std::size_t budget = config.positive_cap();
  for (std::size_t i = 0; i < batch.chunks.size(); ++i) {
    const ChunkPool& chunk = pool[batch.chunks[i]];
    const std::size_t left = batch.chunks.size() - i;
    const std::size_t share = (budget + left - 1) / left;
    const std::size_t n_pos = std::min({chunk.positives.size(), config.items_per_chunk, share});
    budget -= n_pos;

    for (auto& p : draw(chunk.positives, n_pos, rng)) batch.items.push_back({p, ItemKind::kPositive});
    const auto negatives = draw(chunk.negatives, config.items_per_chunk - n_pos, rng);
    for (auto& n : negatives) batch.items.push_back({n, ItemKind::kNegative});
    if (n_pos + negatives.size() < config.items_per_chunk) batch.underfilled = true;
  }
  return batch;
}

std::vector<std::size_t> mine_hard_negatives(std::span<const ScoredTube> proposals,
                                             std::span<const Tube> ground_truth, std::size_t top_k) {
  std::vector<std::size_t> candidates;
  for (std::size_t i : order_by_score(proposals)) {
    if (candidates.size() >= top_k) break;
    const bool touches = std::any_of(ground_truth.begin(), ground_truth.end(),
                                     [&](const Tube& gt) { return tube_overlap(proposals[i].tube, gt) > 0.0; });
    if (!touches) candidates.push_back(i);
  }
  return candidates;
}

std::size_t default_mining_top_k(const BatchConfig& config) { return 2 * config.hard_negative_cap(); }

Batch compose_hard_batch(std::span<const PoolItem> positives, std::span<const PoolItem> hard_negatives,
                         std::span<const PoolItem> negatives, const BatchConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  const std::size_t size = config.batch_size();

  Batch batch;
  for (auto& p : draw(positives, config.positive_cap(), rng)) batch.items.push_back({p, ItemKind::kPositive});
  const std::size_t n_hard = std::min(hard_negatives.size(), config.hard_negative_cap());
  for (std::size_t i = 0; i < n_hard; ++i) batch.items.push_back({hard_negatives[i], ItemKind::kHardNegative});
  for (auto& n : draw(negatives, size - batch.items.size(), rng)) batch.items.push_back({n, ItemKind::kNegative});

  for (const auto& b : batch.items) {
    if (std::find(batch.chunks.begin(), batch.chunks.end(), b.item.chunk) == batch.chunks.end()) {
      batch.chunks.push_back(b.item.chunk);
    }
  }
  batch.underfilled = batch.items.size() < size;
  return batch;
}

}  // namespace tubekit
