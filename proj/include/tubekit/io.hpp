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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "tubekit/evaluation.hpp"
#include "tubekit/geometry.hpp"
#include "tubekit/motion.hpp"
#include "tubekit/pooling.hpp"
#include "tubekit/sampling.hpp"
#include "tubekit/suppression.hpp"

namespace tubekit::io {

using nlohmann::json;

/// Line-delimited record files start with {"schema": <name>, "version": 1}
/// followed by one JSON object per line. See docs/formats.md.
inline constexpr int kSchemaVersion = 1;

namespace schema {
inline constexpr std::string_view kTracks = "tubekit.tracks";
inline constexpr std::string_view kTubes = "tubekit.tubes";
inline constexpr std::string_view kPointTracks = "tubekit.point_tracks";
inline constexpr std::string_view kSeedBoxes = "tubekit.seed_boxes";
inline constexpr std::string_view kDetections = "tubekit.detections";
inline constexpr std::string_view kLabels = "tubekit.labels";
inline constexpr std::string_view kPool = "tubekit.pool";
inline constexpr std::string_view kBatches = "tubekit.batches";
inline constexpr std::string_view kMetrics = "tubekit.metrics";
}  // namespace schema

struct Record {
  std::size_t line = 0;
  json value;
};

/// Serialises header and records; one compact JSON object per line.
std::string format_records(std::string_view schema_name, const std::vector<json>& records);

/// Parses a record file held in memory. `source` names it in error messages.
/// Throws ParseError (with the 1-based line) on malformed lines and
/// SchemaError on a missing, foreign or newer header.
std::vector<Record> parse_records(std::string_view text, std::string_view schema_name, const std::string& source);

std::vector<Record> read_records(const std::filesystem::path& path, std::string_view schema_name);
void write_records(const std::filesystem::path& path, std::string_view schema_name, const std::vector<json>& records);

/// Replaces `path` by writing a sibling temporary file and renaming it.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

// Typed records. Field names are part of the versioned schema.

struct TubeRecord {
  std::string video;
  Tube tube;
  std::optional<double> score;
  std::optional<int> class_id;

  ScoredTube scored() const { return {tube, score.value_or(0.0), class_id}; }
  friend bool operator==(const TubeRecord&, const TubeRecord&) = default;
};

struct PointTrackRecord {
  std::string video;
  int t0 = 0;
  int length = 1;
  PointTrack track;

  friend bool operator==(const PointTrackRecord&, const PointTrackRecord&) = default;
};

struct SeedBoxRecord {
  std::string video;
  int frame = 0;
  Box box;
  std::optional<double> score;

  friend bool operator==(const SeedBoxRecord&, const SeedBoxRecord&) = default;
};

struct PoolRecord {
  PoolItem item;
  /// "positive", "negative" or "far_negative".
  std::string label;

  friend bool operator==(const PoolRecord&, const PoolRecord&) = default;
};

json box_to_json(const Box& box);
Box box_from_json(const json& j);

json to_json(const TubeRecord& r);
json to_json(const Track& t);
json to_json(const PointTrackRecord& r);
json to_json(const SeedBoxRecord& r);
json to_json(const Detection& d);
json to_json(const PoolRecord& r);
json to_json(const Batch& b, std::size_t index);
json to_json(const MetricReport& m);

TubeRecord tube_from_json(const json& j);
Track track_from_json(const json& j);
PointTrackRecord point_track_from_json(const json& j);
SeedBoxRecord seed_box_from_json(const json& j);
Detection detection_from_json(const json& j);
PoolRecord pool_from_json(const json& j);
Batch batch_from_json(const json& j);
MetricReport metric_from_json(const json& j);

/// Typed whole-file readers; conversion failures are reported with the line.
std::vector<TubeRecord> read_tubes(const std::filesystem::path& path);
std::vector<Track> read_tracks(const std::filesystem::path& path);
std::vector<PointTrackRecord> read_point_tracks(const std::filesystem::path& path);
std::vector<SeedBoxRecord> read_seed_boxes(const std::filesystem::path& path);
std::vector<Detection> read_detections(const std::filesystem::path& path);
std::vector<PoolRecord> read_pool(const std::filesystem::path& path);
std::vector<Batch> read_batches(const std::filesystem::path& path);
std::vector<MetricReport> read_metrics(const std::filesystem::path& path);

// Feature volume container: "FVOL", u32 version, u32 T, C, H, W, f32 stride,
// then T*C*H*W f32 values, row-major, all little-endian.

inline constexpr std::uint32_t kVolumeVersion = 1;

std::string encode_volume(const FeatureVolume& volume);
FeatureVolume decode_volume(std::string_view bytes, const std::string& source = "volume");
void write_volume(const std::filesystem::path& path, const FeatureVolume& volume);
FeatureVolume read_volume(const std::filesystem::path& path);

}  // namespace tubekit::io
