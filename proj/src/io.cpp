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

#include "tubekit/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tubekit/error.hpp"

namespace tubekit::io {

namespace fs = std::filesystem;

std::string format_records(std::string_view schema_name, const std::vector<json>& records) {
  std::string out = json{{"schema", schema_name}, {"version", kSchemaVersion}}.dump();
  out += '\n';
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::vector<Record> parse_records(std::string_view text, std::string_view schema_name, const std::string& source) {
  std::vector<Record> out;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    json value;
    try {
      value = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!value.is_object()) throw ParseError(source, line_no, "record is not a JSON object");

    if (!have_header) {
      if (!value.contains("schema") || !value.contains("version")) {
        throw SchemaError(source + ": missing schema header line");
      }
      const auto& name = value["schema"];
      const auto& version = value["version"];
      if (!name.is_string() || name.get<std::string>() != schema_name) {
        throw SchemaError(source + ": expected schema " + std::string(schema_name) + ", found " + name.dump());
      }
      if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
        throw SchemaError(source + ": unsupported schema version " + version.dump() + " (this build reads " +
                          std::to_string(kSchemaVersion) + ")");
      }
      have_header = true;
      continue;
    }
    out.push_back(Record{line_no, std::move(value)});
  }
  if (!have_header) throw SchemaError(source + ": empty file, missing schema header line");
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<Record> read_records(const fs::path& path, std::string_view schema_name) {
  return parse_records(read_file(path), schema_name, path.string());
}

void write_records(const fs::path& path, std::string_view schema_name, const std::vector<json>& records) {
  write_file_atomic(path, format_records(schema_name, records));
}

json box_to_json(const Box& box) { return json::array({box.x1, box.y1, box.x2, box.y2}); }

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("box must be [x1, y1, x2, y2]");
  Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!b.valid()) throw std::invalid_argument("box has non-positive extent");
  return b;
}

namespace {

json point_to_json(double x, double y) { return json::array({x, y}); }

std::pair<double, double> point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("point must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

const char* kind_name(ItemKind k) {
  switch (k) {
    case ItemKind::kPositive:
      return "positive";
    case ItemKind::kNegative:
      return "negative";
    case ItemKind::kHardNegative:
      return "hard_negative";
  }
  return "negative";
}

template <class T, class Convert>
std::vector<T> read_typed(const fs::path& path, std::string_view schema_name, Convert convert) {
  std::vector<T> out;
  for (const auto& r : read_records(path, schema_name)) {
    try {
      out.push_back(convert(r.value));
    } catch (const json::exception& e) {
      throw ParseError(path.string(), r.line, e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(path.string(), r.line, e.what());
    }
  }
  return out;
}

}  // namespace

json to_json(const TubeRecord& r) {
  json j{{"video", r.video},
         {"t0", r.tube.t0},
         {"T", r.tube.length},
         {"start", box_to_json(r.tube.start)},
         {"end", box_to_json(r.tube.end)}};
  if (r.score) j["score"] = *r.score;
  if (r.class_id) j["class"] = *r.class_id;
  return j;
}

TubeRecord tube_from_json(const json& j) {
  TubeRecord r;
  r.video = j.at("video").get<std::string>();
  r.tube.t0 = j.at("t0").get<int>();
  r.tube.length = j.at("T").get<int>();
  if (r.tube.length < 1) throw std::invalid_argument("tube length T must be >= 1");
  r.tube.start = box_from_json(j.at("start"));
  r.tube.end = box_from_json(j.at("end"));
  if (j.contains("score")) r.score = j["score"].get<double>();
  if (j.contains("class")) r.class_id = j["class"].get<int>();
  if (r.score && !std::isfinite(*r.score)) throw std::invalid_argument("score must be finite");
  return r;
}

json to_json(const Track& t) {
  json entries = json::array();
  for (const auto& e : t.entries) entries.push_back({e.frame, e.box.x1, e.box.y1, e.box.x2, e.box.y2});
  return json{{"video", t.video}, {"class", t.class_id}, {"entries", entries}};
}

Track track_from_json(const json& j) {
  Track t;
  t.video = j.at("video").get<std::string>();
  t.class_id = j.at("class").get<int>();
  for (const auto& e : j.at("entries")) {
    if (!e.is_array() || e.size() != 5) throw std::invalid_argument("track entry must be [frame, x1, y1, x2, y2]");
    TrackEntry entry{e[0].get<int>(), Box{e[1].get<double>(), e[2].get<double>(), e[3].get<double>(), e[4].get<double>()}};
    if (!entry.box.valid()) throw std::invalid_argument("track box has non-positive extent");
    if (!t.entries.empty() && entry.frame <= t.entries.back().frame) {
      throw std::invalid_argument("track frames must be strictly increasing");
    }
    t.entries.push_back(entry);
  }
  return t;
}

json to_json(const PointTrackRecord& r) {
  return json{{"video", r.video},
              {"t0", r.t0},
              {"T", r.length},
              {"start", point_to_json(r.track.x0, r.track.y0)},
              {"end", point_to_json(r.track.x1, r.track.y1)}};
}

PointTrackRecord point_track_from_json(const json& j) {
  PointTrackRecord r;
  r.video = j.at("video").get<std::string>();
  r.t0 = j.at("t0").get<int>();
  r.length = j.at("T").get<int>();
  const auto [x0, y0] = point_from_json(j.at("start"));
  const auto [x1, y1] = point_from_json(j.at("end"));
  r.track = PointTrack{x0, y0, x1, y1};
  if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(x1) || !std::isfinite(y1)) {
    throw std::invalid_argument("point track coordinates must be finite");
  }
  return r;
}

json to_json(const SeedBoxRecord& r) {
  json j{{"video", r.video}, {"frame", r.frame}, {"box", box_to_json(r.box)}};
  if (r.score) j["score"] = *r.score;
  return j;
}

SeedBoxRecord seed_box_from_json(const json& j) {
  SeedBoxRecord r;
  r.video = j.at("video").get<std::string>();
  r.frame = j.at("frame").get<int>();
  r.box = box_from_json(j.at("box"));
  if (j.contains("score")) r.score = j["score"].get<double>();
  return r;
}

json to_json(const Detection& d) {
  return json{{"video", d.video}, {"frame", d.frame}, {"box", box_to_json(d.box)}, {"score", d.score},
              {"class", d.class_id}};
}

Detection detection_from_json(const json& j) {
  Detection d;
  d.video = j.at("video").get<std::string>();
  d.frame = j.at("frame").get<int>();
  d.box = box_from_json(j.at("box"));
  d.score = j.at("score").get<double>();
  d.class_id = j.at("class").get<int>();
  if (!std::isfinite(d.score)) throw std::invalid_argument("score must be finite");
  return d;
}

json to_json(const PoolRecord& r) {
  json j{{"chunk", r.item.chunk}, {"id", r.item.id}, {"label", r.label}};
  if (r.item.score) j["score"] = *r.item.score;
  return j;
}

PoolRecord pool_from_json(const json& j) {
  PoolRecord r;
  r.item.chunk = j.at("chunk").get<std::size_t>();
  r.item.id = j.at("id").get<std::size_t>();
  r.label = j.at("label").get<std::string>();
  if (r.label != "positive" && r.label != "negative" && r.label != "far_negative") {
    throw std::invalid_argument("label must be positive, negative or far_negative");
  }
  if (j.contains("score")) r.item.score = j["score"].get<double>();
  return r;
}

json to_json(const Batch& b, std::size_t index) {
  json items = json::array();
  for (const auto& it : b.items) {
    json j{{"chunk", it.item.chunk}, {"id", it.item.id}, {"kind", kind_name(it.kind)}};
    if (it.item.score) j["score"] = *it.item.score;
    items.push_back(std::move(j));
  }
  return json{{"batch", index}, {"chunks", b.chunks}, {"underfilled", b.underfilled}, {"items", items}};
}

Batch batch_from_json(const json& j) {
  Batch b;
  b.chunks = j.at("chunks").get<std::vector<std::size_t>>();
  b.underfilled = j.at("underfilled").get<bool>();
  for (const auto& it : j.at("items")) {
    BatchItem item;
    item.item.chunk = it.at("chunk").get<std::size_t>();
    item.item.id = it.at("id").get<std::size_t>();
    if (it.contains("score")) item.item.score = it["score"].get<double>();
    const auto kind = it.at("kind").get<std::string>();
    if (kind == "positive") {
      item.kind = ItemKind::kPositive;
    } else if (kind == "negative") {
      item.kind = ItemKind::kNegative;
    } else if (kind == "hard_negative") {
      item.kind = ItemKind::kHardNegative;
    } else {
      throw std::invalid_argument("unknown item kind '" + kind + "'");
    }
    b.items.push_back(item);
  }
  return b;
}

json to_json(const MetricReport& m) {
  json per_class = json::object();
  for (const auto& [cls, v] : m.per_class) per_class[std::to_string(cls)] = v;
  json params = json::object();
  for (const auto& [k, v] : m.parameters) params[k] = v;
  return json{{"metric", m.metric}, {"value", m.value ? json(*m.value) : json(nullptr)}, {"params", params},
              {"per_class", per_class}};
}

MetricReport metric_from_json(const json& j) {
  MetricReport m;
  m.metric = j.at("metric").get<std::string>();
  if (!j.at("value").is_null()) m.value = j["value"].get<double>();
  for (const auto& [k, v] : j.at("params").items()) m.parameters[k] = v.get<double>();
  for (const auto& [k, v] : j.at("per_class").items()) m.per_class[std::stoi(k)] = v.get<double>();
  return m;
}

std::vector<TubeRecord> read_tubes(const fs::path& path) {
  return read_typed<TubeRecord>(path, schema::kTubes, tube_from_json);
}
std::vector<Track> read_tracks(const fs::path& path) {
  return read_typed<Track>(path, schema::kTracks, track_from_json);
}
std::vector<PointTrackRecord> read_point_tracks(const fs::path& path) {
  return read_typed<PointTrackRecord>(path, schema::kPointTracks, point_track_from_json);
}
std::vector<SeedBoxRecord> read_seed_boxes(const fs::path& path) {
  return read_typed<SeedBoxRecord>(path, schema::kSeedBoxes, seed_box_from_json);
}
std::vector<Detection> read_detections(const fs::path& path) {
  return read_typed<Detection>(path, schema::kDetections, detection_from_json);
}
std::vector<PoolRecord> read_pool(const fs::path& path) {
  return read_typed<PoolRecord>(path, schema::kPool, pool_from_json);
}
std::vector<Batch> read_batches(const fs::path& path) {
  return read_typed<Batch>(path, schema::kBatches, batch_from_json);
}
std::vector<MetricReport> read_metrics(const fs::path& path) {
  return read_typed<MetricReport>(path, schema::kMetrics, metric_from_json);
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  return v;
}

constexpr std::size_t kVolumeHeader = 4 + 4 + 4 * 4 + 4;

}  // namespace

std::string encode_volume(const FeatureVolume& volume) {
  const auto& s = volume.shape();
  std::string out;
  out.reserve(kVolumeHeader + 4 * s.size());
  out.append("FVOL", 4);
  put_u32(out, kVolumeVersion);
  for (std::size_t d : {s.frames, s.channels, s.height, s.width}) {
    if (d > 0xffffffffu) throw std::invalid_argument("encode_volume: dimension exceeds 32 bits");
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(volume.stride())));
  for (double v : volume.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

FeatureVolume decode_volume(std::string_view bytes, const std::string& source) {
  if (bytes.size() < kVolumeHeader || bytes.substr(0, 4) != "FVOL") {
    throw ParseError(source, 0, "not a feature volume (missing FVOL magic)");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kVolumeVersion) {
    throw SchemaError(source + ": unsupported feature volume version " + std::to_string(version));
  }
  const VolumeShape shape{get_u32(bytes, 8), get_u32(bytes, 12), get_u32(bytes, 16), get_u32(bytes, 20)};
  const double stride = std::bit_cast<float>(get_u32(bytes, 24));
  const std::size_t payload = (bytes.size() - kVolumeHeader) / 4;
  std::size_t n = 1;
  for (std::size_t d : {shape.frames, shape.channels, shape.height, shape.width}) {
    n = (d != 0 && n > payload / d) ? payload + 1 : n * d;
  }
  if (bytes.size() != kVolumeHeader + 4 * n) {
    throw ParseError(source, 0,
                     "feature volume payload is " + std::to_string(bytes.size() - kVolumeHeader) + " bytes, expected " +
                         std::to_string(4 * n));
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = std::bit_cast<float>(get_u32(bytes, kVolumeHeader + 4 * i));
  try {
    return FeatureVolume(shape, stride, std::move(values));
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 0, e.what());
  }
}

void write_volume(const fs::path& path, const FeatureVolume& volume) {
  write_file_atomic(path, encode_volume(volume));
}

FeatureVolume read_volume(const fs::path& path) { return decode_volume(read_file(path), path.string()); }

}  // namespace tubekit::io
