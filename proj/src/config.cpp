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

#include "tubekit/config.hpp"

#include <cstdlib>
#include <initializer_list>
#include <stdexcept>

#include "tubekit/error.hpp"
#include "tubekit/io.hpp"

namespace tubekit {

using nlohmann::json;

namespace {

constexpr const char* kConfigSchema = "tubekit.config";

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read_into(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

json batch_to_json(const BatchConfig& b) {
  return json{{"chunks", b.chunks},
              {"items_per_chunk", b.items_per_chunk},
              {"max_positive_fraction", b.max_positive_fraction},
              {"max_hard_negative_fraction", b.max_hard_negative_fraction}};
}

void batch_from_json(const json& j, const std::string& where, BatchConfig& b) {
  check_keys(j, where, {"chunks", "items_per_chunk", "max_positive_fraction", "max_hard_negative_fraction"});
  read_into(j, "chunks", b.chunks);
  read_into(j, "items_per_chunk", b.items_per_chunk);
  read_into(j, "max_positive_fraction", b.max_positive_fraction);
  read_into(j, "max_hard_negative_fraction", b.max_hard_negative_fraction);
}

}  // namespace

const char* temporal_mode_name(TemporalMode mode) { return mode == TemporalMode::kMax ? "max" : "average"; }

TemporalMode parse_temporal_mode(const std::string& name) {
  if (name == "max") return TemporalMode::kMax;
  if (name == "average" || name == "avg") return TemporalMode::kAverage;
  throw std::invalid_argument("temporal mode must be 'max' or 'average', got '" + name + "'");
}

void RunConfig::validate() const {
  if (tube_length < 1) throw std::invalid_argument("config: tube_length must be >= 1");
  anchors.validate();
  for (const auto* set : {&square_aspect_ratios, &diverse_aspect_ratios}) {
    AnchorConfig probe = anchors;
    probe.aspect_ratios = *set;
    probe.validate();
  }
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(labels.proposal.foreground) || !unit(labels.proposal.background_low) ||
      labels.proposal.background_low > labels.proposal.foreground) {
    throw std::invalid_argument("config: proposal label thresholds must satisfy 0 <= low <= foreground <= 1");
  }
  if (!unit(labels.anchor.positive) || !unit(labels.anchor.negative) ||
      labels.anchor.negative > labels.anchor.positive) {
    throw std::invalid_argument("config: anchor label thresholds must satisfy 0 <= negative <= positive <= 1");
  }
  if (!unit(nms.proposal) || !unit(nms.detection)) throw std::invalid_argument("config: NMS thresholds outside [0, 1]");
  if (!unit(metrics.recall) || !unit(metrics.ap_iou) || !unit(metrics.corloc_iou)) {
    throw std::invalid_argument("config: metric thresholds outside [0, 1]");
  }
  if (pooling.side < 1 || pooling.side_caffenet < 1 || pooling.side_resnet < 1) {
    throw std::invalid_argument("config: pooled sides must be >= 1");
  }
  tube_cnn_batch.validate();
  tpn_batch.validate();
  hard_batch.validate();
  motion.validate();
}

json config_to_json(const RunConfig& c) {
  return json{
      {"schema", kConfigSchema},
      {"version", io::kSchemaVersion},
      {"tube_length", c.tube_length},
      {"seed", c.seed},
      {"top_n", c.top_n},
      {"anchors", {{"stride", c.anchors.stride}, {"scales", c.anchors.scales}, {"aspect_ratios", c.anchors.aspect_ratios}}},
      {"aspect_ratio_sets", {{"square", c.square_aspect_ratios}, {"diverse", c.diverse_aspect_ratios}}},
      {"labels",
       {{"proposal_foreground", c.labels.proposal.foreground},
        {"proposal_background_low", c.labels.proposal.background_low},
        {"anchor_positive", c.labels.anchor.positive},
        {"anchor_negative", c.labels.anchor.negative}}},
      {"nms", {{"proposal", c.nms.proposal}, {"detection", c.nms.detection}}},
      {"pooling",
       {{"side", c.pooling.side},
        {"side_caffenet", c.pooling.side_caffenet},
        {"side_resnet", c.pooling.side_resnet},
        {"temporal", temporal_mode_name(c.pooling.temporal)}}},
      {"batches",
       {{"tube_cnn", batch_to_json(c.tube_cnn_batch)},
        {"tpn", batch_to_json(c.tpn_batch)},
        {"hard_negative", batch_to_json(c.hard_batch)}}},
      {"motion",
       {{"direction_bins", c.motion.direction_bins},
        {"hypotheses", c.motion.hypotheses},
        {"stationary_epsilon", c.motion.stationary_epsilon},
        {"ransac_iterations", c.motion.ransac_iterations},
        {"inlier_threshold", c.motion.inlier_threshold},
        {"min_group_size", c.motion.min_group_size}}},
      {"metrics", {{"recall", c.metrics.recall}, {"ap_iou", c.metrics.ap_iou}, {"corloc_iou", c.metrics.corloc_iou}}},
  };
}

RunConfig config_from_json(const json& j) {
  check_keys(j, "config", {"schema", "version", "tube_length", "seed", "top_n", "anchors", "aspect_ratio_sets",
                           "labels", "nms", "pooling", "batches", "motion", "metrics"});
  if (j.contains("schema") && j["schema"] != kConfigSchema) {
    throw SchemaError("config: expected schema " + std::string(kConfigSchema) + ", found " + j["schema"].dump());
  }
  if (j.contains("version") && j["version"] != io::kSchemaVersion) {
    throw SchemaError("config: unsupported version " + j["version"].dump());
  }

  RunConfig c;
  read_into(j, "tube_length", c.tube_length);
  read_into(j, "seed", c.seed);
  read_into(j, "top_n", c.top_n);
  if (j.contains("anchors")) {
    const auto& a = j["anchors"];
    check_keys(a, "anchors", {"stride", "scales", "aspect_ratios"});
    read_into(a, "stride", c.anchors.stride);
    read_into(a, "scales", c.anchors.scales);
    read_into(a, "aspect_ratios", c.anchors.aspect_ratios);
  }
  if (j.contains("aspect_ratio_sets")) {
    const auto& s = j["aspect_ratio_sets"];
    check_keys(s, "aspect_ratio_sets", {"square", "diverse"});
    read_into(s, "square", c.square_aspect_ratios);
    read_into(s, "diverse", c.diverse_aspect_ratios);
  }
  if (j.contains("labels")) {
    const auto& l = j["labels"];
    check_keys(l, "labels", {"proposal_foreground", "proposal_background_low", "anchor_positive", "anchor_negative"});
    read_into(l, "proposal_foreground", c.labels.proposal.foreground);
    read_into(l, "proposal_background_low", c.labels.proposal.background_low);
    read_into(l, "anchor_positive", c.labels.anchor.positive);
    read_into(l, "anchor_negative", c.labels.anchor.negative);
  }
  if (j.contains("nms")) {
    check_keys(j["nms"], "nms", {"proposal", "detection"});
    read_into(j["nms"], "proposal", c.nms.proposal);
    read_into(j["nms"], "detection", c.nms.detection);
  }
  if (j.contains("pooling")) {
    const auto& p = j["pooling"];
    check_keys(p, "pooling", {"side", "side_caffenet", "side_resnet", "temporal"});
    read_into(p, "side", c.pooling.side);
    read_into(p, "side_caffenet", c.pooling.side_caffenet);
    read_into(p, "side_resnet", c.pooling.side_resnet);
    if (p.contains("temporal")) c.pooling.temporal = parse_temporal_mode(p["temporal"].get<std::string>());
  }
  if (j.contains("batches")) {
    const auto& b = j["batches"];
    check_keys(b, "batches", {"tube_cnn", "tpn", "hard_negative"});
    if (b.contains("tube_cnn")) batch_from_json(b["tube_cnn"], "batches.tube_cnn", c.tube_cnn_batch);
    if (b.contains("tpn")) batch_from_json(b["tpn"], "batches.tpn", c.tpn_batch);
    if (b.contains("hard_negative")) batch_from_json(b["hard_negative"], "batches.hard_negative", c.hard_batch);
  }
  if (j.contains("motion")) {
    const auto& m = j["motion"];
    check_keys(m, "motion", {"direction_bins", "hypotheses", "stationary_epsilon", "ransac_iterations",
                             "inlier_threshold", "min_group_size"});
    read_into(m, "direction_bins", c.motion.direction_bins);
    read_into(m, "hypotheses", c.motion.hypotheses);
    read_into(m, "stationary_epsilon", c.motion.stationary_epsilon);
    read_into(m, "ransac_iterations", c.motion.ransac_iterations);
    read_into(m, "inlier_threshold", c.motion.inlier_threshold);
    read_into(m, "min_group_size", c.motion.min_group_size);
  }
  if (j.contains("metrics")) {
    check_keys(j["metrics"], "metrics", {"recall", "ap_iou", "corloc_iou"});
    read_into(j["metrics"], "recall", c.metrics.recall);
    read_into(j["metrics"], "ap_iou", c.metrics.ap_iou);
    read_into(j["metrics"], "corloc_iou", c.metrics.corloc_iou);
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  try {
    return config_from_json(j);
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

RunConfig resolve_run_config(const std::string& explicit_path) {
  if (!explicit_path.empty()) return load_run_config(explicit_path);
  if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') return load_run_config(env);
  return RunConfig{};
}

}  // namespace tubekit
