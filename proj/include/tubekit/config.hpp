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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "tubekit/anchors.hpp"
#include "tubekit/motion.hpp"
#include "tubekit/pooling.hpp"
#include "tubekit/sampling.hpp"

namespace tubekit {

/// Environment variable naming the configuration file used when --config is
/// not given.
inline constexpr const char* kConfigEnvVar = "TUBEKIT_CONFIG";

struct LabelThresholds {
  ProposalLabelThresholds proposal;
  AnchorLabelThresholds anchor;

  friend bool operator==(const LabelThresholds&, const LabelThresholds&) = default;
};

struct NmsThresholds {
  double proposal = 0.7;
  double detection = 0.3;

  friend bool operator==(const NmsThresholds&, const NmsThresholds&) = default;
};

struct PoolingConfig {
  std::size_t side = 6;
  std::size_t side_caffenet = 6;
  std::size_t side_resnet = 7;
  TemporalMode temporal = TemporalMode::kMax;

  friend bool operator==(const PoolingConfig&, const PoolingConfig&) = default;
};

struct MetricThresholds {
  double recall = 0.5;
  double ap_iou = 0.5;
  double corloc_iou = 0.5;

  friend bool operator==(const MetricThresholds&, const MetricThresholds&) = default;
};

/// Every tunable of the pipelines. Defaults are the reference constants.
struct RunConfig {
  int tube_length = 10;
  std::uint64_t seed = 0;
  AnchorConfig anchors;
  std::vector<double> square_aspect_ratios{1.0};
  std::vector<double> diverse_aspect_ratios{0.25, 0.5, 1.0, 2.0, 4.0};
  LabelThresholds labels;
  NmsThresholds nms;
  std::size_t top_n = 300;
  PoolingConfig pooling;
  BatchConfig tube_cnn_batch = tube_cnn_batch_config();
  BatchConfig tpn_batch = tpn_batch_config();
  BatchConfig hard_batch = hard_negative_batch_config();
  MotionConfig motion;
  MetricThresholds metrics;

  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::json config_to_json(const RunConfig& config);

/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);

/// Reads a JSON config; `//` and `/* */` comments are allowed.
RunConfig load_run_config(const std::filesystem::path& path);

/// `explicit_path` if non-empty, else $TUBEKIT_CONFIG if set, else defaults.
RunConfig resolve_run_config(const std::string& explicit_path);

const char* temporal_mode_name(TemporalMode mode);
TemporalMode parse_temporal_mode(const std::string& name);

}  // namespace tubekit
