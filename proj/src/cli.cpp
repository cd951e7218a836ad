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

#include "tubekit/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "CLI11.hpp"

#include "tubekit/anchors.hpp"
#include "tubekit/config.hpp"
#include "tubekit/error.hpp"
#include "tubekit/evaluation.hpp"
#include "tubekit/io.hpp"
#include "tubekit/motion.hpp"
#include "tubekit/pooling.hpp"
#include "tubekit/sampling.hpp"
#include "tubekit/suppression.hpp"
#include "tubekit/synth.hpp"

namespace tubekit {

namespace {

namespace fs = std::filesystem;
using io::json;

using ChunkKey = std::tuple<std::string, int, int>;  // video, t0, T

ChunkKey key_of(const io::TubeRecord& r) { return {r.video, r.tube.t0, r.tube.length}; }

std::string describe(const ChunkKey& k) {
  return std::get<0>(k) + "@" + std::to_string(std::get<1>(k)) + "+" + std::to_string(std::get<2>(k));
}

// Tube records grouped by chunk, keeping their file index.
std::map<ChunkKey, std::vector<std::size_t>> group_by_chunk(const std::vector<io::TubeRecord>& records) {
  std::map<ChunkKey, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) groups[key_of(records[i])].push_back(i);
  return groups;
}

std::vector<Tube> tubes_at(const std::vector<io::TubeRecord>& records, const std::vector<std::size_t>& idx) {
  std::vector<Tube> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(records[i].tube);
  return out;
}

std::vector<GroundTruthBox> boxes_of(const std::vector<Track>& tracks) {
  std::vector<GroundTruthBox> out;
  for (const auto& t : tracks) {
    for (const auto& e : t.entries) out.push_back({t.video, e.frame, e.box, t.class_id});
  }
  return out;
}

void print_report(std::ostream& out, const MetricReport& m) {
  out << m.metric << ": ";
  if (m.value) {
    out << std::setprecision(6) << *m.value;
  } else {
    out << "n/a";
  }
  for (const auto& [cls, v] : m.per_class) out << "  class " << cls << "=" << std::setprecision(6) << v;
  out << '\n';
}

void write_metrics(const std::string& path, const std::vector<MetricReport>& reports, std::ostream& out) {
  std::vector<json> records;
  for (const auto& r : reports) {
    print_report(out, r);
    records.push_back(io::to_json(r));
  }
  if (!path.empty()) io::write_records(path, io::schema::kMetrics, records);
}

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  RunConfig load() const {
    RunConfig c = resolve_run_config(config_path);
    if (seed_opt != nullptr && seed_opt->count() > 0) c.seed = seed;
    return c;
  }
};

template <class T>
T pick(const CLI::Option* opt, const T& value, const T& fallback) {
  return opt->count() > 0 ? value : fallback;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear space-time tube proposals, pooling, sampling and evaluation", "tubekit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tubekit 1.0.0");

  Common common;
  app.add_option("--config", common.config_path,
                 std::string("Run configuration (JSON); defaults to $") + kConfigEnvVar + " or built-ins");
  common.seed_opt = app.add_option("--seed", common.seed, "RNG seed overriding the configuration");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a deterministic synthetic scene");
  std::string synth_out;
  SceneConfig scene;
  std::string synth_motion = "mixed";
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--video", scene.video, "Video id");
  synth->add_option("--objects", scene.objects, "Object count");
  synth->add_option("--width", scene.frame_width, "Frame width (pixels)");
  synth->add_option("--height", scene.frame_height, "Frame height (pixels)");
  auto* synth_length = synth->add_option("--length", scene.length, "Chunk length T");
  synth->add_option("--t0", scene.t0, "First frame index");
  synth->add_option("--motion", synth_motion, "static, linear or mixed")
      ->check(CLI::IsMember({"static", "linear", "mixed"}));
  synth->add_option("--max-speed", scene.max_speed, "Largest speed component (pixels/frame)");
  synth->add_option("--points", scene.points_per_object, "Point tracks per object");
  synth->add_option("--clutter", scene.clutter_tracks, "Random clutter point tracks");
  synth->add_option("--track-noise", scene.track_noise, "Point-track endpoint noise (pixels)");
  synth->add_option("--feature-noise", scene.feature_noise, "Feature-volume noise level");
  synth->add_option("--channels", scene.feature_channels, "Feature channels");
  auto* synth_stride = synth->add_option("--stride", scene.feature_stride, "Feature stride (pixels per cell)");
  synth->add_option("--classes", scene.classes, "Number of object classes");

  // fit-tubes
  auto* fit = app.add_subcommand("fit-tubes", "Linearise ground-truth tracks into per-chunk tubes");
  std::string fit_tracks;
  std::string fit_out;
  int fit_length = 0;
  int fit_t0 = 0;
  double fit_min_coverage = 0.0;
  fit->add_option("--tracks", fit_tracks, "Track file")->required();
  fit->add_option("--out", fit_out, "Output tube file")->required();
  auto* fit_length_opt = fit->add_option("--length", fit_length, "Chunk length T");
  auto* fit_t0_opt = fit->add_option("--t0", fit_t0, "Fit only the chunk starting here (default: tile from frame 0)");
  fit->add_option("--min-coverage", fit_min_coverage, "Drop fits covering less of the chunk than this");

  // track-proposals
  auto* trackp = app.add_subcommand("track-proposals", "Tube proposals from seed boxes and point tracks");
  std::string tp_seeds;
  std::string tp_tracks;
  std::string tp_out;
  double tp_width = 0.0;
  double tp_height = 0.0;
  trackp->add_option("--seeds", tp_seeds, "Seed box file")->required();
  trackp->add_option("--point-tracks", tp_tracks, "Point track file")->required();
  trackp->add_option("--width", tp_width, "Frame width")->required();
  trackp->add_option("--height", tp_height, "Frame height")->required();
  trackp->add_option("--out", tp_out, "Output tube file")->required();

  // anchors
  auto* anchors = app.add_subcommand("anchors", "Emit the tube-anchor grid");
  int an_h = 0;
  int an_w = 0;
  int an_length = 0;
  int an_t0 = 0;
  std::string an_ratios = "config";
  std::string an_video = SceneConfig{}.video;
  std::string an_out;
  anchors->add_option("--feature-height", an_h, "Feature map height")->required();
  anchors->add_option("--feature-width", an_w, "Feature map width")->required();
  auto* an_length_opt = anchors->add_option("--length", an_length, "Chunk length T");
  anchors->add_option("--t0", an_t0, "First frame index");
  anchors->add_option("--ratios", an_ratios, "Aspect-ratio set: config, square or diverse")
      ->check(CLI::IsMember({"config", "square", "diverse"}));
  anchors->add_option("--video", an_video, "Video id written to the records");
  anchors->add_option("--out", an_out, "Output tube file")->required();

  // propose
  auto* propose = app.add_subcommand("propose", "Decode score/regression maps into tube proposals");
  std::string pr_scores;
  std::string pr_deltas;
  std::string pr_out;
  std::string pr_video = SceneConfig{}.video;
  double pr_fw = 0.0;
  double pr_fh = 0.0;
  std::size_t pr_top_n = 0;
  double pr_threshold = 0.0;
  int pr_length = 0;
  int pr_t0 = 0;
  propose->add_option("--scores", pr_scores, "Score volume (1 x K x H' x W')")->required();
  propose->add_option("--deltas", pr_deltas, "Regression volume (1 x 8K x H' x W')")->required();
  propose->add_option("--frame-width", pr_fw, "Frame width")->required();
  propose->add_option("--frame-height", pr_fh, "Frame height")->required();
  auto* pr_top_n_opt = propose->add_option("--top-n", pr_top_n, "Proposals kept after NMS");
  auto* pr_threshold_opt = propose->add_option("--threshold", pr_threshold, "Tube-NMS threshold");
  auto* pr_length_opt = propose->add_option("--length", pr_length, "Chunk length T");
  propose->add_option("--t0", pr_t0, "First frame index");
  propose->add_option("--video", pr_video, "Video id written to the records");
  propose->add_option("--out", pr_out, "Output tube file")->required();

  // nms
  auto* nms = app.add_subcommand("nms", "Greedy NMS over tubes (per chunk) or detections (per frame and class)");
  std::string nms_in;
  std::string nms_out;
  std::string nms_mode = "tube";
  double nms_threshold = 0.0;
  nms->add_option("--in", nms_in, "Tube or detection file")->required();
  nms->add_option("--out", nms_out, "Output file")->required();
  nms->add_option("--mode", nms_mode, "tube or box")->check(CLI::IsMember({"tube", "box"}));
  auto* nms_threshold_opt = nms->add_option("--threshold", nms_threshold, "Suppression threshold");

  // assign
  auto* assign = app.add_subcommand("assign", "Label proposals or anchors against ground-truth tubes");
  std::string as_props;
  std::string as_gt;
  std::string as_out;
  std::string as_mode = "proposal";
  std::string as_pool_out;
  assign->add_option("--proposals", as_props, "Proposal or anchor tube file")->required();
  assign->add_option("--gt", as_gt, "Ground-truth tube file (with classes)")->required();
  assign->add_option("--out", as_out, "Output label file")->required();
  assign->add_option("--mode", as_mode, "proposal or anchor")->check(CLI::IsMember({"proposal", "anchor"}));
  assign->add_option("--pool-out", as_pool_out, "Also write a labeled pool (chunks numbered in file order)");

  // pool
  auto* pool = app.add_subcommand("pool", "TOI-pool tubes from a feature volume");
  std::string po_volume;
  std::string po_tubes;
  std::string po_out;
  std::size_t po_size = 0;
  std::string po_mode;
  std::size_t po_threads = 0;
  pool->add_option("--volume", po_volume, "Feature volume file")->required();
  pool->add_option("--tubes", po_tubes, "Tube file")->required();
  pool->add_option("--out", po_out, "Output volume (N x C x P x P)")->required();
  auto* po_size_opt = pool->add_option("--size", po_size, "Pooled side P");
  auto* po_mode_opt = pool->add_option("--mode", po_mode, "Temporal aggregation: max or average")
                          ->check(CLI::IsMember({"max", "average"}));
  pool->add_option("--threads", po_threads, "Worker threads (0: hardware concurrency)");

  // sample
  auto* sample = app.add_subcommand("sample", "Sample training batch manifests from a labeled pool");
  std::string sa_pool;
  std::string sa_out;
  std::string sa_preset = "tube-cnn";
  std::size_t sa_batches = 1;
  sample->add_option("--pool", sa_pool, "Labeled pool file")->required();
  sample->add_option("--out", sa_out, "Output batch manifest")->required();
  sample->add_option("--preset", sa_preset, "tube-cnn, tpn or hard")->check(CLI::IsMember({"tube-cnn", "tpn", "hard"}));
  sample->add_option("--batches", sa_batches, "Number of batches");

  // mine-hard
  auto* mine = app.add_subcommand("mine-hard", "Select high-scoring proposals with no ground-truth overlap");
  std::string mh_props;
  std::string mh_gt;
  std::string mh_out;
  std::size_t mh_top_k = 0;
  mine->add_option("--proposals", mh_props, "Scored tube file")->required();
  mine->add_option("--gt", mh_gt, "Ground-truth tube file")->required();
  mine->add_option("--out", mh_out, "Output tube file")->required();
  auto* mh_top_k_opt = mine->add_option("--top-k", mh_top_k, "Hard negatives kept per chunk");

  // eval-recall
  auto* recall = app.add_subcommand("eval-recall", "Tube-recall and box-recall of proposals");
  std::string er_props;
  std::string er_gt;
  std::string er_tracks;
  std::string er_out;
  double er_threshold = 0.0;
  recall->add_option("--proposals", er_props, "Proposal tube file")->required();
  recall->add_option("--gt", er_gt, "Ground-truth tube file")->required();
  recall->add_option("--tracks", er_tracks, "Ground-truth track file (enables box recall)");
  recall->add_option("--out", er_out, "Output metric report");
  auto* er_threshold_opt = recall->add_option("--threshold", er_threshold, "Overlap threshold");

  // eval-ap / eval-corloc
  struct DetectionEval {
    std::string detections;
    std::string tubes;
    std::string gt;
    std::string out;
    double threshold = 0.0;
    CLI::Option* threshold_opt = nullptr;
    double nms_threshold = 0.0;
    CLI::Option* nms_opt = nullptr;
  };
  DetectionEval ap_args;
  DetectionEval cl_args;
  auto add_detection_eval = [&](const char* name, const char* help, DetectionEval& a) {
    auto* cmd = app.add_subcommand(name, help);
    auto* d = cmd->add_option("--detections", a.detections, "Detection file");
    auto* t = cmd->add_option("--tubes", a.tubes, "Scored, classed tube file (decomposed into detections)");
    d->excludes(t);
    cmd->add_option("--gt", a.gt, "Ground-truth track file")->required();
    cmd->add_option("--out", a.out, "Output metric report");
    a.threshold_opt = cmd->add_option("--threshold", a.threshold, "IoU threshold");
    a.nms_opt = cmd->add_option("--nms-threshold", a.nms_threshold, "Per-frame NMS threshold for --tubes");
    return cmd;
  };
  auto* eval_ap = add_detection_eval("eval-ap", "Per-class average precision", ap_args);
  auto* eval_corloc = add_detection_eval("eval-corloc", "Per-class CorLoc", cl_args);

  // report
  auto* report = app.add_subcommand("report", "Merge metric reports");
  std::vector<std::string> rep_in;
  std::string rep_out;
  report->add_option("--in", rep_in, "Metric report files")->required();
  report->add_option("--out", rep_out, "Merged report");

  auto* config_cmd = app.add_subcommand("config", "Print the effective configuration");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    const RunConfig cfg = common.load();

    if (*config_cmd) {
      out << config_to_json(cfg).dump(2) << '\n';
    } else if (*synth) {
      if (synth_length->count() == 0) scene.length = cfg.tube_length;
      if (synth_stride->count() == 0) scene.feature_stride = cfg.anchors.stride;
      scene.motion = synth_motion == "static"   ? MotionModel::kStatic
                     : synth_motion == "linear" ? MotionModel::kLinear
                                                : MotionModel::kMixed;
      scene.seed = cfg.seed;
      const Scene s = generate_scene(scene);
      const fs::path dir(synth_out);
      fs::create_directories(dir);

      std::vector<json> tracks;
      std::vector<json> tubes;
      std::vector<json> points;
      std::vector<json> seeds;
      for (const auto& o : s.objects) {
        tracks.push_back(io::to_json(o.track));
        tubes.push_back(io::to_json(io::TubeRecord{scene.video, o.tube.tube, std::nullopt, o.tube.class_id}));
      }
      for (const auto& p : s.point_tracks) {
        points.push_back(io::to_json(io::PointTrackRecord{scene.video, scene.t0, scene.length, p}));
      }
      for (const auto& b : s.seed_boxes) seeds.push_back(io::to_json(io::SeedBoxRecord{scene.video, scene.t0, b, {}}));
      io::write_records(dir / "tracks.jsonl", io::schema::kTracks, tracks);
      io::write_records(dir / "gt_tubes.jsonl", io::schema::kTubes, tubes);
      io::write_records(dir / "point_tracks.jsonl", io::schema::kPointTracks, points);
      io::write_records(dir / "seed_boxes.jsonl", io::schema::kSeedBoxes, seeds);
      io::write_volume(dir / "features.fvol", s.features);
      std::size_t clamped = 0;
      for (const auto& o : s.objects) clamped += o.velocity_clamped ? 1 : 0;
      out << "synth: " << s.objects.size() << " objects (" << clamped << " velocity-clamped), "
          << s.point_tracks.size() << " point tracks -> " << dir.string() << '\n';
    } else if (*fit) {
      const int length = pick(fit_length_opt, fit_length, cfg.tube_length);
      if (length < 1) throw std::invalid_argument("fit-tubes: --length must be >= 1");
      std::vector<json> records;
      std::size_t dropped = 0;
      for (const auto& track : io::read_tracks(fit_tracks)) {
        if (track.entries.empty()) continue;
        std::vector<int> starts;
        if (fit_t0_opt->count() > 0) {
          starts.push_back(fit_t0);
        } else {
          auto floor_div = [length](int f) { return f >= 0 ? f / length : -((-f + length - 1) / length); };
          for (int c = floor_div(track.entries.front().frame); c <= floor_div(track.entries.back().frame); ++c) {
            starts.push_back(c * length);
          }
        }
        for (int t0 : starts) {
          const Chunk chunk{track.video, t0, length};
          const bool any = std::any_of(track.entries.begin(), track.entries.end(),
                                       [&](const TrackEntry& e) { return chunk.contains(e.frame); });
          if (!any) continue;
          const LinearFit f = fit_linear_tube(track.entries, chunk);
          if (f.coverage < fit_min_coverage) {
            ++dropped;
            continue;
          }
          json j = io::to_json(io::TubeRecord{track.video, f.tube, std::nullopt, track.class_id});
          j["coverage"] = f.coverage;
          j["residual"] = f.max_residual;
          records.push_back(std::move(j));
        }
      }
      io::write_records(fit_out, io::schema::kTubes, records);
      out << "fit-tubes: " << records.size() << " tubes (" << dropped << " below coverage)\n";
    } else if (*trackp) {
      std::map<ChunkKey, std::vector<PointTrack>> tracks;
      for (const auto& r : io::read_point_tracks(tp_tracks)) tracks[{r.video, r.t0, r.length}].push_back(r.track);
      const auto seeds = io::read_seed_boxes(tp_seeds);
      std::vector<json> records;
      std::size_t fallbacks = 0;
      for (const auto& [key, pts] : tracks) {
        const auto& [video, t0, length] = key;
        std::vector<Box> boxes;
        for (const auto& s : seeds) {
          if (s.video == video && s.frame == t0) boxes.push_back(s.box);
        }
        const auto proposals = tube_proposals_from_tracks(
            boxes, pts, MotionChunk{t0, length, tp_width, tp_height}, cfg.motion,
            derive_stream_seed(cfg.seed, std::hash<std::string>{}(describe(key))));
        for (const auto& p : proposals) {
          json j = io::to_json(io::TubeRecord{video, p.tube, std::nullopt, std::nullopt});
          j["seed"] = p.seed_index;
          j["group"] = p.group;
          j["support"] = p.group_size;
          j["fallback"] = p.fallback;
          fallbacks += p.fallback ? 1 : 0;
          records.push_back(std::move(j));
        }
      }
      io::write_records(tp_out, io::schema::kTubes, records);
      out << "track-proposals: " << records.size() << " tubes (" << fallbacks << " zero-motion fallbacks)\n";
    } else if (*anchors) {
      AnchorConfig ac = cfg.anchors;
      if (an_ratios == "square") ac.aspect_ratios = cfg.square_aspect_ratios;
      if (an_ratios == "diverse") ac.aspect_ratios = cfg.diverse_aspect_ratios;
      const AnchorGrid grid = generate_anchor_grid(an_h, an_w, ac, pick(an_length_opt, an_length, cfg.tube_length), an_t0);
      std::vector<json> records;
      records.reserve(grid.anchors.size());
      for (const auto& a : grid.anchors) records.push_back(io::to_json(io::TubeRecord{an_video, a, {}, {}}));
      io::write_records(an_out, io::schema::kTubes, records);
      out << "anchors: " << grid.anchors.size() << " (" << grid.anchors_per_seed() << " per seed)\n";
    } else if (*propose) {
      const FeatureVolume scores = io::read_volume(pr_scores);
      const FeatureVolume deltas = io::read_volume(pr_deltas);
      const auto& ss = scores.shape();
      const auto& ds = deltas.shape();
      if (ss.frames != 1 || ds.frames != 1 || ds.channels != 8 * ss.channels || ds.height != ss.height ||
          ds.width != ss.width) {
        throw std::invalid_argument("propose: expected scores 1xKxH'xW' and deltas 1x8KxH'xW'");
      }
      if (ss.channels != cfg.anchors.anchors_per_seed()) {
        throw std::invalid_argument("propose: score volume has " + std::to_string(ss.channels) +
                                    " channels, anchor config defines " +
                                    std::to_string(cfg.anchors.anchors_per_seed()) + " anchors per seed");
      }
      const AnchorGrid grid = generate_anchor_grid(static_cast<int>(ss.height), static_cast<int>(ss.width), cfg.anchors,
                                                   pick(pr_length_opt, pr_length, cfg.tube_length), pr_t0);
      const std::size_t k_count = ss.channels;
      std::vector<double> score_map(grid.anchors.size());
      std::vector<double> delta_map(grid.anchors.size() * 8);
      for (std::size_t y = 0; y < ss.height; ++y) {
        for (std::size_t x = 0; x < ss.width; ++x) {
          for (std::size_t k = 0; k < k_count; ++k) {
            const std::size_t a = grid.index(static_cast<int>(y), static_cast<int>(x), k);
            score_map[a] = scores.at(0, k, y, x);
            for (std::size_t p = 0; p < 8; ++p) delta_map[a * 8 + p] = deltas.at(0, k * 8 + p, y, x);
          }
        }
      }
      const ProposalOptions opts{pr_fw, pr_fh, pick(pr_top_n_opt, pr_top_n, cfg.top_n),
                                 pick(pr_threshold_opt, pr_threshold, cfg.nms.proposal)};
      const auto proposals = propose_from_maps(score_map, delta_map, grid, opts);
      std::vector<json> records;
      for (const auto& p : proposals) records.push_back(io::to_json(io::TubeRecord{pr_video, p.tube, p.score, {}}));
      io::write_records(pr_out, io::schema::kTubes, records);
      out << "propose: " << records.size() << " proposals from " << grid.anchors.size() << " anchors\n";
    } else if (*nms) {
      std::vector<json> records;
      if (nms_mode == "tube") {
        const double thr = pick(nms_threshold_opt, nms_threshold, cfg.nms.proposal);
        const auto tubes = io::read_tubes(nms_in);
        for (const auto& [key, idx] : group_by_chunk(tubes)) {
          std::vector<ScoredTube> items;
          for (std::size_t i : idx) items.push_back(tubes[i].scored());
          for (std::size_t k : nms_tubes(items, thr)) records.push_back(io::to_json(tubes[idx[k]]));
        }
        io::write_records(nms_out, io::schema::kTubes, records);
      } else {
        const double thr = pick(nms_threshold_opt, nms_threshold, cfg.nms.detection);
        const auto dets = io::read_detections(nms_in);
        std::map<std::tuple<std::string, int, int>, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < dets.size(); ++i) groups[{dets[i].video, dets[i].frame, dets[i].class_id}].push_back(i);
        for (const auto& [key, idx] : groups) {
          std::vector<ScoredBox> items;
          for (std::size_t i : idx) items.push_back({dets[i].box, dets[i].frame, dets[i].score, dets[i].class_id});
          for (std::size_t k : nms_boxes(items, thr)) records.push_back(io::to_json(dets[idx[k]]));
        }
        io::write_records(nms_out, io::schema::kDetections, records);
      }
      out << "nms: kept " << records.size() << '\n';
    } else if (*assign) {
      const auto props = io::read_tubes(as_props);
      const auto gts = io::read_tubes(as_gt);
      const auto gt_groups = group_by_chunk(gts);
      std::vector<json> records;
      std::vector<json> pool_records;
      std::size_t chunk_no = 0;
      auto add_pool = [&](std::size_t index, const char* label) {
        pool_records.push_back(io::to_json(io::PoolRecord{{chunk_no, index, props[index].score}, label}));
      };
      for (const auto& [key, idx] : group_by_chunk(props)) {
        const std::vector<Tube> chunk_props = tubes_at(props, idx);
        std::vector<std::size_t> gt_idx;
        if (auto it = gt_groups.find(key); it != gt_groups.end()) gt_idx = it->second;
        if (as_mode == "anchor") {
          const auto labels = assign_anchor_labels(chunk_props, tubes_at(gts, gt_idx), cfg.labels.anchor);
          for (std::size_t k = 0; k < labels.size(); ++k) {
            const char* name = labels[k] == AnchorLabel::kPositive   ? "positive"
                               : labels[k] == AnchorLabel::kNegative ? "negative"
                                                                     : "ignore";
            records.push_back({{"index", idx[k]}, {"label", name}});
            if (labels[k] != AnchorLabel::kIgnore) add_pool(idx[k], name);
          }
        } else {
          std::vector<LabeledTube> labeled;
          for (std::size_t g : gt_idx) {
            if (!gts[g].class_id) throw std::invalid_argument("assign: ground-truth tube without class");
            labeled.push_back({gts[g].tube, *gts[g].class_id});
          }
          const auto labels = assign_proposal_labels(chunk_props, labeled, cfg.labels.proposal);
          for (std::size_t k = 0; k < labels.size(); ++k) {
            const auto& a = labels[k];
            json j{{"index", idx[k]},
                   {"label", a.label == ProposalLabel::kForeground   ? "foreground"
                             : a.label == ProposalLabel::kBackground ? "background"
                                                                     : "excluded"},
                   {"overlap", a.overlap}};
            if (a.matched) j["gt"] = gt_idx[*a.matched];
            if (a.class_id) j["class"] = *a.class_id;
            if (a.target) j["target"] = *a.target;
            records.push_back(std::move(j));
            add_pool(idx[k], a.label == ProposalLabel::kForeground   ? "positive"
                             : a.label == ProposalLabel::kBackground ? "negative"
                                                                     : "far_negative");
          }
        }
        ++chunk_no;
      }
      io::write_records(as_out, io::schema::kLabels, records);
      if (!as_pool_out.empty()) io::write_records(as_pool_out, io::schema::kPool, pool_records);
      out << "assign: " << records.size() << " labels\n";
    } else if (*pool) {
      const FeatureVolume volume = io::read_volume(po_volume);
      const std::size_t side = pick(po_size_opt, po_size, cfg.pooling.side);
      const TemporalMode mode = po_mode_opt->count() > 0 ? parse_temporal_mode(po_mode) : cfg.pooling.temporal;
      std::vector<Tube> tubes;
      for (const auto& r : io::read_tubes(po_tubes)) tubes.push_back(r.tube);
      if (tubes.empty()) throw std::invalid_argument("pool: no tubes");
      const auto maps = toi_pool_forward_batch(volume, tubes, side, mode, po_threads);
      const VolumeShape shape{tubes.size(), volume.shape().channels, side, side};
      std::vector<double> values;
      values.reserve(shape.size());
      for (const auto& m : maps) values.insert(values.end(), m.values.begin(), m.values.end());
      io::write_volume(po_out, FeatureVolume(shape, volume.stride(), std::move(values)));
      out << "pool: " << tubes.size() << " x " << shape.channels << " x " << side << " x " << side << '\n';
    } else if (*sample) {
      const BatchConfig bc = sa_preset == "tpn" ? cfg.tpn_batch : sa_preset == "hard" ? cfg.hard_batch : cfg.tube_cnn_batch;
      LabeledPool labeled;
      std::vector<PoolItem> hard;
      for (const auto& r : io::read_pool(sa_pool)) {
        if (r.item.chunk >= labeled.size()) labeled.resize(r.item.chunk + 1);
        auto& c = labeled[r.item.chunk];
        if (r.label == "positive") {
          c.positives.push_back(r.item);
        } else if (r.label == "negative") {
          c.negatives.push_back(r.item);
        } else {
          c.far_negatives.push_back(r.item);
          hard.push_back(r.item);
        }
      }
      std::vector<json> records;
      std::size_t underfilled = 0;
      for (std::size_t b = 0; b < sa_batches; ++b) {
        const std::uint64_t seed = derive_stream_seed(cfg.seed, b);
        Batch batch;
        if (sa_preset == "hard") {
          std::vector<PoolItem> pos;
          std::vector<PoolItem> neg;
          for (const auto& c : labeled) {
            pos.insert(pos.end(), c.positives.begin(), c.positives.end());
            neg.insert(neg.end(), c.negatives.begin(), c.negatives.end());
          }
          // Hard candidates: far negatives by descending score.
          std::stable_sort(hard.begin(), hard.end(), [](const PoolItem& a, const PoolItem& b2) {
            return a.score.value_or(0.0) > b2.score.value_or(0.0);
          });
          batch = compose_hard_batch(pos, hard, neg, bc, seed);
        } else {
          batch = sample_batch(labeled, bc, seed);
        }
        underfilled += batch.underfilled ? 1 : 0;
        records.push_back(io::to_json(batch, b));
      }
      io::write_records(sa_out, io::schema::kBatches, records);
      out << "sample: " << records.size() << " batches (" << underfilled << " underfilled)\n";
    } else if (*mine) {
      const auto props = io::read_tubes(mh_props);
      const auto gts = io::read_tubes(mh_gt);
      const auto gt_groups = group_by_chunk(gts);
      const std::size_t top_k = pick(mh_top_k_opt, mh_top_k, default_mining_top_k(cfg.hard_batch));
      std::vector<json> records;
      for (const auto& [key, idx] : group_by_chunk(props)) {
        std::vector<ScoredTube> scored;
        for (std::size_t i : idx) {
          if (!props[i].score) throw std::invalid_argument("mine-hard: proposal without score");
          scored.push_back(props[i].scored());
        }
        std::vector<Tube> chunk_gt;
        if (auto it = gt_groups.find(key); it != gt_groups.end()) chunk_gt = tubes_at(gts, it->second);
        for (std::size_t k : mine_hard_negatives(scored, chunk_gt, top_k)) {
          json j = io::to_json(props[idx[k]]);
          j["index"] = idx[k];
          records.push_back(std::move(j));
        }
      }
      io::write_records(mh_out, io::schema::kTubes, records);
      out << "mine-hard: " << records.size() << " hard negatives\n";
    } else if (*recall) {
      const double thr = pick(er_threshold_opt, er_threshold, cfg.metrics.recall);
      const auto props = io::read_tubes(er_props);
      const auto gts = io::read_tubes(er_gt);
      const auto prop_groups = group_by_chunk(props);
      std::map<std::string, std::vector<Track>> tracks_by_video;
      if (!er_tracks.empty()) {
        for (auto& t : io::read_tracks(er_tracks)) tracks_by_video[t.video].push_back(std::move(t));
      }
      RecallCount tube_count;
      RecallCount box_count;
      for (const auto& [key, idx] : group_by_chunk(gts)) {
        std::vector<Tube> chunk_props;
        if (auto it = prop_groups.find(key); it != prop_groups.end()) chunk_props = tubes_at(props, it->second);
        tube_count += tube_recall_count(chunk_props, tubes_at(gts, idx), thr);
        if (!er_tracks.empty()) {
          const auto& [video, t0, length] = key;
          box_count += box_recall_count(chunk_props, tracks_by_video[video], Chunk{video, t0, length}, thr);
        }
      }
      std::vector<MetricReport> reports;
      const std::map<std::string, double> params{{"threshold", thr}, {"proposals", static_cast<double>(props.size())}};
      reports.push_back({"tube_recall", tube_count.ratio(), params, {}});
      if (!er_tracks.empty()) reports.push_back({"box_recall", box_count.ratio(), params, {}});
      write_metrics(er_out, reports, out);
    } else if (*eval_ap || *eval_corloc) {
      const bool is_ap = static_cast<bool>(*eval_ap);
      const DetectionEval& a = is_ap ? ap_args : cl_args;
      std::vector<Detection> dets;
      if (!a.tubes.empty()) {
        const double nms_thr = pick(a.nms_opt, a.nms_threshold, cfg.nms.detection);
        std::map<std::string, std::vector<ScoredTube>> by_video;
        for (const auto& r : io::read_tubes(a.tubes)) by_video[r.video].push_back(r.scored());
        for (const auto& [video, tubes] : by_video) {
          auto d = tubes_to_detections(tubes, video, nms_thr);
          dets.insert(dets.end(), d.begin(), d.end());
        }
      } else if (!a.detections.empty()) {
        dets = io::read_detections(a.detections);
      } else {
        throw std::invalid_argument("one of --detections or --tubes is required");
      }
      const auto gt = boxes_of(io::read_tracks(a.gt));
      const double thr = pick(a.threshold_opt, a.threshold, is_ap ? cfg.metrics.ap_iou : cfg.metrics.corloc_iou);
      const auto per_class = is_ap ? average_precision(dets, gt, thr) : corloc(dets, gt, thr);
      const MetricReport m{is_ap ? "mean_ap" : "corloc", mean_over_classes(per_class),
                           {{"iou_threshold", thr}, {"detections", static_cast<double>(dets.size())}}, per_class};
      write_metrics(a.out, {m}, out);
    } else if (*report) {
      std::vector<MetricReport> all;
      for (const auto& path : rep_in) {
        for (auto& m : io::read_metrics(path)) all.push_back(std::move(m));
      }
      write_metrics(rep_out, all, out);
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace tubekit
