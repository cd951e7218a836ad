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

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tubekit/anchors.hpp"

using namespace tubekit;

namespace {

Box random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-50.0, 250.0);
  std::uniform_real_distribution<double> side(1.0, 120.0);
  const double x = pos(rng);
  const double y = pos(rng);
  return {x, y, x + side(rng), y + side(rng)};
}

Tube random_tube(std::mt19937_64& rng) { return Tube{0, 10, random_box(rng), random_box(rng)}; }

}  // namespace

TEST_CASE("anchor grid layout") {
  AnchorConfig six;
  const auto g1 = generate_anchor_grid(1, 1, six, 10);
  CHECK(g1.anchors.size() == 6);

  AnchorConfig diverse;
  diverse.aspect_ratios = {0.25, 0.5, 1.0, 2.0, 4.0};
  CHECK(diverse.anchors_per_seed() == 30);
  const auto g = generate_anchor_grid(3, 4, diverse, 10, 20);
  CHECK(g.anchors.size() == 3 * 4 * 30);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) {
      for (std::size_t s = 0; s < diverse.scales.size(); ++s) {
        for (std::size_t r = 0; r < diverse.aspect_ratios.size(); ++r) {
          const Tube& a = g.anchors[g.index(i, j, s * diverse.aspect_ratios.size() + r)];
          CHECK(a.static_motion());
          CHECK(a.t0 == 20);
          CHECK(a.length == 10);
          CHECK(a.start.center_x() == doctest::Approx((j + 0.5) * 16.0));
          CHECK(a.start.center_y() == doctest::Approx((i + 0.5) * 16.0));
          const double ratio = diverse.aspect_ratios[r];
          CHECK(a.start.width() == doctest::Approx(diverse.scales[s] * std::sqrt(ratio)));
          CHECK(a.start.height() == doctest::Approx(diverse.scales[s] / std::sqrt(ratio)));
          CHECK(a.start.width() / a.start.height() == doctest::Approx(ratio));
        }
      }
    }
  }
}

TEST_CASE("anchor config validation") {
  AnchorConfig c;
  c.scales.clear();
  CHECK_THROWS_AS(generate_anchor_grid(1, 1, c, 10), std::invalid_argument);
  c = AnchorConfig{};
  c.aspect_ratios.clear();
  CHECK_THROWS_AS(generate_anchor_grid(1, 1, c, 10), std::invalid_argument);
  c = AnchorConfig{};
  c.scales = {16, -1};
  CHECK_THROWS_AS(generate_anchor_grid(1, 1, c, 10), std::invalid_argument);
  CHECK_THROWS_AS(generate_anchor_grid(0, 1, AnchorConfig{}, 10), std::invalid_argument);
}

TEST_CASE("regression coding examples") {
  const Tube anchor{0, 10, {0, 0, 10, 10}, {0, 0, 10, 10}};
  const auto zero = encode_regression(anchor, anchor);
  for (double p : zero) CHECK(p == 0.0);
  CHECK(decode_regression(anchor, RegressionParams{}) == anchor);

  const Tube wider{0, 10, {-5, 0, 15, 10}, {0, 0, 10, 10}};
  const auto p = encode_regression(anchor, wider);
  CHECK(p[2] == doctest::Approx(std::log(2.0)));
  CHECK(p[2] == doctest::Approx(0.6931).epsilon(1e-4));
  CHECK(p[0] == 0.0);
  CHECK(p[6] == 0.0);

  RegressionParams start_only{};
  start_only[2] = std::log(2.0);
  const Tube d = decode_regression(anchor, start_only);
  CHECK(d.start.width() == doctest::Approx(20.0));
  CHECK(d.end == anchor.end);

  RegressionParams end_move{};
  end_move[4] = 1.5;
  const Tube moving = decode_regression(anchor, end_move);
  CHECK_FALSE(moving.static_motion());
  CHECK(moving.end.x1 == doctest::Approx(15.0));
}

TEST_CASE("regression coding errors") {
  const Tube anchor{0, 10, {0, 0, 10, 10}, {0, 0, 10, 10}};
  RegressionParams huge{};
  huge[2] = 1e6;
  CHECK_THROWS_AS(decode_regression(anchor, huge), std::invalid_argument);
  RegressionParams nan{};
  nan[5] = std::nan("");
  CHECK_THROWS_AS(decode_regression(anchor, nan), std::invalid_argument);
  const Tube flat{0, 10, {0, 0, 0, 10}, {0, 0, 10, 10}};
  CHECK_THROWS_AS(encode_regression(flat, anchor), std::invalid_argument);
}

TEST_CASE("decode inverts encode") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 2000; ++i) {
    const Tube a = random_tube(rng);
    const Tube t = random_tube(rng);
    const Tube back = decode_regression(a, encode_regression(a, t));
    for (int c = 0; c < 4; ++c) {
      CHECK(std::abs(back.start.coords()[c] - t.start.coords()[c]) <= 1e-6);
      CHECK(std::abs(back.end.coords()[c] - t.end.coords()[c]) <= 1e-6);
    }
  }
}

TEST_CASE("smooth l1") {
  CHECK(smooth_l1(0.0) == 0.0);
  CHECK(smooth_l1(0.5) == 0.125);
  CHECK(smooth_l1(2.0) == 1.5);
  CHECK(smooth_l1(-2.0) == 1.5);
  for (double s : {1.0, -1.0}) {
    const double h = 1e-12;
    CHECK(std::abs(smooth_l1(s - h) - smooth_l1(s + h)) <= 1e-9);
    CHECK(std::abs(smooth_l1_gradient(s - h) - smooth_l1_gradient(s + h)) <= 1e-9);
    CHECK(smooth_l1_gradient(s) == s);
  }
  CHECK(smooth_l1_gradient(0.25) == 0.25);
  CHECK(smooth_l1_gradient(-3.0) == -1.0);
}

TEST_CASE("anchor labels") {
  const Box g{0, 0, 10, 10};
  const std::vector<Tube> gt{Tube{0, 10, g, g}};
  auto tube_with_iou = [](double w) {
    // [0, w] x [0, 10] against [0, 10]^2 has IoU w / 10 for w <= 10.
    const Box b{0, 0, w, 10};
    return Tube{0, 10, b, b};
  };
  const std::vector<Tube> anchors{tube_with_iou(6), tube_with_iou(2), tube_with_iou(4), tube_with_iou(5),
                                  tube_with_iou(3)};
  const auto labels = assign_anchor_labels(anchors, gt);
  CHECK(labels[0] == AnchorLabel::kPositive);
  CHECK(labels[1] == AnchorLabel::kNegative);
  CHECK(labels[2] == AnchorLabel::kIgnore);
  CHECK(labels[3] == AnchorLabel::kPositive);
  CHECK(labels[4] == AnchorLabel::kNegative);
  CHECK(assign_anchor_labels(anchors, std::vector<Tube>{})[0] == AnchorLabel::kNegative);

  const std::vector<Tube> other_length{Tube{0, 5, g, g}};
  CHECK_THROWS_AS(assign_anchor_labels(anchors, other_length), std::invalid_argument);
}

TEST_CASE("anchor labels ignore ground-truth order") {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 100; ++i) {
    std::vector<Tube> anchors;
    std::vector<Tube> gt;
    for (int k = 0; k < 20; ++k) anchors.push_back(Tube{0, 10, oracle::random_int_box(rng), oracle::random_int_box(rng)});
    for (int k = 0; k < 4; ++k) gt.push_back(Tube{0, 10, oracle::random_int_box(rng), oracle::random_int_box(rng)});
    auto shuffled = gt;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(assign_anchor_labels(anchors, gt) == assign_anchor_labels(anchors, shuffled));
  }
}

TEST_CASE("proposal labels") {
  const Box g{0, 0, 10, 10};
  const std::vector<LabeledTube> gt{{Tube{0, 10, g, g}, 3}};
  auto tube_with_iou = [](double w) {
    const Box b{0, 0, w, 10};
    return Tube{0, 10, b, b};
  };
  const std::vector<Tube> props{tube_with_iou(7), tube_with_iou(3), tube_with_iou(0.5), tube_with_iou(1),
                                tube_with_iou(5)};
  const auto a = assign_proposal_labels(props, gt);
  CHECK(a[0].label == ProposalLabel::kForeground);
  CHECK(a[0].class_id == 3);
  CHECK(a[0].target == encode_regression(props[0], gt[0].tube));
  CHECK(a[1].label == ProposalLabel::kBackground);
  CHECK_FALSE(a[1].class_id.has_value());
  CHECK_FALSE(a[1].target.has_value());
  CHECK(a[2].label == ProposalLabel::kExcluded);
  CHECK(a[3].label == ProposalLabel::kBackground);
  CHECK(a[4].label == ProposalLabel::kForeground);

  const auto none = assign_proposal_labels(props, std::vector<LabeledTube>{});
  CHECK(none[0].label == ProposalLabel::kExcluded);
  CHECK_FALSE(none[0].matched.has_value());
}

TEST_CASE("proposal labels break overlap ties by lower ground-truth index") {
  const Box p{0, 0, 10, 10};
  const std::vector<LabeledTube> gt{{Tube{0, 10, {0, 0, 10, 20}, {0, 0, 10, 20}}, 1},
                                    {Tube{0, 10, {0, -10, 10, 10}, {0, -10, 10, 10}}, 2}};
  const auto a = assign_proposal_labels(std::vector<Tube>{Tube{0, 10, p, p}}, gt);
  CHECK(a[0].matched == 0u);
  CHECK(a[0].class_id == 1);
  CHECK(a[0].overlap == doctest::Approx(0.5));
}

TEST_CASE("propose_from_maps basics") {
  AnchorConfig cfg;
  cfg.scales = {16, 32};
  const auto grid = generate_anchor_grid(2, 2, cfg, 10);
  std::vector<double> scores(grid.anchors.size(), 0.0);
  std::vector<double> deltas(grid.anchors.size() * 8, 0.0);
  scores[5] = 1.0;
  const auto out = propose_from_maps(scores, deltas, grid, {32, 32, 300, 1.0});
  REQUIRE(out.size() == grid.anchors.size());
  CHECK(out[0].tube == clip_tube(grid.anchors[5], 32, 32));
  CHECK(out[0].score == 1.0);

  CHECK_THROWS_AS(propose_from_maps(std::vector<double>(3), deltas, grid, {32, 32, 300, 0.7}), std::invalid_argument);
  CHECK_THROWS_AS(propose_from_maps(scores, std::vector<double>(8), grid, {32, 32, 300, 0.7}), std::invalid_argument);
  CHECK(propose_from_maps(scores, deltas, grid, {32, 32, 2, 1.0}).size() == 2);
}

TEST_CASE("propose_from_maps matches the decode-sort-suppress oracle") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::normal_distribution<double> delta(0.0, 0.3);
  std::uniform_int_distribution<int> dim(1, 2);
  std::uniform_real_distribution<double> thr(0.2, 0.9);
  AnchorConfig cfg;
  cfg.stride = 8;
  cfg.scales = {8, 16, 24};
  cfg.aspect_ratios = {0.5, 1.0, 2.0};
  for (int trial = 0; trial < 100; ++trial) {
    const auto grid = generate_anchor_grid(dim(rng), dim(rng), cfg, 6);
    std::vector<double> scores;
    std::vector<double> deltas;
    for (std::size_t a = 0; a < grid.anchors.size(); ++a) {
      scores.push_back(std::round(score(rng) * 20) / 20);
      for (int k = 0; k < 8; ++k) deltas.push_back(delta(rng));
    }
    const double t = thr(rng);
    const std::size_t top_n = 1 + trial % 10;
    const auto got = propose_from_maps(scores, deltas, grid, {20, 20, top_n, t});
    const auto want = oracle::propose(scores, deltas, grid, 20, 20, top_n, t);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].score == want[i].score);
      for (int c = 0; c < 4; ++c) {
        CHECK(std::abs(got[i].tube.start.coords()[c] - want[i].tube.start.coords()[c]) <= 1e-9);
        CHECK(std::abs(got[i].tube.end.coords()[c] - want[i].tube.end.coords()[c]) <= 1e-9);
      }
    }
  }
}
