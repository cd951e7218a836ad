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

#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tubekit/error.hpp"
#include "tubekit/geometry.hpp"

using namespace tubekit;

namespace {

Tube tube_of(Box s, Box e, int length = 10) { return Tube{0, length, s, e}; }

}  // namespace

TEST_CASE("iou examples") {
  const Box a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, Box{20, 20, 30, 30}) == 0.0);
  CHECK(iou(a, Box{5, 0, 15, 10}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(intersection_area(a, Box{5, 0, 15, 10}) == 50.0);
  // touching edges share no area
  CHECK(iou(a, Box{10, 0, 20, 10}) == 0.0);
}

TEST_CASE("iou rejects invalid boxes") {
  CHECK_THROWS_AS(iou(Box{0, 0, 0, 10}, Box{0, 0, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(iou(Box{0, 0, 1, 1}, Box{5, 5, 4, 6}), std::invalid_argument);
  CHECK_THROWS_AS(tube_overlap(Tube{0, 3, {0, 0, 1, 1}, {0, 0, -1, 1}}, Tube{0, 3, {0, 0, 1, 1}, {0, 0, 1, 1}}),
                  std::invalid_argument);
}

TEST_CASE("iou agrees with pixel rasterisation") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const Box a = oracle::random_int_box(rng);
    const Box b = oracle::random_int_box(rng);
    CHECK(std::abs(iou(a, b) - oracle::raster_iou(a, b)) <= 1e-9);
    CHECK((iou(a, b) == 0.0) == (oracle::raster_iou(a, b) == 0.0));
  }
}

TEST_CASE("iou and tube overlap properties") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 2000; ++i) {
    const Tube a = tube_of(oracle::random_int_box(rng), oracle::random_int_box(rng));
    const Tube b = tube_of(oracle::random_int_box(rng), oracle::random_int_box(rng));
    const double ab = tube_overlap(a, b);
    CHECK(ab == tube_overlap(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(tube_overlap(a, a) == 1.0);
    CHECK(iou(a.start, b.start) == iou(b.start, a.start));
  }
}

TEST_CASE("tube overlap examples") {
  const Box a{0, 0, 10, 10};
  const Box b{5, 0, 15, 10};
  CHECK(tube_overlap(tube_of(a, a), tube_of(a, a)) == 1.0);
  CHECK(tube_overlap(tube_of(a, a), tube_of(a, Box{50, 50, 60, 60})) == 0.0);
  CHECK(tube_overlap(tube_of(a, a), tube_of(b, a)) == doctest::Approx(1.0 / 3.0));
  // t0 is not inspected
  Tube shifted = tube_of(a, a);
  shifted.t0 = 40;
  CHECK(tube_overlap(tube_of(a, a), shifted) == 1.0);
}

TEST_CASE("interpolate_tube") {
  const Tube t{0, 10, {0, 0, 10, 10}, {9, 3, 19, 13}};
  CHECK(interpolate_tube(t, 0) == t.start);
  CHECK(interpolate_tube(t, 9) == t.end);
  CHECK(interpolate_tube(t, 3).x1 == doctest::Approx(3.0));
  CHECK(interpolate_tube(t, 3).y1 == doctest::Approx(1.0));
  CHECK_THROWS_AS(interpolate_tube(t, 10), std::invalid_argument);
  CHECK_THROWS_AS(interpolate_tube(t, -1), std::invalid_argument);

  const Tube single{4, 1, {1, 2, 3, 4}, {1, 2, 3, 4}};
  CHECK(interpolate_tube(single, 0) == single.start);
}

TEST_CASE("interpolation is affine in the frame offset") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 200.0);
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng);
    const double y = u(rng);
    const double ex = u(rng);
    const double ey = u(rng);
    const Tube t{0, 12, {x, y, x + 10, y + 20}, {ex, ey, ex + 30, ey + 5}};
    for (int k = 1; k + 1 < t.length; ++k) {
      const auto prev = interpolate_tube(t, k - 1).coords();
      const auto cur = interpolate_tube(t, k).coords();
      const auto next = interpolate_tube(t, k + 1).coords();
      for (int c = 0; c < 4; ++c) CHECK(std::abs(prev[c] - 2 * cur[c] + next[c]) <= 1e-9);
    }
  }
}

TEST_CASE("fit_linear_tube") {
  const Chunk chunk{"v", 0, 3};
  SUBCASE("closed form least squares") {
    const std::vector<TrackEntry> e{{0, {0, 0, 20, 20}}, {1, {0, 0, 20, 20}}, {2, {9, 0, 20, 20}}};
    const auto fit = fit_linear_tube(e, chunk);
    CHECK(fit.tube.start.x1 == doctest::Approx(-1.5));
    CHECK(fit.tube.end.x1 == doctest::Approx(7.5));
    CHECK(fit.tube.start.x2 == doctest::Approx(20.0));
    CHECK(fit.coverage == 1.0);
    CHECK(fit.max_residual == doctest::Approx(3.0));
  }
  SUBCASE("constant track is static") {
    const std::vector<TrackEntry> e{{0, {1, 2, 3, 4}}, {1, {1, 2, 3, 4}}, {2, {1, 2, 3, 4}}};
    const auto fit = fit_linear_tube(e, chunk);
    CHECK(fit.tube.static_motion());
    CHECK(fit.max_residual == 0.0);
  }
  SUBCASE("single entry") {
    const std::vector<TrackEntry> e{{7, {1, 2, 3, 4}}};
    const auto fit = fit_linear_tube(e, Chunk{"v", 5, 10});
    CHECK(fit.tube.start == Box{1, 2, 3, 4});
    CHECK(fit.tube.end == Box{1, 2, 3, 4});
    CHECK(fit.tube.t0 == 5);
    CHECK(fit.coverage == doctest::Approx(0.1));
  }
  SUBCASE("errors") {
    const std::vector<TrackEntry> e{{20, {1, 2, 3, 4}}};
    CHECK_THROWS_AS(fit_linear_tube(e, chunk), std::invalid_argument);
    const std::vector<TrackEntry> unordered{{1, {1, 2, 3, 4}}, {0, {1, 2, 3, 4}}};
    CHECK_THROWS_AS(fit_linear_tube(unordered, chunk), std::invalid_argument);
  }
}

TEST_CASE("fit_linear_tube recovers interpolated tubes") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, 300.0);
  std::uniform_int_distribution<int> len(2, 16);
  for (int i = 0; i < 300; ++i) {
    const int length = len(rng);
    const double x = u(rng);
    const double y = u(rng);
    const double ex = u(rng);
    const double ey = u(rng);
    const Tube tube{7, length, {x, y, x + 15, y + 25}, {ex, ey, ex + 40, ey + 12}};
    std::vector<TrackEntry> entries;
    for (int k = 0; k < length; ++k) entries.push_back({7 + k, interpolate_tube(tube, k)});
    const auto fit = fit_linear_tube(entries, Chunk{"v", 7, length});
    for (int c = 0; c < 4; ++c) {
      CHECK(std::abs(fit.tube.start.coords()[c] - tube.start.coords()[c]) <= 1e-9);
      CHECK(std::abs(fit.tube.end.coords()[c] - tube.end.coords()[c]) <= 1e-9);
    }
    CHECK(fit.max_residual <= 1e-9);
  }
}

TEST_CASE("partial coverage fits the covered frames") {
  const Tube truth{0, 10, {10, 10, 30, 30}, {19, 10, 39, 30}};
  std::vector<TrackEntry> entries;
  for (int k = 4; k < 10; ++k) entries.push_back({k, interpolate_tube(truth, k)});
  const auto fit = fit_linear_tube(entries, Chunk{"v", 0, 10});
  CHECK(fit.coverage == doctest::Approx(0.6));
  CHECK(fit.tube.start.x1 == doctest::Approx(10.0));
  CHECK(fit.tube.end.x1 == doctest::Approx(19.0));
}

TEST_CASE("clip_tube") {
  const Tube inside{0, 5, {1, 1, 5, 5}, {2, 2, 6, 6}};
  CHECK(clip_tube(inside, 100, 100) == inside);
  const Tube right{0, 5, {1, 1, 5, 5}, {90, 0, 110, 10}};
  CHECK(clip_tube(right, 100, 100).end == Box{90, 0, 100, 10});
  const Tube negative{0, 5, {-20, -20, -10, -10}, {-30, -5, -25, -1}};
  CHECK_THROWS_AS(clip_tube(negative, 100, 100), OutsideFrameError);
  CHECK_THROWS_AS(clip_box(Box{0, 0, 1, 1}, 0, 10), std::invalid_argument);
}
