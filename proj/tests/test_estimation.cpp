#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "relloc/estimation.hpp"
#include "relloc/rng.hpp"

using namespace relloc;

namespace {

LabeledPoint pole(double x, double y, std::int64_t id = kNoSourceId) {
  return {{x, y}, PointClass::Pole, id};
}

KeypointSet set_of(std::vector<LabeledPoint> pts, std::string frame = "ego") {
  KeypointSet s;
  s.frame_id = "t";
  s.frame = std::move(frame);
  s.points = std::move(pts);
  return s;
}

// Anchor-rich scene in an annulus around the origin.
KeypointSet random_scene(Rng& rng, int n_anchors, int n_planar, double r_min = 8.0,
                         double r_max = 30.0) {
  KeypointSet s = set_of({});
  for (int i = 0; i < n_anchors; ++i) {
    const double r = rng.uniform(r_min, r_max);
    const double a = rng.uniform(0.0, 2.0 * kPi);
    const PointClass cls = (i % 3 == 0) ? PointClass::VehicleCenter : PointClass::Pole;
    s.points.push_back({{r * std::cos(a), r * std::sin(a)}, cls, static_cast<std::int64_t>(i)});
  }
  for (int i = 0; i < n_planar; ++i) {
    const double r = rng.uniform(r_min, r_max + 5.0);
    const double a = rng.uniform(0.0, 2.0 * kPi);
    s.points.push_back({{r * std::cos(a), r * std::sin(a)}, PointClass::Planar,
                        static_cast<std::int64_t>(1000 + i)});
  }
  return s;
}

double fit_ssr(std::span<const PointPair> pairs, double dtheta) {
  Point2 a_mean{0, 0}, b_mean{0, 0};
  for (const auto& p : pairs) {
    a_mean += p.a;
    b_mean += p.b;
  }
  a_mean /= static_cast<double>(pairs.size());
  b_mean /= static_cast<double>(pairs.size());
  const double c = std::cos(dtheta), s = std::sin(dtheta);
  const Point2 t = b_mean - Point2{c * a_mean.x() - s * a_mean.y(),
                                   s * a_mean.x() + c * a_mean.y()};
  double ssr = 0.0;
  for (const auto& p : pairs) {
    const Point2 moved{c * p.a.x() - s * p.a.y() + t.x(), s * p.a.x() + c * p.a.y() + t.y()};
    ssr += (moved - p.b).squaredNorm();
  }
  return ssr;
}

} // namespace

TEST_CASE("closed-form rigid fit") {
  SUBCASE("identity pairs") {
    const PointPair pairs[] = {{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}};
    const Transform2D t = fit_rigid_transform(pairs);
    CHECK(t.dtheta == doctest::Approx(0.0));
    CHECK(t.dx == doctest::Approx(0.0));
    CHECK(t.dy == doctest::Approx(0.0));
  }
  SUBCASE("pure translation") {
    const PointPair pairs[] = {{{0, 0}, {2, 3}}, {{1, 0}, {3, 3}}};
    const Transform2D t = fit_rigid_transform(pairs);
    CHECK(t.dtheta == doctest::Approx(0.0));
    CHECK(t.dx == doctest::Approx(2.0));
    CHECK(t.dy == doctest::Approx(3.0));
  }
  SUBCASE("pure quarter rotation") {
    // hand evaluation: Sxx = 0.5, Syy = -0.5, Sxy = 0.5, Syx = -0.5
    // => dtheta = atan2(1, 0) = 90 deg, zero translation
    const PointPair pairs[] = {{{1, 0}, {0, 1}}, {{0, 1}, {-1, 0}}};
    const Transform2D t = fit_rigid_transform(pairs);
    CHECK(rad2deg(t.dtheta) == doctest::Approx(90.0));
    CHECK(t.dx == doctest::Approx(0.0));
    CHECK(t.dy == doctest::Approx(0.0));
  }
  SUBCASE("degenerate inputs") {
    CHECK_THROWS_AS(fit_rigid_transform({}), DegenerateGeometryError);
    const PointPair one[] = {{{1, 2}, {3, 4}}};
    CHECK_THROWS_AS(fit_rigid_transform(std::span<const PointPair>(one, 1)),
                    DegenerateGeometryError);
    const PointPair coincident[] = {{{1, 1}, {0, 0}}, {{1, 1}, {2, 2}}, {{1, 1}, {5, 0}}};
    CHECK_THROWS_AS(fit_rigid_transform(coincident), DegenerateGeometryError);
  }
  SUBCASE("exact recovery of random rigid transforms") {
    Rng rng(51);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const Transform2D truth = oracles::random_transform(rng);
      const int n = 2 + static_cast<int>(rng.uniform_index(8));
      std::vector<PointPair> pairs;
      for (int i = 0; i < n; ++i) {
        const Point2 a{rng.uniform(-30, 30), rng.uniform(-30, 30)};
        pairs.push_back({a, apply(truth, a)});
      }
      if ((pairs[0].a - pairs[1].a).norm() < 1e-6) {
        continue;
      }
      const Transform2D got = fit_rigid_transform(pairs);
      worst = std::max(worst, std::abs(wrap_angle(got.dtheta - truth.dtheta)));
      worst = std::max(worst, std::abs(got.dx - truth.dx));
      worst = std::max(worst, std::abs(got.dy - truth.dy));
    }
    CHECK(worst < 1e-9);
  }
  SUBCASE("returned rotation is a local optimum of the squared residuals") {
    Rng rng(52);
    for (int trial = 0; trial < 100; ++trial) {
      const Transform2D truth = oracles::random_transform(rng);
      std::vector<PointPair> pairs;
      for (int i = 0; i < 12; ++i) {
        const Point2 a{rng.uniform(-20, 20), rng.uniform(-20, 20)};
        const Point2 noise{rng.gaussian(0, 0.3), rng.gaussian(0, 0.3)};
        pairs.push_back({a, apply(truth, a) + noise});
      }
      const Transform2D got = fit_rigid_transform(pairs);
      const double here = fit_ssr(pairs, got.dtheta);
      CHECK(here <= fit_ssr(pairs, got.dtheta + deg2rad(0.1)) + 1e-12);
      CHECK(here <= fit_ssr(pairs, got.dtheta - deg2rad(0.1)) + 1e-12);
    }
  }
}

TEST_CASE("ransac correction") {
  RansacParams params;
  params.match.epsilon1 = epsilon1_from_noise(2.58, 40.0, 4.0);
  params.rng_seed = 99;

  SUBCASE("identical sets recover the identity") {
    Rng rng(53);
    const KeypointSet ego = random_scene(rng, 12, 20);
    params.n_ransac = 50;
    const CorrectionResult res = ransac_correct(ego, ego, params);
    CHECK(res.n_cons == static_cast<int>(ego.points.size()));
    CHECK(std::abs(res.transform.dtheta) < 1e-6);
    CHECK(std::abs(res.transform.dx) < 1e-6);
    CHECK(std::abs(res.transform.dy) < 1e-6);
  }
  SUBCASE("no overlapping anchors yields the identity signal") {
    const KeypointSet ego = set_of({pole(0, 0), pole(5, 0)});
    const KeypointSet coop = set_of({pole(100, 100), pole(105, 100)});
    const CorrectionResult res = ransac_correct(ego, coop, params);
    CHECK(res.n_cons == 0);
    CHECK(res.iterations_run == 0);
    CHECK(res.transform.dtheta == 0.0);
    CHECK(res.transform.dx == 0.0);
    CHECK(res.correspondences.empty());
  }
  SUBCASE("a single anchor cannot be corrected") {
    const KeypointSet ego = set_of({pole(0, 0)});
    const KeypointSet coop = set_of({pole(0.2, 0)});
    const CorrectionResult res = ransac_correct(ego, coop, params);
    CHECK(res.iterations_run == 0);
    CHECK(res.transform.dx == 0.0);
  }
  SUBCASE("two matched anchors refine from exactly two pairs") {
    const KeypointSet ego = set_of({pole(0, 0), pole(10, 0)});
    const KeypointSet coop = set_of({pole(0.4, 0.1), pole(10.4, 0.1)});
    params.n_ransac = 10;
    const CorrectionResult res = ransac_correct(ego, coop, params);
    CHECK(res.n_cons == 2);
    REQUIRE(res.correspondences.size() == 2);
    CHECK(res.transform.dx == doctest::Approx(-0.4).epsilon(1e-9));
    CHECK(res.transform.dy == doctest::Approx(-0.1).epsilon(1e-9));
  }
  SUBCASE("recovers an injected relative error") {
    Rng rng(54);
    int hits = 0;
    for (int trial = 0; trial < 20; ++trial) {
      KeypointSet ego = random_scene(rng, 15, 30);
      const Transform2D injected(deg2rad(6.0), 1.2, -0.8);
      KeypointSet coop = transform_set(ego, injected, "ego");
      for (auto& p : coop.points) {
        p.position += Point2{rng.gaussian(0, 0.02), rng.gaussian(0, 0.02)};
      }
      params.n_ransac = 30;
      params.rng_seed = derive_seed(7, trial);
      const CorrectionResult res = ransac_correct(ego, coop, params);
      const Transform2D expected = inverse(injected);
      if (oracles::transform_close(res.transform, expected, 0.05, deg2rad(0.1))) {
        ++hits;
      }

      // rigidity of the returned correction
      for (std::size_t i = 1; i < std::min<std::size_t>(coop.points.size(), 6); ++i) {
        const double before = (coop.points[i].position - coop.points[0].position).norm();
        const double after = (apply(res.transform, coop.points[i].position) -
                              apply(res.transform, coop.points[0].position))
                                 .norm();
        CHECK(std::abs(before - after) < 1e-10);
      }
    }
    // 30 iterations leave a small failure probability per trial
    CHECK(hits >= 18);
  }
  SUBCASE("exhaustive iterations saturate the consensus") {
    Rng rng(55);
    const KeypointSet ego = random_scene(rng, 10, 0, 10.0, 28.0);
    params.n_ransac = 1000000;
    const CorrectionResult res = ransac_correct(ego, ego, params);
    CHECK(res.n_cons == static_cast<int>(ego.points.size()));
  }
  SUBCASE("deterministic for a fixed seed") {
    Rng rng(56);
    KeypointSet ego = random_scene(rng, 12, 15);
    const Transform2D injected(deg2rad(-3.0), 0.7, 0.4);
    const KeypointSet coop = transform_set(ego, injected, "ego");
    params.n_ransac = 25;
    params.rng_seed = 1234;
    const CorrectionResult a = ransac_correct(ego, coop, params);
    const CorrectionResult b = ransac_correct(ego, coop, params);
    CHECK(a.transform.dtheta == b.transform.dtheta);
    CHECK(a.transform.dx == b.transform.dx);
    CHECK(a.transform.dy == b.transform.dy);
    CHECK(a.n_cons == b.n_cons);
    CHECK(a.iterations_run == b.iterations_run);
    CHECK(a.correspondences.size() == b.correspondences.size());
  }
  SUBCASE("rejects a non-positive iteration budget") {
    params.n_ransac = 0;
    CHECK_THROWS_AS(ransac_correct(set_of({}), set_of({}), params), std::invalid_argument);
  }
}

TEST_CASE("grid search baseline") {
  SUBCASE("zero error picks the identity cell") {
    Rng rng(61);
    const KeypointSet ego = random_scene(rng, 8, 0, 15.0, 25.0);
    GridSearchParams params;
    params.x_span = 1.0;
    params.y_span = 1.0;
    params.theta_span_deg = 2.0;
    params.xy_res = 0.1;
    params.theta_res_deg = 0.5;
    const CorrectionResult res = grid_search_correct(ego, ego, params);
    CHECK(res.transform.dtheta == doctest::Approx(0.0));
    CHECK(res.transform.dx == doctest::Approx(0.0));
    CHECK(res.transform.dy == doctest::Approx(0.0));
    CHECK(res.n_cons == static_cast<int>(ego.points.size()));
    CHECK(res.iterations_run == 10 * 10 * 4);
  }
  SUBCASE("injected error found within one resolution step") {
    Rng rng(62);
    const KeypointSet ego = random_scene(rng, 10, 0, 15.0, 25.0);
    const Transform2D truth(deg2rad(1.0), 0.3, -0.2);
    const KeypointSet coop = transform_set(ego, inverse(truth), "ego");
    GridSearchParams params;
    params.x_span = 2.0;
    params.y_span = 2.0;
    params.theta_span_deg = 4.0;
    params.xy_res = 0.1;
    params.theta_res_deg = 0.5;
    params.epsilon2 = 0.12;
    const CorrectionResult res = grid_search_correct(ego, coop, params);
    CHECK(std::abs(res.transform.dx - truth.dx) <= 0.1 + 1e-9);
    CHECK(std::abs(res.transform.dy - truth.dy) <= 0.1 + 1e-9);
    CHECK(std::abs(rad2deg(res.transform.dtheta) - 1.0) <= 0.5 + 1e-9);
    CHECK(res.n_cons == static_cast<int>(ego.points.size()));
  }
  SUBCASE("oversized grids are rejected") {
    GridSearchParams params;
    params.x_span = 12.0;
    params.y_span = 12.0;
    params.theta_span_deg = 10.0;
    params.xy_res = 0.1;
    params.theta_res_deg = 0.1; // 120 x 120 x 100 cells
    CHECK_THROWS_AS(grid_search_correct(set_of({pole(0, 0)}), set_of({pole(0, 0)}), params),
                    GridBudgetError);
  }
}
