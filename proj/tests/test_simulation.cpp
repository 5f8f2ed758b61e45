#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <unordered_map>

#include "oracles.hpp"
#include "relloc/estimation.hpp"
#include "relloc/experiments.hpp"
#include "relloc/simulation.hpp"

using namespace relloc;

namespace {

ScenarioConfig noiseless_config() {
  ScenarioConfig cfg;
  cfg.detection_noise_sigma = {0.0, 0.0, 0.0};
  cfg.detection_prob = {1.0, 1.0, 1.0};
  cfg.pose_noise = PoseNoise(0.0, 0.0);
  return cfg;
}

Point2 local_to_global(const Pose2D& observer, const Point2& local) {
  const double c = std::cos(observer.theta);
  const double s = std::sin(observer.theta);
  return {observer.x + c * local.x() - s * local.y(),
          observer.y + s * local.x() + c * local.y()};
}

} // namespace

TEST_CASE("world generation") {
  const WorldConfig cfg;
  SUBCASE("deterministic per seed") {
    const WorldScene a = generate_world(cfg, 7);
    const WorldScene b = generate_world(cfg, 7);
    REQUIRE(a.vehicles.size() == b.vehicles.size());
    REQUIRE(a.poles.size() == b.poles.size());
    REQUIRE(a.facades.size() == b.facades.size());
    for (std::size_t i = 0; i < a.vehicles.size(); ++i) {
      CHECK(a.vehicles[i].pose.x == b.vehicles[i].pose.x);
      CHECK(a.vehicles[i].pose.y == b.vehicles[i].pose.y);
      CHECK(a.vehicles[i].pose.theta == b.vehicles[i].pose.theta);
    }
    for (std::size_t i = 0; i < a.poles.size(); ++i) {
      CHECK(a.poles[i] == b.poles[i]);
    }
    const WorldScene c = generate_world(cfg, 8);
    CHECK(a.vehicles[0].pose.x != c.vehicles[0].pose.x);
  }
  SUBCASE("zero vehicles leaves the static scene") {
    WorldConfig no_vehicles = cfg;
    no_vehicles.n_vehicles = 0;
    const WorldScene w = generate_world(no_vehicles, 3);
    CHECK(w.vehicles.empty());
    CHECK(w.poles.size() > 10);
    CHECK(w.facades.size() >= 4);
  }
  SUBCASE("crowded requests never overlap") {
    WorldConfig crowded = cfg;
    crowded.extent = 70.0;
    crowded.n_vehicles = 20;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const WorldScene w = generate_world(crowded, seed);
      CHECK(w.vehicles_requested == 20);
      CHECK(w.vehicles.size() <= 20);
      CHECK(w.vehicles.size() >= 4);
      for (std::size_t i = 0; i < w.vehicles.size(); ++i) {
        for (std::size_t j = i + 1; j < w.vehicles.size(); ++j) {
          CHECK(!oracles::obb_overlap(w.vehicles[i], w.vehicles[j]));
        }
      }
    }
  }
  SUBCASE("objects stay inside the extent") {
    const WorldScene w = generate_world(cfg, 11);
    const double half = cfg.extent / 2.0;
    for (const auto& p : w.poles) {
      CHECK(std::abs(p.x()) <= half);
      CHECK(std::abs(p.y()) <= half);
    }
    for (const auto& v : w.vehicles) {
      CHECK(std::abs(v.pose.x) <= half);
      CHECK(std::abs(v.pose.y) <= half);
    }
  }
}

TEST_CASE("observation model") {
  SUBCASE("pole at the observer position appears at the local origin") {
    WorldScene w;
    w.poles.push_back({12.0, -3.0});
    ScenarioConfig cfg = noiseless_config();
    Rng rng(1);
    const KeypointSet obs = observe(w, Pose2D(12.0, -3.0, 0.7), cfg, rng);
    REQUIRE(obs.points.size() == 1);
    CHECK(obs.points[0].cls == PointClass::Pole);
    CHECK(std::abs(obs.points[0].position.x()) < 1e-12);
    CHECK(std::abs(obs.points[0].position.y()) < 1e-12);
  }
  SUBCASE("objects beyond the communication range are never observed") {
    WorldScene w;
    w.poles.push_back({41.0, 0.0});
    ScenarioConfig cfg = noiseless_config();
    Rng rng(2);
    const KeypointSet obs = observe(w, Pose2D(0, 0, 0), cfg, rng);
    CHECK(obs.points.empty());
  }
  SUBCASE("the observer never sees itself") {
    WorldScene w;
    w.vehicles.push_back({4, Pose2D(0, 0, 0), 4.5, 2.0});
    w.vehicles.push_back({5, Pose2D(8, 0, 0), 4.5, 2.0});
    ScenarioConfig cfg = noiseless_config();
    Rng rng(3);
    const KeypointSet obs = observe(w, w.vehicles[0].pose, cfg, rng, 4);
    REQUIRE(obs.points.size() == 1);
    CHECK(obs.points[0].source_id == vehicle_source_id(5));
  }
  SUBCASE("two observers agree in the global frame via source ids") {
    const WorldScene w = generate_world(WorldConfig{}, 21);
    REQUIRE(w.vehicles.size() >= 2);
    ScenarioConfig cfg = noiseless_config();
    Rng rng(4);
    const Pose2D pa = w.vehicles[0].pose;
    const Pose2D pb = w.vehicles[1].pose;
    const KeypointSet oa = observe(w, pa, cfg, rng, w.vehicles[0].id);
    const KeypointSet ob = observe(w, pb, cfg, rng, w.vehicles[1].id);
    std::unordered_map<std::int64_t, Point2> globals;
    for (const auto& p : oa.points) {
      if (is_anchor(p.cls)) {
        globals[p.source_id] = local_to_global(pa, p.position);
      }
    }
    int shared = 0;
    for (const auto& p : ob.points) {
      if (!is_anchor(p.cls)) {
        continue;
      }
      const auto it = globals.find(p.source_id);
      if (it != globals.end()) {
        ++shared;
        CHECK((local_to_global(pb, p.position) - it->second).norm() < 1e-9);
      }
    }
    CHECK(shared >= 5);
    CHECK(shared == count_shared_anchors(oa, ob));
  }
  SUBCASE("planar observations are capped at n_f") {
    const WorldScene w = generate_world(WorldConfig{}, 22);
    ScenarioConfig cfg = noiseless_config();
    cfg.n_f = 17;
    Rng rng(5);
    const KeypointSet obs = observe(w, Pose2D(0, 0, 0), cfg, rng);
    std::size_t planar = 0;
    for (const auto& p : obs.points) {
      planar += p.cls == PointClass::Planar;
    }
    CHECK(planar == 17);
  }
}

TEST_CASE("pose error injection") {
  SUBCASE("zero sigmas keep the pose") {
    Rng rng(6);
    const Pose2D p(3, 4, 0.5);
    const Pose2D q = inject_pose_error(p, PoseNoise(0, 0), rng);
    CHECK(q.x == p.x);
    CHECK(q.y == p.y);
    CHECK(q.theta == p.theta);
  }
  SUBCASE("sample statistics match the configured sigmas") {
    Rng rng(7);
    const Pose2D p(0, 0, 0);
    const PoseNoise noise(0.4, 4.0);
    const int n = 100000;
    double sum_x = 0, sum_x2 = 0, sum_r2 = 0;
    for (int i = 0; i < n; ++i) {
      const Pose2D q = inject_pose_error(p, noise, rng);
      sum_x += q.x;
      sum_x2 += q.x * q.x;
      sum_r2 += rad2deg(q.theta) * rad2deg(q.theta);
    }
    const double mean = sum_x / n;
    const double std_x = std::sqrt(sum_x2 / n - mean * mean);
    const double std_r = std::sqrt(sum_r2 / n);
    CHECK(std::abs(mean) < 0.01);
    CHECK(std_x == doctest::Approx(0.4).epsilon(0.01 / 0.4));
    CHECK(std_r == doctest::Approx(4.0).epsilon(0.01));
  }
}

TEST_CASE("sample pair construction") {
  ScenarioConfig cfg = noiseless_config();
  cfg.pose_noise = PoseNoise(0.4, 4.0);

  SUBCASE("two vehicles in range give one pair") {
    WorldScene w;
    w.vehicles.push_back({0, Pose2D(0, 0, 0), 4.5, 2.0});
    w.vehicles.push_back({1, Pose2D(10, 0, 0), 4.5, 2.0});
    Rng rng(8);
    const auto pairs = make_sample_pairs(w, cfg, rng);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].ego_id == 0);
    CHECK(pairs[0].coop_id == 1);
  }
  SUBCASE("partners are capped nearest-first") {
    WorldScene w;
    w.vehicles.push_back({0, Pose2D(0, 0, 0), 4.5, 2.0});
    for (int i = 1; i <= 8; ++i) {
      w.vehicles.push_back({i, Pose2D(4.0 * i, 0, 0), 4.5, 2.0});
    }
    Rng rng(9);
    const auto pairs = make_sample_pairs(w, cfg, rng);
    REQUIRE(pairs.size() == 5);
    for (int i = 0; i < 5; ++i) {
      CHECK(pairs[i].coop_id == i + 1);
    }
  }
  SUBCASE("no partner in range") {
    WorldScene w;
    w.vehicles.push_back({0, Pose2D(0, 0, 0), 4.5, 2.0});
    w.vehicles.push_back({1, Pose2D(100, 0, 0), 4.5, 2.0});
    Rng rng(10);
    CHECK(make_sample_pairs(w, cfg, rng).empty());
  }
  SUBCASE("stored ground truth is recomputable from the poses") {
    const WorldScene w = generate_world(WorldConfig{}, 31);
    Rng rng(11);
    const auto pairs = make_sample_pairs(w, cfg, rng);
    REQUIRE(!pairs.empty());
    for (const auto& pair : pairs) {
      const Transform2D again =
          ground_truth_correction(pair.ego_true, pair.coop_true, pair.ego_err, pair.coop_err);
      CHECK(std::abs(wrap_angle(again.dtheta - pair.gt_correction.dtheta)) < 1e-12);
      CHECK(std::abs(again.dx - pair.gt_correction.dx) < 1e-12);
      const Transform2D lhs =
          compose(pair.gt_correction, erroneous_relative_transform(pair.ego_err, pair.coop_err));
      const Transform2D rhs = erroneous_relative_transform(pair.ego_true, pair.coop_true);
      CHECK(std::abs(lhs.dx - rhs.dx) < 1e-10);
      CHECK(std::abs(lhs.dy - rhs.dy) < 1e-10);
      CHECK(std::abs(wrap_angle(lhs.dtheta - rhs.dtheta)) < 1e-10);
    }
  }
}

TEST_CASE("noise-free pipeline recovers the exact correction") {
  ScenarioConfig cfg = noiseless_config();
  cfg.pose_noise = PoseNoise(0.4, 4.0);

  int tested = 0;
  for (std::uint64_t seed = 100; seed < 108; ++seed) {
    const WorldScene w = generate_world(WorldConfig{}, seed);
    Rng rng(derive_seed(1, seed));
    for (const auto& pair : make_sample_pairs(w, cfg, rng)) {
      if (pair.shared_anchors < 3) {
        continue;
      }
      ++tested;
      RansacParams params;
      params.n_ransac = 1000000; // exhaustive
      params.match.epsilon1 = epsilon1_from_noise(2.58, cfg.r_c, cfg.pose_noise.sigma_r);
      params.rng_seed = derive_seed(2, seed, tested);
      const CorrectionResult res = correct_sample_pair(pair, params);
      CHECK(std::abs(res.transform.dx - pair.gt_correction.dx) < 1e-3);
      CHECK(std::abs(res.transform.dy - pair.gt_correction.dy) < 1e-3);
      CHECK(std::abs(rad2deg(wrap_angle(res.transform.dtheta - pair.gt_correction.dtheta))) <
            1e-3);
    }
  }
  CHECK(tested >= 10);
}

TEST_CASE("exhaustive consensus equals the shared-anchor count on anchor-only scenes") {
  ScenarioConfig cfg = noiseless_config();
  cfg.detection_prob.planar = 0.0; // anchors only
  cfg.pose_noise = PoseNoise(0.3, 3.0);

  int tested = 0;
  for (std::uint64_t seed = 200; seed < 206; ++seed) {
    const WorldScene w = generate_world(WorldConfig{}, seed);
    Rng rng(derive_seed(3, seed));
    for (const auto& pair : make_sample_pairs(w, cfg, rng)) {
      if (pair.shared_anchors < 3) {
        continue;
      }
      ++tested;
      RansacParams params;
      params.n_ransac = 1000000;
      params.match.epsilon1 = epsilon1_from_noise(2.58, cfg.r_c, cfg.pose_noise.sigma_r);
      params.rng_seed = derive_seed(4, seed, tested);
      const CorrectionResult res = correct_sample_pair(pair, params);
      CHECK(res.n_cons == pair.shared_anchors);
    }
  }
  CHECK(tested >= 8);
}

TEST_CASE("true relative transform overlays shared objects within noise bounds") {
  ScenarioConfig cfg;
  cfg.detection_prob = {1.0, 1.0, 1.0};
  const WorldScene w = generate_world(WorldConfig{}, 41);
  REQUIRE(w.vehicles.size() >= 2);
  Rng rng(12);
  const KeypointSet ego_obs = observe(w, w.vehicles[0].pose, cfg, rng, w.vehicles[0].id);
  const KeypointSet coop_obs = observe(w, w.vehicles[1].pose, cfg, rng, w.vehicles[1].id);
  const Transform2D t_true =
      erroneous_relative_transform(w.vehicles[0].pose, w.vehicles[1].pose);
  const KeypointSet coop_in_ego = transform_set(coop_obs, t_true, "ego");

  std::unordered_map<std::int64_t, Point2> ego_by_id;
  for (const auto& p : ego_obs.points) {
    if (is_anchor(p.cls)) {
      ego_by_id[p.source_id] = p.position;
    }
  }
  int shared = 0, within_3sigma = 0;
  for (const auto& p : coop_in_ego.points) {
    if (!is_anchor(p.cls)) {
      continue;
    }
    const auto it = ego_by_id.find(p.source_id);
    if (it == ego_by_id.end()) {
      continue;
    }
    ++shared;
    const double sigma = cfg.detection_noise_sigma.of(p.cls);
    const double dev = (p.position - it->second).norm();
    CHECK(dev < 6.0 * sigma * std::sqrt(2.0));
    within_3sigma += dev < 3.0 * sigma * std::sqrt(2.0);
  }
  CHECK(shared >= 5);
  CHECK(within_3sigma >= (shared * 9) / 10);
}
