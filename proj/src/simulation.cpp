#include "relloc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace relloc {

std::int64_t vehicle_source_id(int vehicle_id) {
  return static_cast<std::int64_t>(vehicle_id);
}

std::int64_t pole_source_id(std::size_t pole_index) {
  return 100000 + static_cast<std::int64_t>(pole_index);
}

std::int64_t facade_source_id(std::size_t segment_index, std::size_t point_index) {
  return 1000000 + static_cast<std::int64_t>(segment_index) * 10000 +
         static_cast<std::int64_t>(point_index);
}

std::vector<Point2> facade_points(const FacadeSegment& segment) {
  std::vector<Point2> out;
  const Point2 delta = segment.p2 - segment.p1;
  const double length = delta.norm();
  if (length == 0.0 || segment.point_spacing <= 0.0) {
    out.push_back(segment.p1);
    return out;
  }
  const auto n = static_cast<std::size_t>(std::floor(length / segment.point_spacing + 1e-9)) + 1;
  const Point2 dir = delta / length;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(segment.p1 + dir * (static_cast<double>(k) * segment.point_spacing));
  }
  return out;
}

namespace {

Point2 to_local(const Pose2D& observer, const Point2& world) {
  const double c = std::cos(-observer.theta);
  const double s = std::sin(-observer.theta);
  const Point2 d = world - observer.position();
  return {c * d.x() - s * d.y(), s * d.x() + c * d.y()};
}

struct Corridor {
  bool east_west; // axis along x when true, along y otherwise
};

Point2 corridor_point(const Corridor& road, double along, double across) {
  return road.east_west ? Point2{along, across} : Point2{across, along};
}

bool vehicles_too_close(const VehicleBox& a, const VehicleBox& b) {
  // Lane-aligned placement keeps the real footprints separated once the
  // center distance clears the vehicle length plus a margin.
  return (a.pose.position() - b.pose.position()).norm() < a.length + 1.5;
}

} // namespace

WorldScene generate_world(const WorldConfig& config, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  WorldScene world;
  world.extent = config.extent;
  world.vehicles_requested = config.n_vehicles;

  const double half_extent = config.extent / 2.0;
  const double half_road = config.road_half_width;
  const Corridor roads[2] = {{true}, {false}};

  // Poles along both edges of both corridors, skipping the junction box.
  for (const Corridor& road : roads) {
    for (const double side : {-1.0, 1.0}) {
      const double across = side * (half_road + 0.5);
      double along = -half_extent + 2.0;
      while (along < half_extent - 2.0) {
        const double jittered = along + rng.uniform(-config.pole_jitter, config.pole_jitter);
        if (std::abs(jittered) > half_road + 1.5 && std::abs(jittered) < half_extent - 1.0) {
          world.poles.push_back(corridor_point(road, jittered, across));
        }
        along += config.pole_spacing;
      }
    }
  }

  // Facade segments along the building lines, split into pieces with gaps.
  for (const Corridor& road : roads) {
    for (const double side : {-1.0, 1.0}) {
      const double across = side * config.building_line;
      for (const double sign : {-1.0, 1.0}) {
        double along = sign > 0 ? config.building_line + 2.0 : -half_extent + 4.0;
        const double stop = sign > 0 ? half_extent - 4.0 : -config.building_line - 2.0;
        while (along < stop) {
          const double len = rng.uniform(10.0, 22.0);
          const double end = std::min(along + len, stop);
          if (end - along > 4.0) {
            world.facades.push_back({corridor_point(road, along, across),
                                     corridor_point(road, end, across),
                                     config.facade_point_spacing});
          }
          along = end + rng.uniform(3.0, 7.0);
        }
      }
    }
  }

  // Lane-aligned vehicles outside the junction box, rejection-sampled
  // against the already-placed ones.
  const double lane_offsets[4] = {-half_road + 1.75, -1.75, 1.75, half_road - 1.75};
  int placed = 0;
  for (int v = 0; v < config.n_vehicles; ++v) {
    bool ok = false;
    for (int attempt = 0; attempt < 60 && !ok; ++attempt) {
      const Corridor& road = roads[rng.uniform_index(2)];
      const double lane = lane_offsets[rng.uniform_index(4)];
      const double along = rng.uniform(-half_extent + 6.0, half_extent - 6.0);
      if (std::abs(along) < half_road + 5.0) {
        continue; // keep the junction box clear so crossing roads never collide
      }
      double heading = road.east_west ? 0.0 : kPi / 2.0;
      if (lane > 0.0) {
        heading = wrap_angle(heading + kPi);
      }
      heading = wrap_angle(heading + deg2rad(rng.gaussian(0.0, config.heading_jitter_deg)));
      VehicleBox candidate{placed, Pose2D(corridor_point(road, along, lane).x(),
                                          corridor_point(road, along, lane).y(), heading),
                           4.5, 2.0};
      ok = true;
      for (const auto& other : world.vehicles) {
        if (vehicles_too_close(candidate, other)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        world.vehicles.push_back(candidate);
        ++placed;
      }
    }
  }
  return world;
}

KeypointSet observe(const WorldScene& world, const Pose2D& observer_pose,
                    const ScenarioConfig& config, Rng& rng, int observer_id) {
  KeypointSet out;
  out.observer = observer_id;
  out.frame = "observer-local";

  const Point2 origin = observer_pose.position();
  const auto in_range = [&](const Point2& p) { return (p - origin).norm() <= config.r_c; };

  for (const auto& vehicle : world.vehicles) {
    if (vehicle.id == observer_id) {
      continue;
    }
    const Point2 center = vehicle.pose.position();
    if (!in_range(center)) {
      continue;
    }
    if (rng.uniform() >= config.detection_prob.vehicle_center) {
      continue;
    }
    const double sigma = config.detection_noise_sigma.vehicle_center;
    const Point2 noisy = center + Point2{rng.gaussian(0.0, sigma), rng.gaussian(0.0, sigma)};
    out.points.push_back({to_local(observer_pose, noisy), PointClass::VehicleCenter,
                          vehicle_source_id(vehicle.id)});
  }

  for (std::size_t pi = 0; pi < world.poles.size(); ++pi) {
    const Point2& pole = world.poles[pi];
    if (!in_range(pole)) {
      continue;
    }
    if (rng.uniform() >= config.detection_prob.pole) {
      continue;
    }
    const double sigma = config.detection_noise_sigma.pole;
    const Point2 noisy = pole + Point2{rng.gaussian(0.0, sigma), rng.gaussian(0.0, sigma)};
    out.points.push_back({to_local(observer_pose, noisy), PointClass::Pole, pole_source_id(pi)});
  }

  std::vector<LabeledPoint> planar_raw;
  for (std::size_t si = 0; si < world.facades.size(); ++si) {
    const std::vector<Point2> points = facade_points(world.facades[si]);
    bool any_in_range = false;
    for (const Point2& p : points) {
      if (in_range(p)) {
        any_in_range = true;
        break;
      }
    }
    if (!any_in_range) {
      continue;
    }
    if (rng.uniform() >= config.detection_prob.planar) {
      continue;
    }
    const double sigma = config.detection_noise_sigma.planar;
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (!in_range(points[k])) {
        continue;
      }
      const Point2 noisy = points[k] + Point2{rng.gaussian(0.0, sigma), rng.gaussian(0.0, sigma)};
      planar_raw.push_back({to_local(observer_pose, noisy), PointClass::Planar,
                            facade_source_id(si, k)});
    }
  }
  for (auto& p : fps_downsample(planar_raw, config.n_f)) {
    out.points.push_back(p);
  }
  return out;
}

Pose2D inject_pose_error(const Pose2D& pose, const PoseNoise& noise, Rng& rng) {
  const double ex = rng.gaussian(0.0, noise.sigma_xy);
  const double ey = rng.gaussian(0.0, noise.sigma_xy);
  const double er = deg2rad(rng.gaussian(0.0, noise.sigma_r));
  return {pose.x + ex, pose.y + ey, pose.theta + er};
}

std::vector<SamplePair> make_sample_pairs(const WorldScene& world, const ScenarioConfig& config,
                                          Rng& rng) {
  std::vector<SamplePair> pairs;
  if (world.vehicles.size() < 2) {
    return pairs;
  }

  const auto ego_it = std::min_element(
      world.vehicles.begin(), world.vehicles.end(),
      [](const VehicleBox& a, const VehicleBox& b) { return a.id < b.id; });
  const VehicleBox& ego = *ego_it;

  struct Partner {
    double distance;
    const VehicleBox* vehicle;
  };
  std::vector<Partner> partners;
  for (const auto& v : world.vehicles) {
    if (v.id == ego.id) {
      continue;
    }
    const double d = (v.pose.position() - ego.pose.position()).norm();
    if (d <= config.r_c) {
      partners.push_back({d, &v});
    }
  }
  if (partners.empty()) {
    return pairs;
  }
  std::sort(partners.begin(), partners.end(), [](const Partner& a, const Partner& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.vehicle->id < b.vehicle->id);
  });
  if (partners.size() > static_cast<std::size_t>(config.n_cooperative_max)) {
    partners.resize(static_cast<std::size_t>(config.n_cooperative_max));
  }

  KeypointSet ego_obs = observe(world, ego.pose, config, rng, ego.id);
  const Pose2D ego_err = inject_pose_error(ego.pose, config.pose_noise, rng);

  for (const Partner& partner : partners) {
    const VehicleBox& coop = *partner.vehicle;
    SamplePair pair;
    pair.ego_id = ego.id;
    pair.coop_id = coop.id;
    pair.ego_true = ego.pose;
    pair.coop_true = coop.pose;
    pair.ego_err = ego_err;
    pair.coop_err = inject_pose_error(coop.pose, config.pose_noise, rng);
    pair.ego_obs = ego_obs;
    pair.coop_obs = observe(world, coop.pose, config, rng, coop.id);
    pair.gt_correction = ground_truth_correction(pair.ego_true, pair.coop_true, pair.ego_err,
                                                 pair.coop_err);
    pair.shared_anchors = count_shared_anchors(pair.ego_obs, pair.coop_obs);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

int count_shared_anchors(const KeypointSet& a, const KeypointSet& b) {
  std::unordered_set<std::int64_t> ids;
  for (const auto& p : a.points) {
    if (is_anchor(p.cls) && p.source_id != kNoSourceId) {
      ids.insert(p.source_id);
    }
  }
  int shared = 0;
  std::unordered_set<std::int64_t> counted;
  for (const auto& p : b.points) {
    if (is_anchor(p.cls) && ids.count(p.source_id) && counted.insert(p.source_id).second) {
      ++shared;
    }
  }
  return shared;
}

} // namespace relloc
