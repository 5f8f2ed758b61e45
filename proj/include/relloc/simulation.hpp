#pragma once

#include <cstdint>
#include <vector>

#include "relloc/geometry.hpp"
#include "relloc/keypoints.hpp"
#include "relloc/rng.hpp"

namespace relloc {

struct VehicleBox {
  int id = 0;
  Pose2D pose;
  double length = 4.5; // m
  double width = 2.0;  // m
};

struct FacadeSegment {
  Point2 p1{0.0, 0.0};
  Point2 p2{0.0, 0.0};
  double point_spacing = 0.5; // m, world-frame discretization step
};

// Synthetic junction scene: two crossing road corridors, poles along the road
// edges, facade segments along the building lines, lane-aligned vehicles.
struct WorldScene {
  double extent = 120.0; // side length of the centered bounding box [m]
  std::vector<VehicleBox> vehicles;
  std::vector<Point2> poles;
  std::vector<FacadeSegment> facades;
  int vehicles_requested = 0; // fewer vehicles than requested means placement ran out of room
};

struct WorldConfig {
  double extent = 120.0;
  int n_vehicles = 14;
  double road_half_width = 7.0;       // two lanes per direction
  double pole_spacing = 7.0;          // nominal gap between poles along an edge [m]
  double pole_jitter = 1.2;           // uniform +/- jitter on pole positions [m]
  double building_line = 12.0;        // facade distance from the road axis [m]
  double facade_point_spacing = 0.5;  // m
  double heading_jitter_deg = 2.0;    // vehicle heading jitter around the lane direction
};

// Per-class scalar parameter (noise sigma or detection probability).
struct ClassParams {
  double vehicle_center = 0.0;
  double pole = 0.0;
  double planar = 0.0;

  double of(PointClass c) const {
    switch (c) {
    case PointClass::VehicleCenter:
      return vehicle_center;
    case PointClass::Pole:
      return pole;
    case PointClass::Planar:
      return planar;
    }
    return planar;
  }
};

struct ScenarioConfig {
  double r_c = 40.0;                              // communication/observation range [m]
  int n_f = 50;                                   // planar points kept after downsampling
  ClassParams detection_noise_sigma{0.1, 0.05, 0.05}; // m
  ClassParams detection_prob{0.9, 0.9, 0.9};
  PoseNoise pose_noise{0.4, 4.0};
  int n_cooperative_max = 5;
  std::uint64_t rng_seed = 0;
};

// One ego/cooperative evaluation unit: true and erroneous poses, the two
// local observations, and the exact correction implied by the four poses.
struct SamplePair {
  int ego_id = -1;
  int coop_id = -1;
  Pose2D ego_true;
  Pose2D coop_true;
  Pose2D ego_err;
  Pose2D coop_err;
  KeypointSet ego_obs;  // ego observer-local frame
  KeypointSet coop_obs; // coop observer-local frame
  Transform2D gt_correction;
  int shared_anchors = 0;
};

// Stable world-object identifiers carried through observations as source_id.
std::int64_t vehicle_source_id(int vehicle_id);
std::int64_t pole_source_id(std::size_t pole_index);
std::int64_t facade_source_id(std::size_t segment_index, std::size_t point_index);

// World-frame discretization of a facade segment; deterministic, identical
// for every observer.
std::vector<Point2> facade_points(const FacadeSegment& segment);

WorldScene generate_world(const WorldConfig& config, std::uint64_t rng_seed);

// Simulated detection + segmentation output of one observer. Every world
// object within r_c is included with the per-class detection probability;
// kept points get per-class Gaussian noise; planar points are the facade
// discretizations, range-cut per point and reduced with farthest-point
// sampling to n_f. Coordinates are expressed in the observer frame using the
// TRUE observer pose. The observing vehicle itself is excluded.
KeypointSet observe(const WorldScene& world, const Pose2D& observer_pose,
                    const ScenarioConfig& config, Rng& rng, int observer_id = -1);

// Adds independent zero-mean Gaussian errors: sigma_xy to x and y, sigma_r
// (degrees) to the heading.
Pose2D inject_pose_error(const Pose2D& pose, const PoseNoise& noise, Rng& rng);

// Builds up to n_cooperative_max pairs between the lowest-id vehicle (ego)
// and its in-range partners, nearest first. Empty when no partner is in
// range.
std::vector<SamplePair> make_sample_pairs(const WorldScene& world, const ScenarioConfig& config,
                                          Rng& rng);

// Number of anchor source ids present in both observations.
int count_shared_anchors(const KeypointSet& a, const KeypointSet& b);

} // namespace relloc
