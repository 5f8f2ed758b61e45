#pragma once

#include <cstddef>
#include <optional>
#include <unordered_map>
#include <vector>

#include "relloc/geometry.hpp"
#include "relloc/keypoints.hpp"

namespace relloc {

// Derives the coarse nearest-neighbor gate from the heading-error level:
// eta * r_c * sigma_r_deg * pi / 180. r_c is the communication range in
// meters, sigma_r_deg the heading-error standard deviation in degrees and
// eta the z-score of the wanted confidence level.
double epsilon1_from_noise(double eta, double r_c, double sigma_r_deg);

struct MatchParams {
  double epsilon1 = 2.58 * 40.0 * 4.0 * kPi / 180.0; // coarse gate radius [m]
  double epsilon2 = 1.0;                             // consensus radius [m]
  double eta = 2.58;                                 // z-score behind epsilon1
  int k_neighbors = 2;                               // neighbors kept per coop anchor
};

struct Neighbor {
  std::size_t index;   // into the queried point list
  double distance;     // m
};

// A cooperative anchor with its same-class ego neighbors inside epsilon1,
// ordered by ascending distance (ties: lower ego index), at most k_neighbors.
struct MatchCandidate {
  std::size_t b_index; // into the coop anchor list
  LabeledPoint b;
  std::vector<Neighbor> neighbors; // into the ego anchor list
};

// One candidate per coop anchor that has at least one qualifying neighbor
// (same class, distance strictly below epsilon1). Returns an empty list when
// no coop anchor has a neighbor.
std::vector<MatchCandidate> build_candidates(const std::vector<LabeledPoint>& ego_anchors,
                                             const std::vector<LabeledPoint>& coop_anchors,
                                             const MatchParams& params);

struct ConsensusPair {
  std::size_t coop_index;
  std::size_t ego_index;
};

struct ConsensusResult {
  int count = 0;
  std::vector<ConsensusPair> pairs;
};

// Uniform-grid point index. Exact: its query results match a brute-force
// scan, including the (distance, index) tie ordering.
class GridIndex {
public:
  GridIndex(const std::vector<LabeledPoint>& points, double cell_size);

  // Nearest point of the given class strictly closer than `radius`.
  std::optional<Neighbor> nearest(const Point2& query, PointClass cls, double radius) const;

private:
  struct Entry {
    Point2 position;
    PointClass cls;
    std::size_t index;
  };

  static std::uint64_t cell_key(std::int64_t cx, std::int64_t cy);

  double cell_size_;
  std::unordered_map<std::uint64_t, std::vector<Entry>> cells_;
};

// Consensus counting against a fixed ego-side point set; the spatial index is
// built once and reused across queries.
class ConsensusCounter {
public:
  ConsensusCounter(const std::vector<LabeledPoint>& ego_points, double epsilon2);

  ConsensusResult count(const std::vector<LabeledPoint>& coop_points, bool collect_pairs) const;

  // Count with the coop points given as rotated positions plus a common
  // translation; avoids materializing a point list per grid cell.
  int count_shifted(const std::vector<Point2>& positions, const std::vector<PointClass>& classes,
                    const Point2& shift) const;

  double epsilon2() const { return epsilon2_; }

private:
  double epsilon2_;
  GridIndex index_;
};

// Number of cooperative points whose nearest same-class ego point lies
// strictly within epsilon2, plus the discovered (coop -> ego) pairs. Equal to
// a brute-force O(n*m) recomputation.
ConsensusResult count_consensus(const std::vector<LabeledPoint>& ego_all,
                                const std::vector<LabeledPoint>& coop_all_transformed,
                                double epsilon2);

} // namespace relloc
