#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "relloc/geometry.hpp"
#include "relloc/keypoints.hpp"
#include "relloc/matching.hpp"

namespace relloc {

class DegenerateGeometryError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class GridBudgetError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// One correspondence for the closed-form fit; the estimated transform maps
// a-coordinates toward b-coordinates.
struct PointPair {
  Point2 a;
  Point2 b;
};

// Least-squares rigid transform between matched 2D point pairs: centroids,
// reduced coordinates, cross-correlations, dtheta = atan2(Sxy - Syx,
// Sxx + Syy), translation = b_mean - R(dtheta) * a_mean. Requires at least
// two pairs with non-coincident a-points; throws DegenerateGeometryError
// otherwise.
Transform2D fit_rigid_transform(std::span<const PointPair> pairs);

struct RansacParams {
  int n_ransac = 30;        // max iterations
  MatchParams match;
  std::uint64_t rng_seed = 0;
};

struct Correspondence {
  LabeledPoint coop; // original (pre-correction) coordinates in the ego frame
  LabeledPoint ego;
};

struct CorrectionResult {
  Transform2D transform;   // correction applied to coop points in the ego frame
  int n_cons = 0;          // best consensus over the run
  std::vector<Correspondence> correspondences; // final anchor pairs
  int iterations_run = 0;

  bool valid_for(int thr_cons) const { return n_cons > thr_cons; }
};

// RANSAC relative-error estimation. coop_set_in_ego must already be mapped
// into the ego frame with the pose-derived relative transform. Hypotheses are
// drawn from class-constrained anchor matches inside epsilon1, scored by
// nearest-neighbor consensus of the full point sets inside epsilon2, and the
// best hypothesis is refined over all anchor correspondences (identity when
// fewer than two are found). Deterministic for a fixed rng_seed.
CorrectionResult ransac_correct(const KeypointSet& ego_set, const KeypointSet& coop_set_in_ego,
                                const RansacParams& params);

struct GridSearchParams {
  double x_span = 2.0;          // full widths, centered on identity
  double y_span = 2.0;
  double theta_span_deg = 4.0;
  double xy_res = 0.1;
  double theta_res_deg = 0.5;
  double epsilon2 = 1.0;
  std::uint64_t cell_budget = 1'000'000;
};

// Exhaustive maximum-consensus baseline over a discrete transform grid.
// Ties: smaller parameter norm (dx^2 + dy^2 + dtheta^2), then lexicographic
// (dtheta, dx, dy). Throws GridBudgetError when the grid exceeds cell_budget.
CorrectionResult grid_search_correct(const KeypointSet& ego_set,
                                     const KeypointSet& coop_set_in_ego,
                                     const GridSearchParams& params);

} // namespace relloc
