#include "relloc/estimation.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "relloc/rng.hpp"

namespace relloc {

Transform2D fit_rigid_transform(std::span<const PointPair> pairs) {
  if (pairs.size() < 2) {
    throw DegenerateGeometryError("fit_rigid_transform: need at least two point pairs");
  }
  const double n = static_cast<double>(pairs.size());
  Point2 a_mean{0.0, 0.0};
  Point2 b_mean{0.0, 0.0};
  for (const auto& p : pairs) {
    a_mean += p.a;
    b_mean += p.b;
  }
  a_mean /= n;
  b_mean /= n;

  bool a_spread = false;
  double sxx = 0.0, syy = 0.0, sxy = 0.0, syx = 0.0;
  for (const auto& p : pairs) {
    const Point2 ar = p.a - a_mean;
    const Point2 br = p.b - b_mean;
    if (ar.squaredNorm() > 0.0) {
      a_spread = true;
    }
    sxx += ar.x() * br.x();
    syy += ar.y() * br.y();
    sxy += ar.x() * br.y();
    syx += ar.y() * br.x();
  }
  if (!a_spread) {
    throw DegenerateGeometryError("fit_rigid_transform: source points are all coincident");
  }

  const double dtheta = std::atan2(sxy - syx, sxx + syy);
  const double c = std::cos(dtheta);
  const double s = std::sin(dtheta);
  const double dx = b_mean.x() - (c * a_mean.x() - s * a_mean.y());
  const double dy = b_mean.y() - (s * a_mean.x() + c * a_mean.y());
  return {dtheta, dx, dy};
}

namespace {

// Anchor-only correspondences discovered through the counted pairs, with the
// coop side restored to its pre-correction coordinates.
std::vector<Correspondence> anchor_correspondences(const ConsensusResult& consensus,
                                                   const std::vector<LabeledPoint>& coop_all,
                                                   const std::vector<LabeledPoint>& ego_all) {
  std::vector<Correspondence> out;
  for (const auto& pair : consensus.pairs) {
    if (is_anchor(coop_all[pair.coop_index].cls)) {
      out.push_back({coop_all[pair.coop_index], ego_all[pair.ego_index]});
    }
  }
  return out;
}

Transform2D refine_from_correspondences(const std::vector<Correspondence>& correspondences) {
  if (correspondences.size() < 2) {
    return Transform2D::identity();
  }
  std::vector<PointPair> pairs;
  pairs.reserve(correspondences.size());
  for (const auto& c : correspondences) {
    pairs.push_back({c.coop.position, c.ego.position});
  }
  try {
    return fit_rigid_transform(pairs);
  } catch (const DegenerateGeometryError&) {
    return Transform2D::identity();
  }
}

} // namespace

CorrectionResult ransac_correct(const KeypointSet& ego_set, const KeypointSet& coop_set_in_ego,
                                const RansacParams& params) {
  if (params.n_ransac < 1) {
    throw std::invalid_argument("ransac_correct: n_ransac must be >= 1");
  }

  const std::vector<LabeledPoint>& ego_all = ego_set.points;
  const std::vector<LabeledPoint>& coop_all = coop_set_in_ego.points;
  const std::vector<LabeledPoint> ego_anchors = ego_set.anchors();
  const std::vector<LabeledPoint> coop_anchors = coop_set_in_ego.anchors();

  CorrectionResult result;
  const auto candidates = build_candidates(ego_anchors, coop_anchors, params.match);
  if (candidates.size() < 2) {
    return result;
  }

  std::size_t flattened = 0;
  for (const auto& c : candidates) {
    flattened += c.neighbors.size();
  }
  const long long pair_cap =
      static_cast<long long>(flattened) * (static_cast<long long>(flattened) - 1) / 2;
  const long long n_iterations = std::min<long long>(params.n_ransac, pair_cap);
  if (n_iterations < 1) {
    return result;
  }

  const ConsensusCounter counter(ego_all, params.match.epsilon2);
  Rng rng(params.rng_seed);

  std::vector<LabeledPoint> coop_transformed(coop_all.size());
  int best = 0;
  long long executed = 0;
  long long attempts = 0;
  const long long max_attempts = 20 * n_iterations + 100;

  while (executed < n_iterations && attempts < max_attempts) {
    ++attempts;
    const std::size_t i1 = rng.uniform_index(candidates.size());
    std::size_t i2 = rng.uniform_index(candidates.size() - 1);
    if (i2 >= i1) {
      ++i2;
    }
    const MatchCandidate& c1 = candidates[i1];
    const MatchCandidate& c2 = candidates[i2];
    const Neighbor& n1 = c1.neighbors[rng.uniform_index(c1.neighbors.size())];
    const Neighbor& n2 = c2.neighbors[rng.uniform_index(c2.neighbors.size())];
    if (n1.index == n2.index) {
      continue; // both matched to the same ego anchor: no rigid fit possible
    }
    const Point2& b1 = c1.b.position;
    const Point2& b2 = c2.b.position;
    if (b1.x() == b2.x() && b1.y() == b2.y()) {
      continue;
    }
    ++executed;

    const PointPair seed_pairs[2] = {{b1, ego_anchors[n1.index].position},
                                     {b2, ego_anchors[n2.index].position}};
    const Transform2D hypothesis = fit_rigid_transform(seed_pairs);

    for (std::size_t i = 0; i < coop_all.size(); ++i) {
      coop_transformed[i] = {apply(hypothesis, coop_all[i].position), coop_all[i].cls,
                             coop_all[i].source_id};
    }
    const int n_cons = counter.count(coop_transformed, false).count;
    if (n_cons > best) {
      best = n_cons;
      const ConsensusResult with_pairs = counter.count(coop_transformed, true);
      result.correspondences = anchor_correspondences(with_pairs, coop_all, ego_all);
      result.transform = refine_from_correspondences(result.correspondences);
    }
    assert(best >= n_cons); // best tracks the running maximum
  }

  result.n_cons = best;
  result.iterations_run = static_cast<int>(executed);
  return result;
}

CorrectionResult grid_search_correct(const KeypointSet& ego_set,
                                     const KeypointSet& coop_set_in_ego,
                                     const GridSearchParams& params) {
  const std::uint64_t cells = search_space_cells(params.x_span, params.y_span,
                                                 params.theta_span_deg, params.xy_res,
                                                 params.theta_res_deg);
  if (cells > params.cell_budget) {
    throw GridBudgetError("grid_search_correct: grid of " + std::to_string(cells) +
                          " cells exceeds the budget of " + std::to_string(params.cell_budget));
  }

  const auto axis_cells = [](double span, double res) {
    return static_cast<std::int64_t>(std::floor(span / res + 1e-9));
  };
  const std::int64_t nx = axis_cells(params.x_span, params.xy_res);
  const std::int64_t ny = axis_cells(params.y_span, params.xy_res);
  const std::int64_t nt = axis_cells(params.theta_span_deg, params.theta_res_deg);

  const std::vector<LabeledPoint>& ego_all = ego_set.points;
  const std::vector<LabeledPoint>& coop_all = coop_set_in_ego.points;
  const ConsensusCounter counter(ego_all, params.epsilon2);

  std::vector<Point2> rotated(coop_all.size());
  std::vector<PointClass> classes(coop_all.size());
  for (std::size_t i = 0; i < coop_all.size(); ++i) {
    classes[i] = coop_all[i].cls;
  }

  int best_count = -1;
  Transform2D best_transform;
  double best_norm2 = std::numeric_limits<double>::infinity();

  for (std::int64_t it = 0; it < nt; ++it) {
    const double dtheta_deg = -params.theta_span_deg / 2.0 + static_cast<double>(it) * params.theta_res_deg;
    const double dtheta = deg2rad(dtheta_deg);
    const double c = std::cos(dtheta);
    const double s = std::sin(dtheta);
    for (std::size_t i = 0; i < coop_all.size(); ++i) {
      const Point2& p = coop_all[i].position;
      rotated[i] = {c * p.x() - s * p.y(), s * p.x() + c * p.y()};
    }
    for (std::int64_t ix = 0; ix < nx; ++ix) {
      const double dx = -params.x_span / 2.0 + static_cast<double>(ix) * params.xy_res;
      for (std::int64_t iy = 0; iy < ny; ++iy) {
        const double dy = -params.y_span / 2.0 + static_cast<double>(iy) * params.xy_res;
        const int count = counter.count_shifted(rotated, classes, {dx, dy});
        if (count < best_count) {
          continue;
        }
        const double norm2 = dx * dx + dy * dy + dtheta * dtheta;
        if (count > best_count || norm2 < best_norm2 ||
            (norm2 == best_norm2 &&
             std::tie(dtheta, dx, dy) < std::tie(best_transform.dtheta, best_transform.dx,
                                                 best_transform.dy))) {
          best_count = count;
          best_norm2 = norm2;
          best_transform = {dtheta, dx, dy};
        }
      }
    }
  }

  CorrectionResult result;
  result.transform = best_transform;
  result.n_cons = std::max(best_count, 0);
  result.iterations_run = static_cast<int>(cells);

  std::vector<LabeledPoint> coop_transformed(coop_all.size());
  for (std::size_t i = 0; i < coop_all.size(); ++i) {
    coop_transformed[i] = {apply(best_transform, coop_all[i].position), coop_all[i].cls,
                           coop_all[i].source_id};
  }
  const ConsensusResult final_pairs = counter.count(coop_transformed, true);
  result.correspondences = anchor_correspondences(final_pairs, coop_all, ego_all);
  return result;
}

} // namespace relloc
