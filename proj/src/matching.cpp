#include "relloc/matching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relloc {

double epsilon1_from_noise(double eta, double r_c, double sigma_r_deg) {
  if (eta <= 0.0 || r_c <= 0.0 || sigma_r_deg <= 0.0) {
    throw std::invalid_argument("epsilon1_from_noise: arguments must be positive");
  }
  return eta * r_c * sigma_r_deg * kPi / 180.0;
}

std::vector<MatchCandidate> build_candidates(const std::vector<LabeledPoint>& ego_anchors,
                                             const std::vector<LabeledPoint>& coop_anchors,
                                             const MatchParams& params) {
  if (params.k_neighbors < 1) {
    throw std::invalid_argument("build_candidates: k_neighbors must be >= 1");
  }
  std::vector<MatchCandidate> candidates;
  std::vector<Neighbor> in_range;
  for (std::size_t bi = 0; bi < coop_anchors.size(); ++bi) {
    const LabeledPoint& b = coop_anchors[bi];
    in_range.clear();
    for (std::size_t ai = 0; ai < ego_anchors.size(); ++ai) {
      const LabeledPoint& a = ego_anchors[ai];
      if (a.cls != b.cls) {
        continue;
      }
      const double d = (a.position - b.position).norm();
      if (d < params.epsilon1) {
        in_range.push_back({ai, d});
      }
    }
    if (in_range.empty()) {
      continue;
    }
    std::sort(in_range.begin(), in_range.end(), [](const Neighbor& l, const Neighbor& r) {
      return l.distance < r.distance || (l.distance == r.distance && l.index < r.index);
    });
    if (in_range.size() > static_cast<std::size_t>(params.k_neighbors)) {
      in_range.resize(static_cast<std::size_t>(params.k_neighbors));
    }
    candidates.push_back({bi, b, in_range});
  }
  return candidates;
}

std::uint64_t GridIndex::cell_key(std::int64_t cx, std::int64_t cy) {
  return (static_cast<std::uint64_t>(cx) << 32) ^ (static_cast<std::uint64_t>(cy) & 0xffffffffULL);
}

GridIndex::GridIndex(const std::vector<LabeledPoint>& points, double cell_size)
    : cell_size_(cell_size) {
  if (!(cell_size > 0.0)) {
    throw std::invalid_argument("GridIndex: cell size must be positive");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const auto cx = static_cast<std::int64_t>(std::floor(p.position.x() / cell_size_));
    const auto cy = static_cast<std::int64_t>(std::floor(p.position.y() / cell_size_));
    cells_[cell_key(cx, cy)].push_back({p.position, p.cls, i});
  }
}

std::optional<Neighbor> GridIndex::nearest(const Point2& query, PointClass cls,
                                           double radius) const {
  const auto cx_lo = static_cast<std::int64_t>(std::floor((query.x() - radius) / cell_size_));
  const auto cx_hi = static_cast<std::int64_t>(std::floor((query.x() + radius) / cell_size_));
  const auto cy_lo = static_cast<std::int64_t>(std::floor((query.y() - radius) / cell_size_));
  const auto cy_hi = static_cast<std::int64_t>(std::floor((query.y() + radius) / cell_size_));

  const double radius2 = radius * radius;
  double best_d2 = radius2;
  std::size_t best_index = 0;
  bool found = false;
  for (std::int64_t cx = cx_lo; cx <= cx_hi; ++cx) {
    for (std::int64_t cy = cy_lo; cy <= cy_hi; ++cy) {
      const auto it = cells_.find(cell_key(cx, cy));
      if (it == cells_.end()) {
        continue;
      }
      for (const Entry& e : it->second) {
        if (e.cls != cls) {
          continue;
        }
        const double d2 = (e.position - query).squaredNorm();
        if (d2 >= radius2) {
          continue; // strict radius
        }
        if (!found || d2 < best_d2 || (d2 == best_d2 && e.index < best_index)) {
          best_d2 = d2;
          best_index = e.index;
          found = true;
        }
      }
    }
  }
  if (!found) {
    return std::nullopt;
  }
  return Neighbor{best_index, std::sqrt(best_d2)};
}

ConsensusCounter::ConsensusCounter(const std::vector<LabeledPoint>& ego_points, double epsilon2)
    : epsilon2_(epsilon2), index_(ego_points, epsilon2) {
  if (!(epsilon2 > 0.0)) {
    throw std::invalid_argument("ConsensusCounter: epsilon2 must be positive");
  }
}

ConsensusResult ConsensusCounter::count(const std::vector<LabeledPoint>& coop_points,
                                        bool collect_pairs) const {
  ConsensusResult result;
  for (std::size_t bi = 0; bi < coop_points.size(); ++bi) {
    const auto hit = index_.nearest(coop_points[bi].position, coop_points[bi].cls, epsilon2_);
    if (hit) {
      ++result.count;
      if (collect_pairs) {
        result.pairs.push_back({bi, hit->index});
      }
    }
  }
  return result;
}

int ConsensusCounter::count_shifted(const std::vector<Point2>& positions,
                                    const std::vector<PointClass>& classes,
                                    const Point2& shift) const {
  int count = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (index_.nearest(positions[i] + shift, classes[i], epsilon2_)) {
      ++count;
    }
  }
  return count;
}

ConsensusResult count_consensus(const std::vector<LabeledPoint>& ego_all,
                                const std::vector<LabeledPoint>& coop_all_transformed,
                                double epsilon2) {
  return ConsensusCounter(ego_all, epsilon2).count(coop_all_transformed, true);
}

} // namespace relloc
