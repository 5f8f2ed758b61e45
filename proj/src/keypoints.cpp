#include "relloc/keypoints.hpp"

#include <limits>
#include <stdexcept>
#include <utility>

namespace relloc {

std::string_view class_name(PointClass c) {
  switch (c) {
  case PointClass::VehicleCenter:
    return "vehicle_center";
  case PointClass::Pole:
    return "pole";
  case PointClass::Planar:
    return "planar";
  }
  return "planar";
}

std::optional<PointClass> class_from_name(std::string_view name) {
  if (name == "vehicle_center") {
    return PointClass::VehicleCenter;
  }
  if (name == "pole") {
    return PointClass::Pole;
  }
  if (name == "planar") {
    return PointClass::Planar;
  }
  return std::nullopt;
}

std::vector<LabeledPoint> KeypointSet::anchors() const {
  std::vector<LabeledPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    if (is_anchor(p.cls)) {
      out.push_back(p);
    }
  }
  return out;
}

std::vector<LabeledPoint> KeypointSet::planar() const {
  std::vector<LabeledPoint> out;
  for (const auto& p : points) {
    if (p.cls == PointClass::Planar) {
      out.push_back(p);
    }
  }
  return out;
}

KeypointSet transform_set(const KeypointSet& s, const Transform2D& t, std::string new_frame) {
  KeypointSet out;
  out.frame_id = s.frame_id;
  out.observer = s.observer;
  out.frame = std::move(new_frame);
  out.points.reserve(s.points.size());
  for (const auto& p : s.points) {
    out.points.push_back({apply(t, p.position), p.cls, p.source_id});
  }
  return out;
}

std::vector<LabeledPoint> fps_downsample(const std::vector<LabeledPoint>& points, int n_f) {
  if (n_f < 1) {
    throw std::invalid_argument("fps_downsample: n_f must be >= 1");
  }
  const std::size_t n = points.size();
  if (n <= static_cast<std::size_t>(n_f)) {
    return points;
  }

  std::vector<LabeledPoint> selected;
  selected.reserve(static_cast<std::size_t>(n_f));
  // min_dist2[i]: squared distance from point i to the selected set so far
  std::vector<double> min_dist2(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);
  std::size_t current = 0; // seed: lowest input index
  taken[current] = 1;
  selected.push_back(points[current]);

  while (selected.size() < static_cast<std::size_t>(n_f)) {
    std::size_t best = n;
    double best_dist2 = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) {
        continue;
      }
      const double d2 = (points[i].position - points[current].position).squaredNorm();
      if (d2 < min_dist2[i]) {
        min_dist2[i] = d2;
      }
      if (min_dist2[i] > best_dist2) { // strict: ties keep the lower index
        best_dist2 = min_dist2[i];
        best = i;
      }
    }
    current = best;
    taken[current] = 1;
    selected.push_back(points[current]);
  }
  return selected;
}

} // namespace relloc
