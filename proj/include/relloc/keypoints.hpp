#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relloc/geometry.hpp"

namespace relloc {

enum class PointClass : std::uint8_t { VehicleCenter, Pole, Planar };

// Vehicle centers and poles are the anchor classes: they correspond to
// distinct physical objects and are used to hypothesize transforms. Planar
// points only contribute to consensus counting.
constexpr bool is_anchor(PointClass c) { return c != PointClass::Planar; }

std::string_view class_name(PointClass c); // "vehicle_center" | "pole" | "planar"
std::optional<PointClass> class_from_name(std::string_view name);

inline constexpr std::int64_t kNoSourceId = -1;

// A classed 2D localization point. source_id identifies the generating world
// object in simulation (kNoSourceId when unknown); it exists only so tests
// and the simulator can score correspondences -- the estimator never reads it.
struct LabeledPoint {
  Point2 position{0.0, 0.0};
  PointClass cls = PointClass::Planar;
  std::int64_t source_id = kNoSourceId;
};

struct KeypointSet {
  std::string frame_id;
  int observer = -1;  // vehicle id, -1 when not attached to a vehicle
  std::string frame;  // "observer-local" | "ego" | "global"
  std::vector<LabeledPoint> points;

  std::vector<LabeledPoint> anchors() const;
  std::vector<LabeledPoint> planar() const;
};

// Applies a rigid transform to every point; classes and source ids are
// preserved, the frame name is replaced.
KeypointSet transform_set(const KeypointSet& s, const Transform2D& t, std::string new_frame);

// Farthest-point sampling. Returns the input unchanged when it has at most
// n_f points. Otherwise selects n_f points greedily: the seed is the
// lowest-index point and every subsequent pick maximizes its minimum distance
// to the already-selected set, ties broken by lower input index.
std::vector<LabeledPoint> fps_downsample(const std::vector<LabeledPoint>& points, int n_f);

} // namespace relloc
