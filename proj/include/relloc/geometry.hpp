#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace relloc {

inline constexpr double kPi = 3.14159265358979323846;

using Point2 = Eigen::Vector2d;

constexpr double deg2rad(double degrees) { return degrees * kPi / 180.0; }
constexpr double rad2deg(double radians) { return radians * 180.0 / kPi; }

// Normalizes an angle to (-pi, pi].
double wrap_angle(double radians);

// Planar pose (x, y, heading) in some named frame. Heading is measured
// against the frame's x-axis and kept normalized to (-pi, pi].
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0; // radians, (-pi, pi]

  Pose2D() = default;
  Pose2D(double x_, double y_, double theta_); // throws on non-finite x/y

  Point2 position() const { return {x, y}; }
};

// Additive pose perturbation (dx, dy, dtheta). dtheta in radians.
struct PoseError {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;
};

Pose2D perturb(const Pose2D& pose, const PoseError& error);

// Standard deviations of a GNSS-style localization error. sigma_xy applies
// independently to x and y; sigma_r is in degrees.
struct PoseNoise {
  double sigma_xy = 0.0; // m
  double sigma_r = 0.0;  // degrees

  PoseNoise() = default;
  PoseNoise(double sigma_xy_, double sigma_r_); // throws if negative
};

// Rigid planar transform, stored as the parameter triple (dtheta, dx, dy)
// with a derived 3x3 homogeneous matrix view. dtheta normalized to (-pi, pi].
struct Transform2D {
  double dtheta = 0.0; // radians
  double dx = 0.0;     // m
  double dy = 0.0;     // m

  Transform2D() = default;
  Transform2D(double dtheta_, double dx_, double dy_);

  static Transform2D identity() { return {}; }

  // Extracts the parameters from a homogeneous matrix. The rotation block
  // must be orthonormal with determinant +1 within 1e-12 and the bottom row
  // must be (0, 0, 1); throws std::invalid_argument otherwise.
  static Transform2D from_matrix(const Eigen::Matrix3d& m);

  Eigen::Matrix3d matrix() const;
  Point2 translation() const { return {dx, dy}; }
};

Transform2D make_translation(double m, double n);
Transform2D make_rotation(double l);

Transform2D compose(const Transform2D& a, const Transform2D& b);
Transform2D inverse(const Transform2D& t);
Point2 apply(const Transform2D& t, const Point2& p);

// Relative transform mapping coop-local coordinates into the ego frame,
// built from two poses expressed in the same global frame. Rotation angle is
// coop.theta - ego.theta; translation is the coop position expressed in the
// ego frame.
Transform2D erroneous_relative_transform(const Pose2D& ego, const Pose2D& coop);

// Exact correction dT such that dT * T_rel(err poses) = T_rel(true poses).
// Its rotation component equals the ego heading error minus the coop heading
// error, independent of the vehicle positions.
Transform2D ground_truth_correction(const Pose2D& true_ego, const Pose2D& true_coop,
                                    const Pose2D& err_ego, const Pose2D& err_coop);

struct EnvelopeBounds {
  double min_dx = 0.0;
  double max_dx = 0.0;
  double min_dy = 0.0;
  double max_dy = 0.0;
};

// Extremes of the relative-error translation over a full sweep of the ego
// heading. The ego sits at the origin with n_orientations headings uniformly
// covering [0, 2*pi); the coop vehicle sits at (distance, 0) with heading 0;
// both poses are perturbed by the given error triples and the correction
// translation is recorded. n_orientations must be >= 4.
EnvelopeBounds relative_error_envelope(const PoseError& err_ego, const PoseError& err_coop,
                                       double distance, int n_orientations);

// Number of cells of an exhaustive 3-DoF search grid: product of
// floor(span/resolution) per axis. Throws on non-positive spans/resolutions.
std::uint64_t search_space_cells(double x_span, double y_span, double theta_span_deg,
                                 double xy_res, double theta_res_deg);

} // namespace relloc
