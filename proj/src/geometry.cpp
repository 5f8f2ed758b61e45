#include "relloc/geometry.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace relloc {

double wrap_angle(double radians) {
  double r = std::remainder(radians, 2.0 * kPi);
  if (r <= -kPi) {
    r += 2.0 * kPi;
  }
  return r;
}

Pose2D::Pose2D(double x_, double y_, double theta_) : x(x_), y(y_), theta(wrap_angle(theta_)) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(theta_)) {
    throw std::invalid_argument("Pose2D: coordinates must be finite");
  }
}

Pose2D perturb(const Pose2D& pose, const PoseError& error) {
  return {pose.x + error.dx, pose.y + error.dy, pose.theta + error.dtheta};
}

PoseNoise::PoseNoise(double sigma_xy_, double sigma_r_) : sigma_xy(sigma_xy_), sigma_r(sigma_r_) {
  if (sigma_xy < 0.0 || sigma_r < 0.0) {
    throw std::invalid_argument("PoseNoise: standard deviations must be non-negative");
  }
}

Transform2D::Transform2D(double dtheta_, double dx_, double dy_)
    : dtheta(wrap_angle(dtheta_)), dx(dx_), dy(dy_) {
  if (!std::isfinite(dtheta_) || !std::isfinite(dx) || !std::isfinite(dy)) {
    throw std::invalid_argument("Transform2D: parameters must be finite");
  }
}

Transform2D Transform2D::from_matrix(const Eigen::Matrix3d& m) {
  constexpr double tol = 1e-12;
  if (std::abs(m(2, 0)) > tol || std::abs(m(2, 1)) > tol || std::abs(m(2, 2) - 1.0) > tol) {
    throw std::invalid_argument("Transform2D::from_matrix: bottom row must be (0, 0, 1)");
  }
  const Eigen::Matrix2d r = m.topLeftCorner<2, 2>();
  const Eigen::Matrix2d gram = r.transpose() * r;
  if ((gram - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("Transform2D::from_matrix: rotation block not orthonormal");
  }
  if (r(0, 0) * r(1, 1) - r(0, 1) * r(1, 0) < 0.0) {
    throw std::invalid_argument("Transform2D::from_matrix: rotation block must have det +1");
  }
  return {std::atan2(m(1, 0), m(0, 0)), m(0, 2), m(1, 2)};
}

Eigen::Matrix3d Transform2D::matrix() const {
  const double c = std::cos(dtheta);
  const double s = std::sin(dtheta);
  Eigen::Matrix3d m;
  m << c, -s, dx, s, c, dy, 0.0, 0.0, 1.0;
  return m;
}

Transform2D make_translation(double m, double n) {
  return {0.0, m, n};
}

Transform2D make_rotation(double l) {
  return {l, 0.0, 0.0};
}

Transform2D compose(const Transform2D& a, const Transform2D& b) {
  const double c = std::cos(a.dtheta);
  const double s = std::sin(a.dtheta);
  return {wrap_angle(a.dtheta + b.dtheta), a.dx + c * b.dx - s * b.dy, a.dy + s * b.dx + c * b.dy};
}

Transform2D inverse(const Transform2D& t) {
  const double c = std::cos(t.dtheta);
  const double s = std::sin(t.dtheta);
  return {wrap_angle(-t.dtheta), -(c * t.dx + s * t.dy), -(-s * t.dx + c * t.dy)};
}

Point2 apply(const Transform2D& t, const Point2& p) {
  const double c = std::cos(t.dtheta);
  const double s = std::sin(t.dtheta);
  return {c * p.x() - s * p.y() + t.dx, s * p.x() + c * p.y() + t.dy};
}

Transform2D erroneous_relative_transform(const Pose2D& ego, const Pose2D& coop) {
  const double c = std::cos(-ego.theta);
  const double s = std::sin(-ego.theta);
  const double gx = coop.x - ego.x;
  const double gy = coop.y - ego.y;
  return {wrap_angle(coop.theta - ego.theta), c * gx - s * gy, s * gx + c * gy};
}

Transform2D ground_truth_correction(const Pose2D& true_ego, const Pose2D& true_coop,
                                    const Pose2D& err_ego, const Pose2D& err_coop) {
  const Transform2D rel_true = erroneous_relative_transform(true_ego, true_coop);
  const Transform2D rel_err = erroneous_relative_transform(err_ego, err_coop);
  return compose(rel_true, inverse(rel_err));
}

EnvelopeBounds relative_error_envelope(const PoseError& err_ego, const PoseError& err_coop,
                                       double distance, int n_orientations) {
  if (n_orientations < 4) {
    throw std::invalid_argument("relative_error_envelope: n_orientations must be >= 4");
  }
  EnvelopeBounds bounds{std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity()};
  const Pose2D true_coop(distance, 0.0, 0.0);
  const Pose2D err_coop_pose = perturb(true_coop, err_coop);
  for (int k = 0; k < n_orientations; ++k) {
    const double phi = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n_orientations);
    const Pose2D true_ego(0.0, 0.0, phi);
    const Transform2D correction =
        ground_truth_correction(true_ego, true_coop, perturb(true_ego, err_ego), err_coop_pose);
    bounds.min_dx = std::min(bounds.min_dx, correction.dx);
    bounds.max_dx = std::max(bounds.max_dx, correction.dx);
    bounds.min_dy = std::min(bounds.min_dy, correction.dy);
    bounds.max_dy = std::max(bounds.max_dy, correction.dy);
  }
  return bounds;
}

std::uint64_t search_space_cells(double x_span, double y_span, double theta_span_deg,
                                 double xy_res, double theta_res_deg) {
  if (xy_res <= 0.0 || theta_res_deg <= 0.0) {
    throw std::invalid_argument("search_space_cells: resolutions must be positive");
  }
  if (x_span <= 0.0 || y_span <= 0.0 || theta_span_deg <= 0.0) {
    throw std::invalid_argument("search_space_cells: spans must be positive");
  }
  // 1e-9 slack absorbs binary rounding in span/res (e.g. 12/0.1).
  const auto cells = [](double span, double res) {
    return static_cast<std::uint64_t>(std::floor(span / res + 1e-9));
  };
  return cells(x_span, xy_res) * cells(y_span, xy_res) * cells(theta_span_deg, theta_res_deg);
}

} // namespace relloc
