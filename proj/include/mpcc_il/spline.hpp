#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mpcc_il/common.hpp"

namespace mpcc_il {

// Point, unit tangent and heading of the tangent projected to the xy-plane.
struct PathFrame {
  Vec3 point;
  Vec3 tangent;
  double heading;
};

struct ClosestPoint {
  double nu;        // parameter of the local minimizer, clamped to the domain
  double distance;  // exact contouring error at nu
};

// Lag/contour error approximation at a path parameter guess, with analytic
// derivatives. `lag_signed` and `contour_vec` are the smooth quantities the
// solver consumes; `lag`/`contour` are their magnitudes.
struct ContouringApprox {
  double lag = 0.0;
  double contour = 0.0;
  double lag_signed = 0.0;
  Vec3 contour_vec = Vec3::Zero();

  Vec3 dlag_dp = Vec3::Zero();
  double dlag_dnu = 0.0;
  Vec3 dcontour_dp = Vec3::Zero();
  double dcontour_dnu = 0.0;

  Mat3 dcontour_vec_dp = Mat3::Zero();
  Vec3 dcontour_vec_dnu = Vec3::Zero();
  Vec3 dlag_signed_dp = Vec3::Zero();
  double dlag_signed_dnu = 0.0;
};

// Natural cubic spline through 3D control points, parametrized by cumulative
// chord length so the parameter approximates arc length. Immutable after
// construction; safe for concurrent reads.
class SplinePath {
 public:
  SplinePath() = default;

  // Interpolating natural cubic spline. Throws InvalidInputError for fewer
  // than 2 points or consecutive duplicates.
  static SplinePath from_points(std::span<const Vec3> points);
  static SplinePath from_points(const std::vector<Vec3>& points) {
    return from_points(std::span<const Vec3>(points.data(), points.size()));
  }

  double length() const { return length_; }
  const std::vector<Vec3>& control_points() const { return points_; }
  const std::vector<double>& knots() const { return knots_; }

  Vec3 position(double nu) const;
  Vec3 derivative(double nu) const;
  Vec3 second_derivative(double nu) const;

  // True when nu lies outside [0, length]; evaluation clamps in that case.
  bool clamps(double nu) const { return nu < 0.0 || nu > length_; }

  // Point, unit tangent and heading. Throws SingularityError when the
  // tangent is degenerate (|s'| < 1e-12).
  PathFrame frame(double nu) const;

  // Local minimizer of |s(nu) - p|. With a hint, Newton refinement only;
  // without, a coarse scan (64 samples per segment) seeds the refinement.
  ClosestPoint closest_point(const Vec3& p,
                             std::optional<double> hint = std::nullopt) const;

  // Projection-based lag/contour approximation at parameter nu.
  ContouringApprox contouring_lag_approx(const Vec3& p, double nu) const;

 private:
  int segment_index(double& nu) const;

  std::vector<Vec3> points_;
  std::vector<double> knots_;
  // Per-segment cubic coefficients per axis: value = a + b*h + c*h^2 + d*h^3.
  std::vector<Eigen::Matrix<double, 3, 4>> coeffs_;
  double length_ = 0.0;
};

}  // namespace mpcc_il
