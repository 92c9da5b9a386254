#include "mpcc_il/spline.hpp"

#include <algorithm>
#include <cmath>

namespace mpcc_il {

namespace {

// Thomas algorithm for the natural-spline tridiagonal system.
void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                       std::vector<double>& upper, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
  }
}

}  // namespace

SplinePath SplinePath::from_points(std::span<const Vec3> points) {
  const std::size_t n = points.size();
  if (n < 2) {
    throw InvalidInputError("spline needs at least 2 control points");
  }

  SplinePath path;
  path.points_.assign(points.begin(), points.end());
  path.knots_.resize(n);
  path.knots_[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double chord = (points[i] - points[i - 1]).norm();
    if (chord < 1e-12) {
      throw InvalidInputError("consecutive duplicate control points");
    }
    path.knots_[i] = path.knots_[i - 1] + chord;
  }
  path.length_ = path.knots_.back();

  // Second derivatives M_i per axis, natural boundary M_0 = M_{n-1} = 0.
  std::vector<Vec3> m(n, Vec3::Zero());
  if (n > 2) {
    const std::size_t in = n - 2;  // interior unknowns
    for (int axis = 0; axis < 3; ++axis) {
      std::vector<double> lower(in), diag(in), upper(in), rhs(in);
      for (std::size_t i = 0; i < in; ++i) {
        const double h0 = path.knots_[i + 1] - path.knots_[i];
        const double h1 = path.knots_[i + 2] - path.knots_[i + 1];
        lower[i] = h0 / 6.0;
        diag[i] = (h0 + h1) / 3.0;
        upper[i] = h1 / 6.0;
        const double s0 =
            (points[i + 1][axis] - points[i][axis]) / h0;
        const double s1 =
            (points[i + 2][axis] - points[i + 1][axis]) / h1;
        rhs[i] = s1 - s0;
      }
      solve_tridiagonal(lower, diag, upper, rhs);
      for (std::size_t i = 0; i < in; ++i) m[i + 1][axis] = rhs[i];
    }
  }

  path.coeffs_.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = path.knots_[i + 1] - path.knots_[i];
    for (int axis = 0; axis < 3; ++axis) {
      const double y0 = points[i][axis];
      const double y1 = points[i + 1][axis];
      const double m0 = m[i][axis];
      const double m1 = m[i + 1][axis];
      path.coeffs_[i](axis, 0) = y0;
      path.coeffs_[i](axis, 1) = (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0;
      path.coeffs_[i](axis, 2) = m0 / 2.0;
      path.coeffs_[i](axis, 3) = (m1 - m0) / (6.0 * h);
    }
  }
  return path;
}

int SplinePath::segment_index(double& nu) const {
  nu = clamp(nu, 0.0, length_);
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), nu);
  int idx = static_cast<int>(it - knots_.begin()) - 1;
  idx = std::clamp(idx, 0, static_cast<int>(coeffs_.size()) - 1);
  return idx;
}

Vec3 SplinePath::position(double nu) const {
  const int i = segment_index(nu);
  const double h = nu - knots_[i];
  const auto& c = coeffs_[i];
  return c.col(0) + h * (c.col(1) + h * (c.col(2) + h * c.col(3)));
}

Vec3 SplinePath::derivative(double nu) const {
  const int i = segment_index(nu);
  const double h = nu - knots_[i];
  const auto& c = coeffs_[i];
  return c.col(1) + h * (2.0 * c.col(2) + 3.0 * h * c.col(3));
}

Vec3 SplinePath::second_derivative(double nu) const {
  const int i = segment_index(nu);
  const double h = nu - knots_[i];
  const auto& c = coeffs_[i];
  return 2.0 * c.col(2) + 6.0 * h * c.col(3);
}

PathFrame SplinePath::frame(double nu) const {
  const Vec3 d1 = derivative(nu);
  const double norm = d1.norm();
  if (norm < 1e-12) {
    throw SingularityError("degenerate path tangent");
  }
  PathFrame f;
  f.point = position(nu);
  f.tangent = d1 / norm;
  f.heading = std::atan2(f.tangent.y(), f.tangent.x());
  return f;
}

ClosestPoint SplinePath::closest_point(const Vec3& p,
                                       std::optional<double> hint) const {
  double nu;
  if (hint.has_value()) {
    nu = clamp(*hint, 0.0, length_);
  } else {
    // Coarse scan: 64 samples per segment plus the far endpoint.
    double best = std::numeric_limits<double>::infinity();
    nu = 0.0;
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
      const double a = knots_[i];
      const double h = (knots_[i + 1] - a) / 64.0;
      for (int k = 0; k < 64; ++k) {
        const double cand = a + k * h;
        const double d2 = (position(cand) - p).squaredNorm();
        if (d2 < best) {
          best = d2;
          nu = cand;
        }
      }
    }
    if ((position(length_) - p).squaredNorm() < best) nu = length_;
  }

  // Safeguarded Newton on f(nu) = 0.5 |s(nu) - p|^2.
  double dist2 = (position(nu) - p).squaredNorm();
  for (int it = 0; it < 50; ++it) {
    const Vec3 r = position(nu) - p;
    const Vec3 d1 = derivative(nu);
    const Vec3 d2v = second_derivative(nu);
    const double g = r.dot(d1);
    const double h = d1.squaredNorm() + r.dot(d2v);
    double step = (h > 1e-12) ? -g / h : -g;
    if (std::abs(step) < 1e-13) break;
    double next = clamp(nu + step, 0.0, length_);
    double next_dist2 = (position(next) - p).squaredNorm();
    int halvings = 0;
    while (next_dist2 > dist2 + 1e-15 && halvings < 30) {
      step *= 0.5;
      next = clamp(nu + step, 0.0, length_);
      next_dist2 = (position(next) - p).squaredNorm();
      ++halvings;
    }
    if (std::abs(next - nu) < 1e-13) break;
    nu = next;
    dist2 = next_dist2;
  }
  return ClosestPoint{nu, std::sqrt(dist2)};
}

ContouringApprox SplinePath::contouring_lag_approx(const Vec3& p,
                                                   double nu) const {
  const Vec3 d1 = derivative(nu);
  const double n1 = d1.norm();
  if (n1 < 1e-12) {
    throw SingularityError("degenerate path tangent");
  }
  const Vec3 that = d1 / n1;
  const Vec3 d2 = second_derivative(nu);
  const Vec3 dthat_dnu = (Mat3::Identity() - that * that.transpose()) * d2 / n1;

  const Vec3 r = position(nu) - p;

  ContouringApprox out;
  out.lag_signed = r.dot(that);
  out.dlag_signed_dp = -that;
  out.dlag_signed_dnu = n1 + r.dot(dthat_dnu);

  out.contour_vec = r - out.lag_signed * that;
  out.dcontour_vec_dp = -(Mat3::Identity() - that * that.transpose());
  out.dcontour_vec_dnu =
      d1 - out.dlag_signed_dnu * that - out.lag_signed * dthat_dnu;

  out.lag = std::abs(out.lag_signed);
  const double sl = out.lag_signed >= 0.0 ? 1.0 : -1.0;
  out.dlag_dp = sl * out.dlag_signed_dp;
  out.dlag_dnu = sl * out.dlag_signed_dnu;

  out.contour = out.contour_vec.norm();
  if (out.contour > 1e-15) {
    const Vec3 unit = out.contour_vec / out.contour;
    out.dcontour_dp = out.dcontour_vec_dp.transpose() * unit;
    out.dcontour_dnu = unit.dot(out.dcontour_vec_dnu);
  }
  return out;
}

}  // namespace mpcc_il
