#include "mpcc_il/world.hpp"

#include <cmath>
#include <limits>

namespace mpcc_il {

Obstacle Obstacle::cylinder(const Vec2& center, double radius,
                            const Vec2& velocity) {
  if (!(radius > 0.0)) throw InvalidInputError("cylinder radius must be > 0");
  Obstacle o;
  o.kind = Kind::Cylinder;
  o.center = Vec3(center.x(), center.y(), 0.0);
  o.radius = radius;
  o.velocity = velocity;
  return o;
}

Obstacle Obstacle::box(const Vec3& center, const Vec3& half_extents,
                       const Vec2& velocity) {
  if (!(half_extents.minCoeff() > 0.0)) {
    throw InvalidInputError("box half extents must be > 0");
  }
  Obstacle o;
  o.kind = Kind::Box;
  o.center = center;
  o.half_extents = half_extents;
  o.velocity = velocity;
  return o;
}

double Obstacle::signed_distance(const Vec3& p) const {
  if (kind == Kind::Cylinder) {
    return (p.head<2>() - center.head<2>()).norm() - radius;
  }
  const Vec3 q = (p - center).cwiseAbs() - half_extents;
  const Vec3 outside = q.cwiseMax(0.0);
  return outside.norm() + std::min(q.maxCoeff(), 0.0);
}

Vec3 Obstacle::signed_distance_gradient(const Vec3& p) const {
  if (kind == Kind::Cylinder) {
    const Vec2 d = p.head<2>() - center.head<2>();
    const double n = d.norm();
    if (n < 1e-12) return Vec3::UnitX();
    return Vec3(d.x() / n, d.y() / n, 0.0);
  }
  // Central differences; the box SDF gradient is piecewise and this is only
  // used for soft avoidance costs.
  const double h = 1e-6;
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    Vec3 hi = p, lo = p;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (signed_distance(hi) - signed_distance(lo)) / (2.0 * h);
  }
  return g;
}

VecX Observation::to_vector() const {
  VecX o(5 + ranges.size());
  o << d.x(), d.y(), v.x(), v.y(), v.z(), ranges;
  return o;
}

Setpoint setpoint(const World& world, double t) {
  if (t < 0.0) throw InvalidInputError("setpoint time must be >= 0");
  const double along = world.setpoint_speed * t;
  const double l = world.guidance.length();
  const double nu = std::min(along, l);
  const PathFrame f = world.guidance.frame(nu);
  return Setpoint{f.point, f.heading, along >= l};
}

Vec2 guidance_offset(const Vec3& p, const Vec3& p_d, double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  const Vec3 r = p - p_d;
  // Row-vector product r^T R(heading); component x (along path) dropped.
  const double oy = -r.x() * s + r.y() * c;
  return Vec2(oy, r.z());
}

double ray_distance(const Vec3& origin, double angle, const World& world) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  double best = world.laser.max_range;

  for (const Obstacle& ob : world.obstacles) {
    if (ob.kind == Obstacle::Kind::Cylinder) {
      // 2D ray-circle intersection in the horizontal plane.
      const Vec2 oc = origin.head<2>() - ob.center.head<2>();
      const double b = oc.x() * c + oc.y() * s;
      const double q = oc.squaredNorm() - ob.radius * ob.radius;
      const double disc = b * b - q;
      if (disc < 0.0) continue;
      const double root = std::sqrt(disc);
      double t = -b - root;
      if (t < 0.0) t = -b + root;
      if (t >= 0.0 && t < best) best = t;
    } else {
      // Slab test against the axis-aligned box; the ray is horizontal, so
      // the z slab reduces to a containment check.
      const Vec3 lo = ob.center - ob.half_extents;
      const Vec3 hi = ob.center + ob.half_extents;
      if (origin.z() < lo.z() || origin.z() > hi.z()) continue;
      double tmin = 0.0;
      double tmax = best;
      bool hit = true;
      const double dir[2] = {c, s};
      for (int axis = 0; axis < 2 && hit; ++axis) {
        if (std::abs(dir[axis]) < 1e-15) {
          if (origin[axis] < lo[axis] || origin[axis] > hi[axis]) hit = false;
          continue;
        }
        double t0 = (lo[axis] - origin[axis]) / dir[axis];
        double t1 = (hi[axis] - origin[axis]) / dir[axis];
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
        if (tmin > tmax) hit = false;
      }
      if (hit && tmin < best) best = tmin;
    }
  }
  return best;
}

VecX raycast(const QuadState& state, const World& world) {
  const int n = world.laser.num_rays;
  VecX readings(n);
  // Fan symmetric about yaw, endpoints included.
  for (int i = 0; i < n; ++i) {
    const double frac = n > 1 ? static_cast<double>(i) / (n - 1) - 0.5 : 0.0;
    const double angle = state.yaw + world.laser.fov * frac;
    readings[i] = ray_distance(state.p, angle, world);
  }
  return readings;
}

Observation observe(const QuadState& state, const World& world, double t,
                    double vz_est) {
  const Setpoint sp = setpoint(world, t);
  Observation o;
  o.d = guidance_offset(state.p, sp.point, sp.heading);
  const double c = std::cos(sp.heading);
  const double s = std::sin(sp.heading);
  // Planar velocity in the guidance frame (row-vector product).
  o.v = Vec3(state.v.x() * c + state.v.y() * s,
             -state.v.x() * s + state.v.y() * c, vz_est);
  o.ranges = raycast(state, world);
  return o;
}

double yaw_pd(const QuadState& state, double heading, const YawGains& gains,
              double yaw_rate_limit, double yaw_rate_est) {
  const double err = wrap_angle(heading - state.yaw);
  const double cmd = gains.kp * err - gains.kd * yaw_rate_est;
  return clamp(cmd, -yaw_rate_limit, yaw_rate_limit);
}

double min_obstacle_distance(const Vec3& p, const World& world) {
  double best = std::numeric_limits<double>::infinity();
  for (const Obstacle& ob : world.obstacles) {
    best = std::min(best, ob.signed_distance(p));
  }
  return best;
}

bool collision(const QuadState& state, const World& world, double margin) {
  if (margin < 0.0) throw InvalidInputError("collision margin must be >= 0");
  return min_obstacle_distance(state.p, world) < margin;
}

World advance_obstacles(const World& world, double dt) {
  World next = world;
  for (Obstacle& ob : next.obstacles) {
    ob.center.head<2>() += ob.velocity * dt;
  }
  next.time += dt;
  return next;
}

}  // namespace mpcc_il
