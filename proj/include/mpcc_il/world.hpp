#pragma once

#include <vector>

#include "mpcc_il/dynamics.hpp"
#include "mpcc_il/spline.hpp"

namespace mpcc_il {

// Vertical cylinder (unbounded height) or axis-aligned box, optionally
// moving with a constant planar velocity.
struct Obstacle {
  enum class Kind { Cylinder, Box };

  Kind kind = Kind::Cylinder;
  Vec3 center = Vec3::Zero();        // cylinder: z ignored
  double radius = 0.2;               // cylinder only [m]
  Vec3 half_extents = Vec3::Zero();  // box only [m]
  Vec2 velocity = Vec2::Zero();      // [m/s]

  static Obstacle cylinder(const Vec2& center, double radius,
                           const Vec2& velocity = Vec2::Zero());
  static Obstacle box(const Vec3& center, const Vec3& half_extents,
                      const Vec2& velocity = Vec2::Zero());

  // Signed distance from p to the obstacle surface (negative inside).
  double signed_distance(const Vec3& p) const;
  // Gradient of the signed distance (unit direction away from the surface).
  Vec3 signed_distance_gradient(const Vec3& p) const;
};

struct LaserParams {
  int num_rays = 40;
  double fov = kPi;       // symmetric about yaw [rad]
  double max_range = 5.0;  // [m]
};

// Guidance spline, obstacles and the moving-setpoint parameters. A value
// type: advancing obstacles returns a new world.
struct World {
  SplinePath guidance;
  std::vector<Obstacle> obstacles;
  double setpoint_speed = 1.3;  // [m/s]
  double time = 0.0;            // [s]
  LaserParams laser;
};

struct Setpoint {
  Vec3 point;
  double heading;
  bool complete;  // setpoint reached the end of the guidance
};

// Policy input: guidance offset (y,z), velocity in the guidance frame and
// the range readings. Always carries the full 45 features; reduced policy
// input modes select a prefix.
struct Observation {
  Vec2 d = Vec2::Zero();
  Vec3 v = Vec3::Zero();
  VecX ranges;

  VecX to_vector() const;
  static constexpr int kDim = 45;
};

// Setpoint moving along the guidance with constant speed, clamped at the end.
Setpoint setpoint(const World& world, double t);

// Offset (p - p_d) R(heading); the along-path component is dropped and the
// lateral/vertical pair returned. R is the rotation about z by `heading`
// applied as a row-vector product.
Vec2 guidance_offset(const Vec3& p, const Vec3& p_d, double heading);

// Horizontal-fan range readings at the quadrotor height, symmetric about
// yaw. Readings are exact intersection distances clipped to max range; no
// noise is added.
VecX raycast(const QuadState& state, const World& world);

// Distance along a single ray to the nearest obstacle, or max_range.
double ray_distance(const Vec3& origin, double angle, const World& world);

// Assembles the observation from the full state. `vz_est` is the last
// commanded vertical rate (the model carries no z velocity state).
Observation observe(const QuadState& state, const World& world, double t,
                    double vz_est = 0.0);

struct YawGains {
  double kp = 2.0;
  double kd = 0.0;
};

// Heading-hold command: kp * wrap(heading - yaw) - kd * yaw_rate_est,
// clipped to the input limit.
double yaw_pd(const QuadState& state, double heading, const YawGains& gains,
              double yaw_rate_limit, double yaw_rate_est = 0.0);

// True iff p is strictly within `margin` of any obstacle surface.
bool collision(const QuadState& state, const World& world, double margin);

// Minimum signed distance from p to any obstacle (infinity when none).
double min_obstacle_distance(const Vec3& p, const World& world);

// Obstacle centers translated by velocity * dt; world time advanced.
World advance_obstacles(const World& world, double dt);

}  // namespace mpcc_il
