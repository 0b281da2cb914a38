#pragma once

#include <span>

#include "stagekin/geometry.hpp"

namespace stagekin::fitting {

using geom::Point3;

/// Result of an algebraic least-squares sphere fit.
struct SphereFit {
  Point3 center = Point3::Zero();
  double radius = 0.0;        // mm
  double rms_residual = 0.0;  // mm, geometric (distance-to-surface) RMS
};

/// Circle through three 3D points.
struct CircleFit {
  Point3 center = Point3::Zero();
  double radius = 0.0;  // mm
  Point3 normal = Point3::UnitZ();
};

/// Fits a sphere to at least four non-coplanar points by solving the
/// linearized sphere equation in a least-squares sense. Exact on
/// noise-free spherical samples. Throws DegenerateInput for too few or
/// coplanar points and ConditioningError (with the condition number) when
/// the system is numerically untrustworthy.
SphereFit fit_sphere_lsq(std::span<const Point3> points);

/// The unique circle through three pairwise distinct, non-collinear
/// points. The normal is normalize((p2 - p1) x (p3 - p1)).
CircleFit fit_circle_3pt(const Point3& p1, const Point3& p2, const Point3& p3);

/// Unit normal of the plane through three points, oriented along
/// (p_a - p_b) x (p_a - p_c).
Point3 plane_normal(const Point3& p_a, const Point3& p_b, const Point3& p_c);

}  // namespace stagekin::fitting
