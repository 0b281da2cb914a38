#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "stagekin/errors.hpp"

namespace stagekin::geom {

using Point3 = Eigen::Vector3d;

inline constexpr double kFrameTol = 1e-9;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * (kPi / 180.0); }
inline double rad2deg(double rad) { return rad * (180.0 / kPi); }

/// Angle between two directions in degrees, in (0, 180). Stable for nearly
/// parallel and nearly antiparallel inputs.
double angle_between_deg(const Point3& u, const Point3& v);

/// Rigid isometry as a 4x4 homogeneous matrix: rotation block R with
/// det(R) = +1, translation column t, bottom row (0 0 0 1).
struct RigidTransform {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_rt(const Eigen::Matrix3d& r, const Point3& t);
  static RigidTransform translation(const Point3& t);
  /// Rotation by `angle_rad` about the line through `point_on_axis` with
  /// direction `dir` (right-handed).
  static RigidTransform rotation_about_axis(const Point3& point_on_axis,
                                            const Point3& dir,
                                            double angle_rad);
  /// Validating constructor for matrices from untrusted sources.
  static RigidTransform from_matrix(const Eigen::Matrix4d& m);

  Eigen::Matrix3d rotation() const { return m.block<3, 3>(0, 0); }
  Point3 translation_part() const { return m.block<3, 1>(0, 3); }

  RigidTransform inverse() const;
  RigidTransform operator*(const RigidTransform& rhs) const;
  Point3 apply(const Point3& p) const;

  /// Throws DegenerateInput unless R'R = I and det(R) = +1 within tolerance.
  void validate(double tol = kFrameTol) const;
};

/// A coordinate frame stored as four homogeneous *position* columns:
/// column 0 is the origin, columns 1-3 are the positions the unit basis
/// vectors point to, all expressed in the parent frame. The last row is
/// all ones, so a rigid transform applied on the left moves origin and
/// axis tips alike and the basis can be read back off directly.
struct CoordinateSystem {
  Eigen::Matrix4d m = (Eigen::Matrix4d() << 0, 1, 0, 0,  //
                       0, 0, 1, 0,                       //
                       0, 0, 0, 1,                       //
                       1, 1, 1, 1)
                          .finished();

  /// The parent frame expressed in itself (origin at zero, unit axis tips).
  static CoordinateSystem world() { return {}; }
  static CoordinateSystem from_origin_axes(const Point3& origin,
                                           const Point3& x, const Point3& y,
                                           const Point3& z);
  static CoordinateSystem from_matrix(const Eigen::Matrix4d& m);

  Point3 origin() const { return m.block<3, 1>(0, 0); }
  /// Unit basis vector i (0 = x, 1 = y, 2 = z), tip minus origin.
  Point3 axis(int i) const;
  Point3 x_axis() const { return axis(0); }
  Point3 y_axis() const { return axis(1); }
  Point3 z_axis() const { return axis(2); }
  /// 3x3 matrix whose columns are the basis vectors.
  Eigen::Matrix3d basis() const;

  CoordinateSystem transformed(const RigidTransform& t) const;

  /// Throws DegenerateInput unless the basis is orthonormal and
  /// right-handed within `tol` and the bottom row is all ones.
  void validate(double tol = kFrameTol) const;
};

/// Builds a right-handed orthonormal frame whose x-axis is
/// normalize(x_dir). The remaining axes are chosen deterministically: the
/// world axis least parallel to x is orthogonalized against it via cross
/// products.
CoordinateSystem complete_right_handed_basis(const Point3& origin,
                                             const Point3& x_dir);

/// Least-squares rigid transform mapping `source` onto `target`
/// (matched correspondences, SVD of the cross-covariance, sign-corrected
/// so det(R) = +1). Throws DegenerateInput for fewer than three points,
/// mismatched lengths, or collinear sources.
RigidTransform estimate_rigid_transform(std::span<const Point3> source,
                                        std::span<const Point3> target);

/// The transform that re-expresses parent-frame coordinates in `cs`
/// (registration of the frame's four position columns onto the world
/// frame's columns).
RigidTransform world_to_frame(const CoordinateSystem& cs);

/// Conjugates `subject` by the basis change into `cs_a`: expresses it in
/// cs_a, applies `t_a` there, and maps the result back to the parent
/// frame.
Point3 change_basis_then_transform(const CoordinateSystem& cs_a,
                                   const RigidTransform& t_a,
                                   const Point3& subject);
CoordinateSystem change_basis_then_transform(const CoordinateSystem& cs_a,
                                             const RigidTransform& t_a,
                                             const CoordinateSystem& subject);

/// Component-wise median; even-sized sets average the two middle values.
Point3 median_points(std::span<const Point3> points);

}  // namespace stagekin::geom
