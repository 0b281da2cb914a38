#include "stagekin/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace stagekin::geom {

double angle_between_deg(const Point3& u, const Point3& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu < 1e-12 || nv < 1e-12) {
    throw DegenerateInput("angle_between_deg: zero-length direction");
  }
  return rad2deg(std::atan2(u.cross(v).norm(), u.dot(v)));
}

RigidTransform RigidTransform::from_rt(const Eigen::Matrix3d& r,
                                       const Point3& t) {
  RigidTransform out;
  out.m.setIdentity();
  out.m.block<3, 3>(0, 0) = r;
  out.m.block<3, 1>(0, 3) = t;
  return out;
}

RigidTransform RigidTransform::translation(const Point3& t) {
  return from_rt(Eigen::Matrix3d::Identity(), t);
}

RigidTransform RigidTransform::rotation_about_axis(const Point3& point_on_axis,
                                                   const Point3& dir,
                                                   double angle_rad) {
  const double n = dir.norm();
  if (n < 1e-12) {
    throw DegenerateInput("rotation_about_axis: zero-length axis direction");
  }
  const Eigen::Matrix3d r =
      Eigen::AngleAxisd(angle_rad, dir / n).toRotationMatrix();
  return from_rt(r, point_on_axis - r * point_on_axis);
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
  RigidTransform out;
  out.m = m;
  out.validate();
  return out;
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Matrix3d rt = rotation().transpose();
  return from_rt(rt, -rt * translation_part());
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  RigidTransform out;
  out.m = m * rhs.m;
  return out;
}

Point3 RigidTransform::apply(const Point3& p) const {
  return rotation() * p + translation_part();
}

void RigidTransform::validate(double tol) const {
  if (!m.allFinite()) {
    throw DegenerateInput("rigid transform: non-finite entries");
  }
  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() >
      tol) {
    throw DegenerateInput("rigid transform: bottom row must be (0 0 0 1)");
  }
  const Eigen::Matrix3d r = rotation();
  if ((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() >
      tol) {
    throw DegenerateInput("rigid transform: rotation block not orthonormal");
  }
  if (std::abs(r.determinant() - 1.0) > tol) {
    throw DegenerateInput("rigid transform: det(R) must be +1");
  }
}

CoordinateSystem CoordinateSystem::from_origin_axes(const Point3& origin,
                                                    const Point3& x,
                                                    const Point3& y,
                                                    const Point3& z) {
  CoordinateSystem out;
  out.m.block<3, 1>(0, 0) = origin;
  out.m.block<3, 1>(0, 1) = origin + x;
  out.m.block<3, 1>(0, 2) = origin + y;
  out.m.block<3, 1>(0, 3) = origin + z;
  out.m.row(3).setOnes();
  out.validate();
  return out;
}

CoordinateSystem CoordinateSystem::from_matrix(const Eigen::Matrix4d& m) {
  CoordinateSystem out;
  out.m = m;
  out.validate();
  return out;
}

Point3 CoordinateSystem::axis(int i) const {
  return m.block<3, 1>(0, i + 1) - m.block<3, 1>(0, 0);
}

Eigen::Matrix3d CoordinateSystem::basis() const {
  Eigen::Matrix3d b;
  b.col(0) = axis(0);
  b.col(1) = axis(1);
  b.col(2) = axis(2);
  return b;
}

CoordinateSystem CoordinateSystem::transformed(const RigidTransform& t) const {
  CoordinateSystem out;
  out.m = t.m * m;
  return out;
}

void CoordinateSystem::validate(double tol) const {
  if (!m.allFinite()) {
    throw DegenerateInput("frame: non-finite entries");
  }
  if ((m.row(3) - Eigen::RowVector4d::Ones()).cwiseAbs().maxCoeff() > tol) {
    throw DegenerateInput("frame: last row must be all ones");
  }
  for (int i = 0; i < 3; ++i) {
    if (std::abs(axis(i).norm() - 1.0) > tol) {
      throw DegenerateInput("frame: basis vector not unit length");
    }
    for (int j = i + 1; j < 3; ++j) {
      if (std::abs(axis(i).dot(axis(j))) > tol) {
        throw DegenerateInput("frame: basis vectors not orthogonal");
      }
    }
  }
  if (std::abs(x_axis().cross(y_axis()).dot(z_axis()) - 1.0) > tol) {
    throw DegenerateInput("frame: basis is not right-handed");
  }
}

CoordinateSystem complete_right_handed_basis(const Point3& origin,
                                             const Point3& x_dir) {
  const double n = x_dir.norm();
  if (n < 1e-12) {
    throw DegenerateInput(
        "complete_right_handed_basis: zero-length x direction");
  }
  const Point3 x = x_dir / n;

  // World axis least parallel to x, ties resolved toward lower index.
  int least = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(x[i]) < std::abs(x[least])) least = i;
  }
  const Point3 helper = Point3::Unit(least);

  const Point3 y = (x.cross(helper)).cross(x).normalized();
  const Point3 z = x.cross(y);
  return CoordinateSystem::from_origin_axes(origin, x, y, z);
}

RigidTransform estimate_rigid_transform(std::span<const Point3> source,
                                        std::span<const Point3> target) {
  if (source.size() != target.size()) {
    throw DegenerateInput(
        "estimate_rigid_transform: source/target size mismatch");
  }
  const auto n = source.size();
  if (n < 3) {
    throw DegenerateInput(
        "estimate_rigid_transform: need at least 3 correspondences");
  }

  Point3 sc = Point3::Zero();
  Point3 tc = Point3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    sc += source[i];
    tc += target[i];
  }
  sc /= static_cast<double>(n);
  tc /= static_cast<double>(n);

  Eigen::Matrix3d cross_cov = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Point3 ds = source[i] - sc;
    cross_cov += ds * (target[i] - tc).transpose();
    scatter += ds * ds.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  const auto& ev = eig.eigenvalues();  // ascending
  if (ev(2) <= 0.0 || ev(1) <= ev(2) * 1e-20) {
    throw DegenerateInput(
        "estimate_rigid_transform: source points are collinear");
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      cross_cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0
                ? -1.0
                : 1.0;
  const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
  return RigidTransform::from_rt(r, tc - r * sc);
}

RigidTransform world_to_frame(const CoordinateSystem& cs) {
  const std::vector<Point3> from = {cs.origin(), cs.origin() + cs.x_axis(),
                                    cs.origin() + cs.y_axis(),
                                    cs.origin() + cs.z_axis()};
  const std::vector<Point3> to = {Point3::Zero(), Point3::UnitX(),
                                  Point3::UnitY(), Point3::UnitZ()};
  return estimate_rigid_transform(from, to);
}

Point3 change_basis_then_transform(const CoordinateSystem& cs_a,
                                   const RigidTransform& t_a,
                                   const Point3& subject) {
  const RigidTransform w = world_to_frame(cs_a);
  return w.inverse().apply(t_a.apply(w.apply(subject)));
}

CoordinateSystem change_basis_then_transform(const CoordinateSystem& cs_a,
                                             const RigidTransform& t_a,
                                             const CoordinateSystem& subject) {
  const RigidTransform w = world_to_frame(cs_a);
  return subject.transformed(w).transformed(t_a).transformed(w.inverse());
}

Point3 median_points(std::span<const Point3> points) {
  if (points.empty()) {
    throw DegenerateInput("median_points: empty point set");
  }
  Point3 out;
  std::vector<double> comp(points.size());
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < points.size(); ++i) comp[i] = points[i][c];
    std::sort(comp.begin(), comp.end());
    const std::size_t mid = comp.size() / 2;
    out[c] = (comp.size() % 2 == 1) ? comp[mid]
                                    : 0.5 * (comp[mid - 1] + comp[mid]);
  }
  return out;
}

}  // namespace stagekin::geom
