#include "stagekin/fitting.hpp"

#include <cmath>

namespace stagekin::fitting {

SphereFit fit_sphere_lsq(std::span<const Point3> points) {
  const auto n = points.size();
  if (n < 4) {
    throw DegenerateInput("fit_sphere_lsq: need at least 4 points");
  }

  // (x-x0)^2 + (y-y0)^2 + (z-z0)^2 = r^2 rearranged to
  // 2x*x0 + 2y*y0 + 2z*z0 + (r^2 - |c|^2) = |p|^2.
  Eigen::MatrixXd a(n, 4);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, 0) = 2.0 * points[i].x();
    a(i, 1) = 2.0 * points[i].y();
    a(i, 2) = 2.0 * points[i].z();
    a(i, 3) = 1.0;
    b(i) = points[i].squaredNorm();
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(3) <= sv(0) * 1e-12) {
    throw DegenerateInput("fit_sphere_lsq: points are coplanar");
  }
  const double cond = sv(0) / sv(3);
  if (cond > 1e12) {
    throw ConditioningError("fit_sphere_lsq: ill-conditioned system", cond);
  }

  const Eigen::Vector4d x = svd.solve(b);
  SphereFit fit;
  fit.center = x.head<3>();
  const double r2 = x(3) + fit.center.squaredNorm();
  if (!(r2 > 0.0)) {
    throw DegenerateInput("fit_sphere_lsq: non-positive squared radius");
  }
  fit.radius = std::sqrt(r2);

  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (points[i] - fit.center).norm() - fit.radius;
    ss += d * d;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

CircleFit fit_circle_3pt(const Point3& p1, const Point3& p2,
                         const Point3& p3) {
  const Point3 v1 = p2 - p1;
  const Point3 v2 = p3 - p1;
  const Point3 cp = v1.cross(v2);
  const double cpn = cp.norm();
  if (cpn <= 1e-12 * v1.norm() * v2.norm() || cpn == 0.0) {
    throw DegenerateInput("fit_circle_3pt: points are collinear or repeated");
  }

  // Circumcenter as p1 + k1*v1 + k2*v2 within the plane of the points.
  const double v11 = v1.squaredNorm();
  const double v22 = v2.squaredNorm();
  const double v12 = v1.dot(v2);
  const double base = 0.5 / (v11 * v22 - v12 * v12);
  const double k1 = base * v22 * (v11 - v12);
  const double k2 = base * v11 * (v22 - v12);

  CircleFit fit;
  fit.center = p1 + k1 * v1 + k2 * v2;
  fit.radius = (fit.center - p1).norm();
  fit.normal = cp / cpn;
  return fit;
}

Point3 plane_normal(const Point3& p_a, const Point3& p_b, const Point3& p_c) {
  const Point3 u = p_a - p_b;
  const Point3 v = p_a - p_c;
  const Point3 cp = u.cross(v);
  const double cpn = cp.norm();
  if (cpn <= 1e-12 * u.norm() * v.norm() || cpn == 0.0) {
    throw DegenerateInput("plane_normal: points are collinear");
  }
  return cp / cpn;
}

}  // namespace stagekin::fitting
