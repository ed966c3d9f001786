#pragma once

#include <Eigen/Dense>

#include <array>

namespace vjcal {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vector6 = Eigen::Matrix<double, 6, 1>;

/// Rigid-body transform. Translations are in millimetres.
struct Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Transform identity() { return {}; }
  static Transform from_translation(const Vec3& t);
  static Transform from_rotation(const Mat3& r);

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Transform inverse() const;
  Mat4 matrix() const;
};

Transform compose(const Transform& a, const Transform& b);
inline Transform operator*(const Transform& a, const Transform& b) { return compose(a, b); }

/// True when R^T R = I and det R = 1 within `tol`.
bool is_valid_rotation(const Mat3& r, double tol = 1e-12);

/// Six parameters of a virtual joint: three Euler angles (rad) and a
/// translation (mm). The rotation is R = Rx(zeta) * Ry(xi) * Rz(chi) and the
/// resulting transform is [R | (x, y, z)].
struct VirtualJointParams {
  double zeta = 0.0;
  double xi = 0.0;
  double chi = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static VirtualJointParams from_vector(const Vector6& v);
  Vector6 as_vector() const;
  double operator[](int k) const;
  double& operator[](int k);
};

Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);
Mat3 skew(const Vec3& v);

Transform from_params(const VirtualJointParams& p);

/// Analytic d from_params(p) / d p[component] as a homogeneous 4x4 matrix
/// (bottom row zero). Components 0..2 are the angles, 3..5 the translation.
Mat4 d_from_params(const VirtualJointParams& p, int component);

/// Rodrigues rotation about a unit axis. Throws std::invalid_argument when
/// |axis| deviates from 1 by more than 1e-9.
Transform rot_about_axis(const Vec3& axis, double angle);

/// Rotation matrix about a unit axis without the norm check (hot path).
Mat3 axis_rotation(const Vec3& unit_axis, double angle);

}  // namespace vjcal
