#include "vjcal/transform.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vjcal {

Transform Transform::from_translation(const Vec3& t) {
  Transform out;
  out.translation = t;
  return out;
}

Transform Transform::from_rotation(const Mat3& r) {
  Transform out;
  out.rotation = r;
  return out;
}

Transform Transform::inverse() const {
  Transform out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

Mat4 Transform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Transform compose(const Transform& a, const Transform& b) {
  Transform out;
  out.rotation.noalias() = a.rotation * b.rotation;
  out.translation.noalias() = a.rotation * b.translation;
  out.translation += a.translation;
  return out;
}

bool is_valid_rotation(const Mat3& r, double tol) {
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

VirtualJointParams VirtualJointParams::from_vector(const Vector6& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

Vector6 VirtualJointParams::as_vector() const {
  Vector6 v;
  v << zeta, xi, chi, x, y, z;
  return v;
}

double VirtualJointParams::operator[](int k) const {
  switch (k) {
    case 0: return zeta;
    case 1: return xi;
    case 2: return chi;
    case 3: return x;
    case 4: return y;
    case 5: return z;
    default: throw std::out_of_range("VirtualJointParams index " + std::to_string(k));
  }
}

double& VirtualJointParams::operator[](int k) {
  switch (k) {
    case 0: return zeta;
    case 1: return xi;
    case 2: return chi;
    case 3: return x;
    case 4: return y;
    case 5: return z;
    default: throw std::out_of_range("VirtualJointParams index " + std::to_string(k));
  }
}

Mat3 rot_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return r;
}

Mat3 rot_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return r;
}

Mat3 rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return r;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(),
       v.z(), 0, -v.x(),
       -v.y(), v.x(), 0;
  return m;
}

Transform from_params(const VirtualJointParams& p) {
  Transform out;
  out.rotation = rot_x(p.zeta) * rot_y(p.xi) * rot_z(p.chi);
  out.translation = Vec3(p.x, p.y, p.z);
  return out;
}

Mat4 d_from_params(const VirtualJointParams& p, int component) {
  Mat4 d = Mat4::Zero();
  if (component >= 3 && component <= 5) {
    d(component - 3, 3) = 1.0;
    return d;
  }
  // d/dangle R(angle) = generator * R(angle) for a rotation about a fixed axis
  const Mat3 rx = rot_x(p.zeta), ry = rot_y(p.xi), rz = rot_z(p.chi);
  Mat3 dr;
  switch (component) {
    case 0: dr = skew(Vec3::UnitX()) * rx * ry * rz; break;
    case 1: dr = rx * skew(Vec3::UnitY()) * ry * rz; break;
    case 2: dr = rx * ry * skew(Vec3::UnitZ()) * rz; break;
    default:
      throw std::out_of_range("d_from_params component " + std::to_string(component));
  }
  d.topLeftCorner<3, 3>() = dr;
  return d;
}

Mat3 axis_rotation(const Vec3& a, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r = c * Mat3::Identity();
  r += s * skew(a);
  r += (1.0 - c) * (a * a.transpose());
  return r;
}

Transform rot_about_axis(const Vec3& axis, double angle) {
  if (std::abs(axis.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("rot_about_axis: axis is not unit length (norm " +
                                std::to_string(axis.norm()) + ")");
  }
  return Transform::from_rotation(axis_rotation(axis, angle));
}

}  // namespace vjcal
