#include "vjcal/submodels.hpp"

#include <cmath>
#include <stdexcept>

namespace vjcal {

NominalFrames nominal_frames(const RobotDescription& desc, const JointState& q) {
  NominalFrames f;
  Transform current = desc.base;
  for (int i = 0; i < kNumJoints; ++i) {
    const Vec3& a = desc.joints[i].axis;
    f.origin[i] = current.translation;
    f.axis[i] = current.rotation * a;
    current.rotation = current.rotation * axis_rotation(a, q[i]);
    f.orientation[i] = current.rotation;
    f.link[i] = current.rotation * desc.links[i];
    current.translation += f.link[i];
  }
  return f;
}

namespace {

// (c_j - p_i) x g, the torque lever of a unit mass on link j about joint i.
Vec3 unit_mass_torque(const NominalFrames& f, const Vec3& g, const std::array<double, kNumJoints>& r,
                      int i, int j) {
  const Vec3 com = f.origin[j] + r[j] * f.link[j];
  return (com - f.origin[i]).cross(g);
}

}  // namespace

std::array<Vec3, kNumJoints> link_torques(const RobotDescription& desc, const JointState& q,
                                          const std::array<double, kNumJoints>& masses,
                                          const std::array<double, kNumJoints>& com_ratio) {
  const NominalFrames f = nominal_frames(desc, q);
  std::array<Vec3, kNumJoints> tau;
  for (int i = 0; i < kNumJoints; ++i) {
    tau[i].setZero();
    for (int j = i; j < kNumJoints; ++j) {
      tau[i] += masses[j] * unit_mass_torque(f, desc.gravity, com_ratio, i, j);
    }
  }
  return tau;
}

std::array<double, kNumJoints> projected_torques(const RobotDescription& desc, const JointState& q,
                                                 const std::array<double, kNumJoints>& masses,
                                                 const std::array<double, kNumJoints>& com_ratio) {
  const NominalFrames f = nominal_frames(desc, q);
  std::array<double, kNumJoints> out{};
  for (int i = 0; i < kNumJoints; ++i) {
    Vec3 tau = Vec3::Zero();
    for (int j = i; j < kNumJoints; ++j) {
      tau += masses[j] * unit_mass_torque(f, desc.gravity, com_ratio, i, j);
    }
    out[i] = f.axis[i].dot(tau);
  }
  return out;
}

std::array<double, kNumJoints> compliance_deflections(const RobotDescription& desc, const JointState& q,
                                                      const ParameterVector& theta) {
  const auto tau = projected_torques(desc, q, theta.all_masses(), theta.constants.com_ratio);
  const auto k = theta.all_compliances();
  std::array<double, kNumJoints> out{};
  for (int i = 1; i < kNumJoints; ++i) out[i] = k[i] * tau[i];
  return out;
}

CompliancePartials compliance_partials(const RobotDescription& desc, const JointState& q,
                                       const ParameterVector& theta) {
  const NominalFrames f = nominal_frames(desc, q);
  const auto m = theta.all_masses();
  const auto k = theta.all_compliances();
  const auto& r = theta.constants.com_ratio;
  CompliancePartials out;
  for (int i = 1; i < kNumJoints; ++i) {
    double tau_star = 0.0;
    for (int j = i; j < kNumJoints; ++j) {
      const double lever = f.axis[i].dot(unit_mass_torque(f, desc.gravity, r, i, j));
      out.d_mass(i, j) = k[i] * lever;
      tau_star += m[j] * lever;
    }
    out.d_compliance[i] = tau_star;
  }
  return out;
}

VirtualJointParams thermal_params(const RobotDescription& desc, const ParameterVector& theta,
                                  const EnvState& env, int link_index) {
  const Vec3 t = theta.thermal[link_index] * thermal_params_derivative(desc, theta, env, link_index);
  VirtualJointParams p;
  p.x = t.x();
  p.y = t.y();
  p.z = t.z();
  return p;
}

Vec3 thermal_params_derivative(const RobotDescription& desc, const ParameterVector& theta,
                               const EnvState& env, int link_index) {
  return (env.kappa - theta.constants.kappa0) * desc.links[link_index];
}

int axial_slot(const Vec3& axis) {
  int slot = 0;
  axis.cwiseAbs().maxCoeff(&slot);
  return slot;
}

int geo_free_to_slot(const RobotDescription& desc, int joint, int k) {
  const int skip = 3 + axial_slot(desc.joints[joint].axis);
  return k < skip ? k : k + 1;
}

VirtualJointParams geo_params(const RobotDescription& desc, const ParameterVector& theta, int index) {
  if (index == 0) return VirtualJointParams::from_vector(theta.base_geo);
  if (index < 0 || index > kNumJoints) throw std::out_of_range("geo_params index");
  const int joint = index - 1;
  Vector6 v = Vector6::Zero();
  for (int k = 0; k < 5; ++k) v[geo_free_to_slot(desc, joint, k)] = theta.joint_geo[joint][k];
  return VirtualJointParams::from_vector(v);
}

Eigen::MatrixXd geo_params_jacobian(const RobotDescription& desc, int index) {
  if (index == 0) return Eigen::MatrixXd::Identity(6, 6);
  if (index < 0 || index > kNumJoints) throw std::out_of_range("geo_params_jacobian index");
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(6, 5);
  for (int k = 0; k < 5; ++k) s(geo_free_to_slot(desc, index - 1, k), k) = 1.0;
  return s;
}

}  // namespace vjcal
