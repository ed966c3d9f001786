#pragma once

#include "vjcal/parameters.hpp"
#include "vjcal/robot_model.hpp"

#include <array>

namespace vjcal {

/// Joint origins and orientations of the nominal chain at q, global frame.
struct NominalFrames {
  std::array<Vec3, kNumJoints> origin;       // position of joint i
  std::array<Mat3, kNumJoints> orientation;  // frame after joint i's rotation
  std::array<Vec3, kNumJoints> axis;         // joint axis, global
  std::array<Vec3, kNumJoints> link;         // link translation t_i, global
};

NominalFrames nominal_frames(const RobotDescription& desc, const JointState& q);

/// Gravity torque on every joint (N*mm, global frame) from lumped link
/// masses placed at ratio r_i along each link, using the nominal chain:
///   tau_i = sum_{j >= i} m_j (p_j + r_j t_j - p_i) x g.
std::array<Vec3, kNumJoints> link_torques(const RobotDescription& desc, const JointState& q,
                                          const std::array<double, kNumJoints>& masses,
                                          const std::array<double, kNumJoints>& com_ratio);

/// Torque components about each joint's own axis (tau*_i).
std::array<double, kNumJoints> projected_torques(const RobotDescription& desc, const JointState& q,
                                                 const std::array<double, kNumJoints>& masses,
                                                 const std::array<double, kNumJoints>& com_ratio);

/// Spring deflections p*_C,i = k_i tau*_i (rad). Joint 1 is always 0.
std::array<double, kNumJoints> compliance_deflections(const RobotDescription& desc, const JointState& q,
                                                      const ParameterVector& theta);

struct CompliancePartials {
  /// d p*_C,i / d m_j, row i, column j (all six masses, including frozen m6).
  Eigen::Matrix<double, kNumJoints, kNumJoints> d_mass = Eigen::Matrix<double, kNumJoints, kNumJoints>::Zero();
  /// d p*_C,i / d k_i = tau*_i (the derivative w.r.t. k_j, j != i, is zero).
  Vector6 d_compliance = Vector6::Zero();
};

CompliancePartials compliance_partials(const RobotDescription& desc, const JointState& q,
                                       const ParameterVector& theta);

/// Thermal virtual joint of link i (0-based): pure translation alpha_i (kappa - kappa0) t_i.
VirtualJointParams thermal_params(const RobotDescription& desc, const ParameterVector& theta,
                                  const EnvState& env, int link_index);

/// d p_T,i / d alpha_i = (kappa - kappa0) t_i as a translation.
Vec3 thermal_params_derivative(const RobotDescription& desc, const ParameterVector& theta,
                               const EnvState& env, int link_index);

/// Translation slot (0..2) along a joint axis: its largest-magnitude component.
int axial_slot(const Vec3& axis);

/// Geometric virtual joint. Index 0 is the base (six free values), 1..6 the
/// joints (five free values, zero at the axial translation slot).
VirtualJointParams geo_params(const RobotDescription& desc, const ParameterVector& theta, int index);

/// Selection matrix d p_G / d theta_G for `index` (6x6 for the base, 6x5 otherwise).
Eigen::MatrixXd geo_params_jacobian(const RobotDescription& desc, int index);

/// Maps the k-th free value (0..4) of joint block `joint` (0-based) to its
/// slot in the six-vector of virtual joint parameters.
int geo_free_to_slot(const RobotDescription& desc, int joint, int k);

}  // namespace vjcal
