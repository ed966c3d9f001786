#pragma once

#include "vjcal/parameters.hpp"
#include "vjcal/robot_model.hpp"

#include <vector>

namespace vjcal {

/// Factor list of a chain with cached prefix and suffix products, so that
/// prefix[k] * factors[k] * suffix[k] is the full product for every k.
struct ChainCache {
  std::vector<Transform> factors;
  std::vector<Transform> prefix;
  std::vector<Transform> suffix;

  static ChainCache build(std::vector<Transform> factors);
  Transform full() const;

  /// Position change of the chain end when factor k moves by d_rotation /
  /// d_translation (both derivatives of that factor).
  Vec3 position_derivative(int k, const Mat3& d_rotation, const Vec3& d_translation) const;
  /// Same for a factor that rotates about its local unit `axis`.
  Vec3 axis_rotation_derivative(int k, const Vec3& axis) const;
};

/// Nonzero columns of the 3 x n position Jacobian of one sample.
struct SparseJacobian {
  Vec3 position = Vec3::Zero();             // predicted tool position (mm)
  std::vector<int> columns;                 // flat parameter indices
  Eigen::Matrix<double, 3, Eigen::Dynamic> values;  // one column per entry of `columns`
  SupportFlags out_of_support;

  Eigen::MatrixXd to_dense(int n_free) const;
};

/// d t_pred / d theta for the free parameters in `layout`, by propagating
/// each factor's derivative through the cached chain. Mass columns sum over
/// every compliance joint at or before the mass's link.
SparseJacobian sparse_position_jacobian(const RobotDescription& desc, const JointState& q, const EnvState& env,
                                        const ParameterVector& theta, const ParameterLayout& layout);

Eigen::MatrixXd position_jacobian(const RobotDescription& desc, const JointState& q, const EnvState& env,
                                  const ParameterVector& theta, const ParameterLayout& layout);

/// d t / d q_i of the nominal chain (mm/rad).
Vec3 nominal_joint_sensitivity(const RobotDescription& desc, const JointState& q, int joint_index);

/// d t_pred / d q_i of the augmented chain through the joint's own rotation,
/// with the virtual-joint values held fixed.
Vec3 augmented_joint_sensitivity(const RobotDescription& desc, const JointState& q, const EnvState& env,
                                 const ParameterVector& theta, int joint_index);

}  // namespace vjcal
