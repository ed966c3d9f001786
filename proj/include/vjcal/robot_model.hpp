#pragma once

#include "vjcal/parameters.hpp"
#include "vjcal/transform.hpp"

#include <array>
#include <bitset>
#include <string>
#include <vector>

namespace vjcal {

struct JointSpec {
  Vec3 axis = Vec3::UnitZ();  // unit vector in the joint's local frame
  double q_min_hw = -M_PI;    // hardware limits (rad)
  double q_max_hw = M_PI;
};

/// Nominal 6R chain: base * prod_i(Rot(axis_i, q_i) * Trans(t_i)) * tcp_local.
struct RobotDescription {
  std::string name;
  Transform base;
  Transform tcp_local;
  std::array<JointSpec, kNumJoints> joints{};
  std::array<Vec3, kNumJoints> links{};  // t_1..t_6 (mm)
  Vec3 gravity{0.0, 0.0, 9.81};           // m/s^2, global frame

  /// Throws InputError naming the offending field.
  void validate() const;
};

using JointState = Vector6;  // q (rad)

struct EnvState {
  double kappa = 25.0;  // ambient temperature (deg C)
};

/// Per-joint flags raised when a commanded angle lies outside the support
/// of its joint-correction curve.
using SupportFlags = std::bitset<kNumJoints>;

Transform fk_nominal(const RobotDescription& desc, const JointState& q);

/// The ordered factors of the augmented chain:
///   base, G_0, then per joint (joint, J, C, G, T, link), then tcp_local.
/// `factors.size() == kChainLength`.
struct AugmentedChain {
  static constexpr int kBase = 0;
  static constexpr int kBaseGeo = 1;
  static constexpr int kPerJoint = 6;
  enum Slot { kJoint = 0, kJointCorr = 1, kCompliance = 2, kGeo = 3, kThermal = 4, kLink = 5 };
  static constexpr int kTcp = 2 + kPerJoint * kNumJoints;
  static constexpr int kChainLength = kTcp + 1;

  static constexpr int index(int joint, Slot slot) { return 2 + kPerJoint * joint + slot; }

  std::vector<Transform> factors;
  std::array<CurveSample, kNumJoints> joint_corr{};  // p*_J and interpolation weights
  std::array<double, kNumJoints> deflection{};       // p*_C
  SupportFlags out_of_support;
};

AugmentedChain build_augmented_chain(const RobotDescription& desc, const JointState& q, const EnvState& env,
                                     const ParameterVector& theta);

Transform fk_augmented(const RobotDescription& desc, const JointState& q, const EnvState& env,
                       const ParameterVector& theta, SupportFlags* flags = nullptr);

/// KR30-class example arm with principal joint axes and about 2033 mm reach.
RobotDescription example_description();

}  // namespace vjcal
