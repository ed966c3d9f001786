#include "vjcal/robot_model.hpp"

#include "vjcal/errors.hpp"
#include "vjcal/submodels.hpp"

#include <cmath>
#include <string>

namespace vjcal {

void RobotDescription::validate() const {
  auto finite = [](const auto& m) { return m.allFinite(); };
  if (!finite(base.rotation) || !finite(base.translation) || !is_valid_rotation(base.rotation, 1e-9)) {
    throw InputError("robot description: 'base' is not a valid rigid transform");
  }
  if (!finite(tcp_local.rotation) || !finite(tcp_local.translation) ||
      !is_valid_rotation(tcp_local.rotation, 1e-9)) {
    throw InputError("robot description: 'tcp_local' is not a valid rigid transform");
  }
  for (int i = 0; i < kNumJoints; ++i) {
    const std::string key = "joints[" + std::to_string(i) + "]";
    const auto& j = joints[i];
    if (!finite(j.axis) || std::abs(j.axis.norm() - 1.0) > 1e-9) {
      throw InputError("robot description: '" + key + ".axis' must be a unit vector");
    }
    if (!(j.q_min_hw < j.q_max_hw)) {
      throw InputError("robot description: '" + key + ".limits' must satisfy q_min < q_max");
    }
    if (!finite(links[i])) {
      throw InputError("robot description: 'links[" + std::to_string(i) + "]' is not finite");
    }
  }
  if (!finite(gravity)) throw InputError("robot description: 'gravity' is not finite");
}

Transform fk_nominal(const RobotDescription& desc, const JointState& q) {
  Transform t = desc.base;
  for (int i = 0; i < kNumJoints; ++i) {
    t = t * Transform::from_rotation(axis_rotation(desc.joints[i].axis, q[i]));
    t = t * Transform::from_translation(desc.links[i]);
  }
  return t * desc.tcp_local;
}

AugmentedChain build_augmented_chain(const RobotDescription& desc, const JointState& q, const EnvState& env,
                                     const ParameterVector& theta) {
  AugmentedChain chain;
  chain.factors.resize(AugmentedChain::kChainLength);
  chain.factors[AugmentedChain::kBase] = desc.base;
  chain.factors[AugmentedChain::kBaseGeo] = from_params(geo_params(desc, theta, 0));
  chain.deflection = compliance_deflections(desc, q, theta);
  for (int i = 0; i < kNumJoints; ++i) {
    const Vec3& axis = desc.joints[i].axis;
    chain.joint_corr[i] = joint_correction(theta.joint_curves[i], q[i]);
    if (chain.joint_corr[i].out_of_support) chain.out_of_support.set(i);
    auto at = [&](AugmentedChain::Slot s) -> Transform& { return chain.factors[AugmentedChain::index(i, s)]; };
    at(AugmentedChain::kJoint) = Transform::from_rotation(axis_rotation(axis, q[i]));
    at(AugmentedChain::kJointCorr) = Transform::from_rotation(axis_rotation(axis, chain.joint_corr[i].value));
    at(AugmentedChain::kCompliance) = Transform::from_rotation(axis_rotation(axis, chain.deflection[i]));
    at(AugmentedChain::kGeo) = from_params(geo_params(desc, theta, i + 1));
    at(AugmentedChain::kThermal) = from_params(thermal_params(desc, theta, env, i));
    at(AugmentedChain::kLink) = Transform::from_translation(desc.links[i]);
  }
  chain.factors[AugmentedChain::kTcp] = desc.tcp_local;
  return chain;
}

Transform fk_augmented(const RobotDescription& desc, const JointState& q, const EnvState& env,
                       const ParameterVector& theta, SupportFlags* flags) {
  const AugmentedChain chain = build_augmented_chain(desc, q, env, theta);
  Transform t = chain.factors.front();
  for (std::size_t k = 1; k < chain.factors.size(); ++k) t = t * chain.factors[k];
  if (flags) *flags = chain.out_of_support;
  return t;
}

RobotDescription example_description() {
  RobotDescription d;
  d.name = "example-arm";
  const Vec3 x = Vec3::UnitX(), y = Vec3::UnitY(), z = Vec3::UnitZ();
  d.joints = {{
      {z, -3.20, 3.20},
      {y, -2.35, 0.60},
      {y, -2.10, 2.75},
      {x, -6.10, 6.10},
      {y, -2.07, 2.07},
      {x, -6.10, 6.10},
  }};
  // Horizontal reach at q = 0: 350 + 780 + 170 + 518 + 110 + 45 + 60 = 2033 mm.
  d.links = {{
      Vec3(350.0, 0.0, 815.0),
      Vec3(780.0, 0.0, 0.0),
      Vec3(170.0, 0.0, 145.0),
      Vec3(518.0, 0.0, 0.0),
      Vec3(110.0, 0.0, 0.0),
      Vec3(45.0, 0.0, -30.0),
  }};
  d.tcp_local = Transform::from_translation(Vec3(60.0, 0.0, 120.0));
  return d;
}

}  // namespace vjcal
