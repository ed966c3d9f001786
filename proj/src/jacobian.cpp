#include "vjcal/jacobian.hpp"

#include "vjcal/submodels.hpp"

namespace vjcal {

ChainCache ChainCache::build(std::vector<Transform> factors) {
  ChainCache c;
  const std::size_t n = factors.size();
  c.factors = std::move(factors);
  c.prefix.resize(n);
  c.suffix.resize(n);
  if (n == 0) return c;
  c.prefix[0] = Transform::identity();
  for (std::size_t k = 1; k < n; ++k) c.prefix[k] = c.prefix[k - 1] * c.factors[k - 1];
  c.suffix[n - 1] = Transform::identity();
  for (std::size_t k = n - 1; k-- > 0;) c.suffix[k] = c.factors[k + 1] * c.suffix[k + 1];
  return c;
}

Transform ChainCache::full() const {
  if (factors.empty()) return Transform::identity();
  return prefix.back() * factors.back();
}

Vec3 ChainCache::position_derivative(int k, const Mat3& d_rotation, const Vec3& d_translation) const {
  return prefix[k].rotation * (d_rotation * suffix[k].translation + d_translation);
}

Vec3 ChainCache::axis_rotation_derivative(int k, const Vec3& axis) const {
  const Vec3 local = factors[k].rotation * suffix[k].translation;
  return prefix[k].rotation * axis.cross(local);
}

Eigen::MatrixXd SparseJacobian::to_dense(int n_free) const {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(3, n_free);
  for (std::size_t e = 0; e < columns.size(); ++e) dense.col(columns[e]) += values.col(static_cast<int>(e));
  return dense;
}

SparseJacobian sparse_position_jacobian(const RobotDescription& desc, const JointState& q, const EnvState& env,
                                        const ParameterVector& theta, const ParameterLayout& layout) {
  using Chain = AugmentedChain;
  AugmentedChain chain = build_augmented_chain(desc, q, env, theta);
  const ChainCache cache = ChainCache::build(std::move(chain.factors));

  SparseJacobian out;
  out.position = cache.full().translation;
  out.out_of_support = chain.out_of_support;

  int n_entries = 0;
  if (layout.geo_offset() >= 0) n_entries += kGeoParams;
  if (layout.mass_offset() >= 0) n_entries += kComplianceParams;
  if (layout.thermal_offset() >= 0) n_entries += kThermalParams;
  if (layout.joint_offset(0) >= 0) n_entries += 2 * kNumJoints;
  out.columns.reserve(n_entries);
  out.values.resize(3, n_entries);
  int e = 0;
  auto push = [&](int column, const Vec3& v) {
    out.columns.push_back(column);
    out.values.col(e++) = v;
  };

  if (layout.geo_offset() >= 0) {
    const int g = layout.geo_offset();
    const VirtualJointParams p0 = geo_params(desc, theta, 0);
    for (int c = 0; c < 6; ++c) {
      const Mat4 d = d_from_params(p0, c);
      push(g + c, cache.position_derivative(Chain::kBaseGeo, d.topLeftCorner<3, 3>(), d.topRightCorner<3, 1>()));
    }
    for (int i = 0; i < kNumJoints; ++i) {
      const VirtualJointParams p = geo_params(desc, theta, i + 1);
      const int k = Chain::index(i, Chain::kGeo);
      for (int f = 0; f < 5; ++f) {
        const Mat4 d = d_from_params(p, geo_free_to_slot(desc, i, f));
        push(g + 6 + 5 * i + f, cache.position_derivative(k, d.topLeftCorner<3, 3>(), d.topRightCorner<3, 1>()));
      }
    }
  }

  if (layout.mass_offset() >= 0) {
    const CompliancePartials partials = compliance_partials(desc, q, theta);
    std::array<Vec3, kNumJoints> v;
    for (int i = 0; i < kNumJoints; ++i) {
      v[i] = cache.axis_rotation_derivative(Chain::index(i, Chain::kCompliance), desc.joints[i].axis);
    }
    // free masses m2..m5 sit at joint indices 1..4
    for (int j = 1; j <= kFreeMasses; ++j) {
      Vec3 col = Vec3::Zero();
      for (int i = 1; i <= j; ++i) col += partials.d_mass(i, j) * v[i];
      push(layout.mass_offset() + (j - 1), col);
    }
    for (int i = 1; i < kNumJoints; ++i) {
      push(layout.compliance_offset() + (i - 1), partials.d_compliance[i] * v[i]);
    }
  }

  if (layout.thermal_offset() >= 0) {
    for (int i = 0; i < kNumJoints; ++i) {
      const Vec3 dt = thermal_params_derivative(desc, theta, env, i);
      push(layout.thermal_offset() + i,
           cache.position_derivative(Chain::index(i, Chain::kThermal), Mat3::Zero(), dt));
    }
  }

  if (layout.joint_offset(0) >= 0) {
    for (int i = 0; i < kNumJoints; ++i) {
      const Vec3 u = cache.axis_rotation_derivative(Chain::index(i, Chain::kJointCorr), desc.joints[i].axis);
      const CurveSample& s = chain.joint_corr[i];
      push(layout.joint_offset(i) + s.lower, s.w_lower * u);
      push(layout.joint_offset(i) + s.lower + 1, s.w_upper * u);
    }
  }

  out.values.conservativeResize(3, e);
  return out;
}

Eigen::MatrixXd position_jacobian(const RobotDescription& desc, const JointState& q, const EnvState& env,
                                  const ParameterVector& theta, const ParameterLayout& layout) {
  return sparse_position_jacobian(desc, q, env, theta, layout).to_dense(layout.size());
}

Vec3 nominal_joint_sensitivity(const RobotDescription& desc, const JointState& q, int joint_index) {
  const NominalFrames f = nominal_frames(desc, q);
  const Vec3 tcp = fk_nominal(desc, q).translation;
  return f.axis[joint_index].cross(tcp - f.origin[joint_index]);
}

Vec3 augmented_joint_sensitivity(const RobotDescription& desc, const JointState& q, const EnvState& env,
                                 const ParameterVector& theta, int joint_index) {
  AugmentedChain chain = build_augmented_chain(desc, q, env, theta);
  const ChainCache cache = ChainCache::build(std::move(chain.factors));
  return cache.axis_rotation_derivative(AugmentedChain::index(joint_index, AugmentedChain::kJoint),
                                        desc.joints[joint_index].axis);
}

}  // namespace vjcal
