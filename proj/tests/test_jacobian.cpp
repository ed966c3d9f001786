#include "oracles/oracles.hpp"
#include "vjcal/jacobian.hpp"

#include <doctest.h>

#include <random>

using namespace vjcal;

namespace {

const std::array<JointRange, kNumJoints> kBox{{{-1.0, 1.0}, {-1.4, 0.0}, {-0.3, 1.1}, {-1.0, 1.0}, {0.2, 1.6},
                                               {-1.0, 1.0}}};

JointState random_q(std::mt19937_64& rng) {
  JointState q;
  for (int i = 0; i < kNumJoints; ++i) q[i] = std::uniform_real_distribution<double>(kBox[i].q_min, kBox[i].q_max)(rng);
  return q;
}

ParameterVector random_theta(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ParameterVector th = initial_guess(kBox, 80.0);
  for (int k = 0; k < 6; ++k) th.base_geo[k] = g(rng) * (k < 3 ? 1e-3 : 0.5);
  for (auto& b : th.joint_geo)
    for (int k = 0; k < 5; ++k) b[k] = g(rng) * (k < 3 ? 1e-3 : 0.5);
  for (int j = 0; j < 4; ++j) th.masses[j] = reference_masses()[j] * (1.0 + 0.2 * g(rng));
  for (int i = 0; i < 5; ++i) th.compliances[i] = reference_compliances()[i] * (1.0 + 0.2 * g(rng));
  for (int i = 0; i < 6; ++i) th.thermal[i] = reference_expansion()[i] * (1.0 + 0.2 * g(rng));
  for (auto& c : th.joint_curves)
    for (double& v : c.values) v = 1.5e-4 * g(rng);
  return th;
}

}  // namespace

TEST_CASE("full-model Jacobian matches central differences of the oracle") {
  const auto d = example_description();
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int n = 0; n < 40; ++n) {
    const ParameterVector th = random_theta(rng);
    const ParameterLayout layout(ModelVariant::full(), th);
    const JointState q = random_q(rng);
    const double kappa = std::uniform_real_distribution<double>(18.0, 28.0)(rng);
    const Eigen::MatrixXd jac = position_jacobian(d, q, EnvState{kappa}, th, layout);
    worst = std::max(worst, oracle::jacobian_fd_error(d, q, kappa, th, layout, jac));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("sparse and dense Jacobians agree, and the position is the oracle's") {
  const auto d = example_description();
  std::mt19937_64 rng(2);
  for (int n = 0; n < 50; ++n) {
    const ParameterVector th = random_theta(rng);
    const ParameterLayout layout(ModelVariant::full(), th);
    const JointState q = random_q(rng);
    const SparseJacobian s = sparse_position_jacobian(d, q, EnvState{22.0}, th, layout);
    const Eigen::MatrixXd dense = s.to_dense(layout.size());
    CHECK((dense - position_jacobian(d, q, EnvState{22.0}, th, layout)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s.position - oracle::position(d, q, 22.0, th)).norm() < 1e-9);
  }
}

TEST_CASE("cached chain derivatives equal the naive product") {
  const auto d = example_description();
  std::mt19937_64 rng(3);
  const ParameterVector th = random_theta(rng);
  const JointState q = random_q(rng);
  const auto chain = build_augmented_chain(d, q, EnvState{23.0}, th);
  const ChainCache cache = ChainCache::build(chain.factors);
  const int n = static_cast<int>(chain.factors.size());
  CHECK((cache.full().translation - fk_augmented(d, q, EnvState{23.0}, th).translation).norm() < 1e-12);
  std::normal_distribution<double> g;
  for (int k = 0; k < n; ++k) {
    const Mat3 dr = Mat3::NullaryExpr([&] { return g(rng); });
    const Vec3 dt(g(rng), g(rng), g(rng));
    Mat4 naive = Mat4::Identity();
    for (int j = 0; j < n; ++j) {
      if (j == k) {
        Mat4 dm = Mat4::Zero();
        dm.topLeftCorner<3, 3>() = dr;
        dm.topRightCorner<3, 1>() = dt;
        naive = naive * dm;
      } else {
        naive = naive * chain.factors[j].matrix();
      }
    }
    const Vec3 expected = naive.topRightCorner<3, 1>();
    CHECK((cache.position_derivative(k, dr, dt) - expected).norm() < 1e-12 * std::max(1.0, expected.norm()));
  }
}

TEST_CASE("base translation columns equal the base rotation") {
  const auto d = example_description();
  std::mt19937_64 rng(4);
  const ParameterVector th = random_theta(rng);
  const ParameterLayout layout(ModelVariant::full(), th);
  for (int n = 0; n < 10; ++n) {
    const Eigen::MatrixXd jac = position_jacobian(d, random_q(rng), EnvState{20.0}, th, layout);
    CHECK((jac.block(0, layout.geo_offset() + 3, 3, 3) - d.base.rotation).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("joint-correction columns: two source weights per joint") {
  const auto d = example_description();
  std::mt19937_64 rng(5);
  const ParameterVector th = random_theta(rng);
  const ParameterLayout layout(ModelVariant::full(), th);
  for (int n = 0; n < 20; ++n) {
    const Eigen::MatrixXd jac = position_jacobian(d, random_q(rng), EnvState{20.0}, th, layout);
    for (int i = 0; i < kNumJoints; ++i) {
      int nonzero = 0;
      for (int k = 0; k < layout.joint_size(i); ++k) nonzero += jac.col(layout.joint_offset(i) + k).norm() > 0.0;
      CHECK(nonzero >= 1);
      CHECK(nonzero <= 2);
    }
  }
}

TEST_CASE("layout strictness: absent submodels have no columns") {
  const auto d = example_description();
  std::mt19937_64 rng(6);
  const ParameterVector th = random_theta(rng);
  const ParameterLayout gc(ModelVariant::parse("GC"), th);
  const Eigen::MatrixXd jac = position_jacobian(d, random_q(rng), EnvState{20.0}, th, gc);
  CHECK(jac.cols() == 45);
  CHECK(gc.thermal_offset() == -1);
  CHECK(gc.joint_offset(0) == -1);
}

TEST_CASE("nominal joint sensitivity") {
  const auto d = example_description();
  std::mt19937_64 rng(7);
  for (int n = 0; n < 100; ++n) {
    const JointState q = random_q(rng);
    for (int i = 0; i < kNumJoints; ++i) {
      const double h = 1e-6;
      JointState a = q, b = q;
      a[i] += h;
      b[i] -= h;
      const Vec3 fd = (fk_nominal(d, a).translation - fk_nominal(d, b).translation) / (2 * h);
      const Vec3 an = nominal_joint_sensitivity(d, q, i);
      CHECK((fd - an).norm() < 1e-7 * std::max(1.0, an.norm()));
    }
    const Vec3 t = fk_nominal(d, q).translation;
    CHECK(nominal_joint_sensitivity(d, q, 0).norm() == doctest::Approx(std::hypot(t.x(), t.y())).epsilon(1e-12));
  }

  RobotDescription on_axis = d;
  on_axis.links[5] = Vec3(45.0, 0.0, 0.0);
  on_axis.tcp_local = Transform::from_translation(Vec3(60.0, 0.0, 0.0));
  CHECK(nominal_joint_sensitivity(on_axis, random_q(rng), 5).norm() < 1e-12);
}
