#include "oracles/oracles.hpp"
#include "vjcal/submodels.hpp"

#include <doctest.h>

#include <random>

using namespace vjcal;

namespace {

JointState random_q(std::mt19937_64& rng, double span = 2.5) {
  std::uniform_real_distribution<double> u(-span, span);
  JointState q;
  for (int i = 0; i < kNumJoints; ++i) q[i] = u(rng);
  return q;
}

ParameterVector reference_theta() {
  ParameterVector th;
  th.masses = reference_masses();
  th.compliances = reference_compliances();
  return th;
}

}  // namespace

TEST_CASE("link_torques: zero masses give zero torques") {
  const auto desc = example_description();
  std::mt19937_64 rng(1);
  const auto tau = link_torques(desc, random_q(rng), {}, ParameterVector{}.constants.com_ratio);
  for (const auto& t : tau) CHECK(t.norm() == 0.0);
}

TEST_CASE("link_torques: single tip mass on a horizontal chain") {
  // Straight chain along x with joint 2 about y.
  RobotDescription d;
  d.joints[0].axis = Vec3::UnitZ();
  for (int i = 1; i < kNumJoints; ++i) d.joints[i].axis = Vec3::UnitY();
  for (int i = 0; i < kNumJoints; ++i) d.links[i] = Vec3(100.0 * (i + 1), 0.0, 0.0);
  std::array<double, kNumJoints> m{};
  m[5] = 2.0;
  const auto tau = link_torques(d, JointState::Zero(), m, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  // Joint 2 sits at x = 100; the lumped mass at 100 + 200 + 300 + 400 + 500 + 300 = 1800.
  const double lever = 1800.0 - 100.0;
  CHECK(tau[1].norm() == doctest::Approx(2.0 * 9.81 * lever).epsilon(1e-14));
  CHECK(std::abs(tau[1].dot(Vec3::UnitY())) == doctest::Approx(2.0 * 9.81 * lever).epsilon(1e-14));
}

TEST_CASE("projected torque about joint 1 vanishes when its axis is parallel to gravity") {
  const auto desc = example_description();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> um(-50, 50);
  for (int n = 0; n < 200; ++n) {
    std::array<double, kNumJoints> m;
    for (double& v : m) v = um(rng);
    const auto tau = projected_torques(desc, random_q(rng), m, ParameterVector{}.constants.com_ratio);
    CHECK(std::abs(tau[0]) < 1e-9);
  }
}

TEST_CASE("compliance deflections: zero k, scaling invariance, and independent projection") {
  const auto desc = example_description();
  std::mt19937_64 rng(3);
  const JointState q = random_q(rng);

  const auto zero = compliance_deflections(desc, q, initial_guess());
  for (double v : zero) CHECK(v == 0.0);

  const ParameterVector th = reference_theta();
  ParameterVector scaled = th;
  scaled.masses *= 7.0;
  scaled.m6 *= 7.0;
  scaled.compliances /= 7.0;
  const auto a = compliance_deflections(desc, q, th);
  const auto b = compliance_deflections(desc, q, scaled);
  for (int i = 0; i < kNumJoints; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);

  for (int n = 0; n < 50; ++n) {
    const JointState qq = random_q(rng);
    const auto got = compliance_deflections(desc, qq, th);
    const auto tau = oracle::projected_torques(desc, qq, th.all_masses());
    const auto k = th.all_compliances();
    CHECK(got[0] == 0.0);
    for (int i = 1; i < kNumJoints; ++i) CHECK(got[i] == doctest::Approx(k[i] * tau[i]).epsilon(1e-12));
  }
}

TEST_CASE("compliance partials: structure and finite differences") {
  const auto desc = example_description();
  std::mt19937_64 rng(4);
  const ParameterVector th = reference_theta();
  double worst = 0.0;
  for (int n = 0; n < 500; ++n) {
    const JointState q = random_q(rng);
    const auto p = compliance_partials(desc, q, th);
    const auto tau = projected_torques(desc, q, th.all_masses(), th.constants.com_ratio);
    for (int i = 1; i < kNumJoints; ++i) {
      CHECK(std::abs(p.d_compliance[i] - tau[i]) < 1e-8);
      for (int j = 0; j < i; ++j) CHECK(p.d_mass(i, j) == 0.0);
    }
    for (int j = 1; j < kNumJoints - 1; ++j) {
      ParameterVector a = th, b = th;
      const double h = 1e-3;
      a.masses[j - 1] += h;
      b.masses[j - 1] -= h;
      const auto da = compliance_deflections(desc, q, a);
      const auto db = compliance_deflections(desc, q, b);
      const double scale = std::max(p.d_mass.col(j).cwiseAbs().maxCoeff(), 1e-15);
      for (int i = 0; i < kNumJoints; ++i) {
        const double fd = (da[i] - db[i]) / (2 * h);
        worst = std::max(worst, std::abs(fd - p.d_mass(i, j)) / scale);
      }
    }
  }
  CHECK(worst < 1e-7);
}

TEST_CASE("thermal params") {
  const auto desc = example_description();
  ParameterVector th;
  th.thermal.setConstant(28.85e-6);
  CHECK(thermal_params(desc, th, EnvState{25.0}, 2).as_vector().isZero(0.0));

  RobotDescription d = desc;
  d.links[0] = Vec3(300.0, 0.0, 400.0);  // |t| = 500 mm
  const auto p = thermal_params(d, th, EnvState{27.0}, 0);
  CHECK(Vec3(p.x, p.y, p.z).norm() == doctest::Approx(28.85e-3).epsilon(1e-12));
  CHECK(p.zeta == 0.0);
  CHECK((thermal_params_derivative(d, th, EnvState{27.0}, 0) - 2.0 * d.links[0]).norm() < 1e-12);
}

TEST_CASE("joint correction: nodes, midpoints, clamping and brute force") {
  JointCorrectionCurve c = JointCorrectionCurve::on_range(-0.1, 0.1, 80.0);
  CHECK(c.first_node == -8);
  CHECK(c.size() == 17);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1e-4);
  for (double& v : c.values) v = g(rng);

  const auto at_node = joint_correction(c, c.node_angle(3));
  CHECK(at_node.value == doctest::Approx(c.values[3]).epsilon(1e-12));
  CHECK(std::max(at_node.w_lower, at_node.w_upper) == doctest::Approx(1.0).epsilon(1e-12));

  const auto mid = joint_correction(c, 0.5 * (c.node_angle(4) + c.node_angle(5)));
  CHECK(mid.w_lower == doctest::Approx(0.5));
  CHECK(mid.w_upper == doctest::Approx(0.5));
  CHECK(mid.value == doctest::Approx(0.5 * (c.values[4] + c.values[5])).epsilon(1e-12));

  const auto low = joint_correction(c, -0.5);
  CHECK(low.out_of_support);
  CHECK(low.value == c.values.front());
  const auto high = joint_correction(c, 0.5);
  CHECK(high.out_of_support);
  CHECK(high.value == c.values.back());

  std::uniform_real_distribution<double> uq(c.q_min(), c.q_max());
  for (int n = 0; n < 2000; ++n) {
    const double q = uq(rng);
    const auto s = joint_correction(c, q);
    CHECK_FALSE(s.out_of_support);
    CHECK(s.w_lower + s.w_upper == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.value == doctest::Approx(oracle::curve_value(c, q)).epsilon(1e-12));
  }
}

TEST_CASE("joint correction is continuous across segment boundaries") {
  JointCorrectionCurve c = JointCorrectionCurve::on_range(0.0, 1.0, 80.0);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1e-4);
  for (double& v : c.values) v = g(rng);
  for (int j = 1; j + 1 < c.size(); ++j) {
    const double q = c.node_angle(j);
    const double left = joint_correction(c, std::nextafter(q, -1.0)).value;
    const double right = joint_correction(c, std::nextafter(q, 2.0)).value;
    CHECK(std::abs(left - right) < 1e-15);
  }
}

TEST_CASE("geo params: slot insertion and selection matrix") {
  const auto desc = example_description();
  ParameterVector th;
  th.base_geo << 1, 2, 3, 4, 5, 6;
  th.joint_geo[0] << 0.1, 0.2, 0.3, 0.4, 0.5;  // joint 1 rotates about z
  th.joint_geo[1] << 0.1, 0.2, 0.3, 0.4, 0.5;  // joint 2 rotates about y
  CHECK(geo_params(desc, th, 0).as_vector() == th.base_geo);
  CHECK(geo_params(desc, th, 1).as_vector() == (Vector6() << 0.1, 0.2, 0.3, 0.4, 0.5, 0.0).finished());
  CHECK(geo_params(desc, th, 2).as_vector() == (Vector6() << 0.1, 0.2, 0.3, 0.4, 0.0, 0.5).finished());
  CHECK(geo_params(desc, ParameterVector{}, 4).as_vector().isZero(0.0));
  CHECK(geo_params_jacobian(desc, 0).isIdentity(0.0));
  const Eigen::MatrixXd s = geo_params_jacobian(desc, 1);
  CHECK(s.rows() == 6);
  CHECK(s.cols() == 5);
  CHECK(s.row(5).isZero(0.0));
  CHECK(s.topRows(5).isIdentity(0.0));
  CHECK(axial_slot(Vec3(0.1, -0.9, 0.2).normalized()) == 1);
}

TEST_CASE("pack/unpack round trip and layout sizes") {
  const std::array<JointRange, kNumJoints> ranges{{{-0.7, 0.7}, {-1.3, -0.1}, {-0.2, 1.0}, {-0.7, 0.7}, {0.3, 1.5},
                                                   {-0.7, 0.7}}};
  ParameterVector th = initial_guess(ranges, 80.0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  const ParameterLayout full(ModelVariant::full(), th);
  int n_supp = 0;
  for (const auto& c : th.joint_curves) n_supp += c.size();
  CHECK(full.size() == 36 + 9 + 6 + n_supp);
  CHECK(ParameterLayout(ModelVariant::parse("GC"), th).size() == 45);
  CHECK(ParameterLayout(ModelVariant::parse("G"), th).size() == 36);

  Eigen::VectorXd flat(full.size());
  for (int k = 0; k < flat.size(); ++k) flat[k] = g(rng);
  const ParameterVector u = full.unpack(flat, th);
  CHECK(u.m6 == 1.0);
  CHECK((full.pack(u) - flat).norm() == 0.0);
  CHECK_THROWS_AS(full.unpack(Eigen::VectorXd::Zero(3), th), std::invalid_argument);
}

TEST_CASE("model variant parsing") {
  CHECK(ModelVariant::parse("G").name() == "G");
  CHECK(ModelVariant::parse("full") == ModelVariant::full());
  CHECK(ModelVariant::parse("GCTJ") == ModelVariant::full());
  CHECK_THROWS(ModelVariant::parse("CT"));
  CHECK_THROWS(ModelVariant::parse("GX"));
}
