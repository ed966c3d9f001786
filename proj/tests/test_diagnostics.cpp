#include "oracles/oracles.hpp"
#include "vjcal/diagnostics.hpp"
#include "vjcal/jacobian.hpp"

#include <doctest.h>

#include <random>

using namespace vjcal;

namespace {

Dataset synth(const ParameterVector& truth, std::size_t n, std::uint64_t seed, double noise_um = 0.0) {
  SynthSpec spec;
  spec.ground_truth = truth;
  spec.box = default_sampling_box();
  spec.n_samples = n;
  spec.seed = seed;
  spec.noise_sigma_um = Vec3::Constant(noise_um);
  return synthesize(example_description(), spec);
}

ParameterVector geometry_truth(std::uint64_t seed) {
  GroundTruthRecipe r;
  r.compliance = false;
  r.thermal = false;
  r.joint_correction = false;
  return default_ground_truth(example_description(), default_sampling_box(), r, seed);
}

std::vector<std::vector<RepeatabilityPoint>> gaussian_clusters(int clusters, int points, double sigma_mm,
                                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma_mm);
  std::vector<std::vector<RepeatabilityPoint>> out(clusters);
  for (int c = 0; c < clusters; ++c) {
    const Vec3 centre(100.0 * c, 50.0, 900.0);
    for (int p = 0; p < points; ++p) out[c].push_back({10.0 * p, centre + Vec3(g(rng), g(rng), g(rng))});
  }
  return out;
}

}  // namespace

TEST_CASE("spectra: sizes, zero residuals and gauge directions") {
  const auto desc = example_description();
  const auto box = default_sampling_box();
  ParameterVector th = initial_guess_for(ModelVariant::full(), box, 80.0);
  const Dataset ds = synth(th, 300, 1);
  const SpectrumReport g = submodel_spectra(desc, ds, th, ModelVariant::full());
  CHECK(g.geometry.size() == 36);
  CHECK(g.compliance.size() == 9);
  CHECK(g.thermal.size() == 6);
  CHECK_FALSE(g.joint.empty());
  for (const auto* v : {&g.geometry, &g.compliance, &g.thermal, &g.joint})
    for (double s : *v) CHECK(s == 0.0);

  const SpectrumReport gt = submodel_spectra(desc, ds, th, ModelVariant::parse("G"));
  CHECK(gt.compliance.empty());
  CHECK(gt.joint.empty());

  // Position-only data identifies 4 * 6 + 6 - 3 = 27 geometric combinations of a 6R arm.
  const SpectrumReport j = jacobian_spectra(desc, ds, th, ModelVariant::parse("G"));
  CHECK(j.jacobian_based);
  REQUIRE(j.geometry.size() == 36);
  for (std::size_t k = 1; k < j.geometry.size(); ++k) CHECK(j.geometry[k] <= j.geometry[k - 1]);
  int rank = 0;
  for (double s : j.geometry) rank += s > 1e-9 * j.geometry.front();
  CHECK(rank == 27);
}

TEST_CASE("spectra: gradient matrix against a dense oracle") {
  const auto desc = example_description();
  const ParameterVector truth = geometry_truth(3);
  const Dataset ds = synth(truth, 60, 4, 5.0);
  const ParameterVector th = initial_guess();
  const ModelVariant v = ModelVariant::parse("GC");
  const ParameterLayout layout(v, th);
  Eigen::MatrixXd g(ds.size(), layout.size());
  for (std::size_t m = 0; m < ds.size(); ++m) {
    const auto& s = ds.samples[m];
    const Eigen::MatrixXd jac = position_jacobian(desc, s.q, EnvState{s.kappa}, th, layout);
    const Vec3 r = oracle::position(desc, s.q, s.kappa, th) - s.t_meas;
    g.row(m) = r.transpose() * jac;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> geo(g.leftCols(36)), comp(g.rightCols(9));
  const SpectrumReport got = submodel_spectra(desc, ds, th, v, 2);
  for (int k = 0; k < 36; ++k) CHECK(got.geometry[k] == doctest::Approx(geo.singularValues()[k]).epsilon(1e-9));
  for (int k = 0; k < 9; ++k)
    CHECK(std::abs(got.compliance[k] - comp.singularValues()[k]) < 1e-9 * comp.singularValues()[0]);
  // Geometric gauge directions leave the gradient matrix rank deficient too.
  CHECK(got.geometry.back() < 1e-10 * got.geometry.front());
}

TEST_CASE("joint projection: exactness and orthogonality") {
  const auto desc = example_description();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const ParameterVector th = initial_guess();
  Dataset ds = synth(th, 50, 6);
  std::vector<Vec3> offsets;
  for (auto& s : ds.samples) {
    offsets.push_back(Vec3(g(rng), g(rng), g(rng)) * 1e-2);
    s.t_meas += offsets.back();
  }
  const JointProjection p = project_residuals_to_joints(desc, ds, th);
  for (std::size_t m = 0; m < ds.size(); ++m) {
    const auto& s = ds.samples[m];
    for (int i = 0; i < kNumJoints; ++i) {
      const double h = 1e-6;
      JointState a = s.q, b = s.q;
      a[i] += h;
      b[i] -= h;
      const Vec3 ji = (fk_nominal(desc, a).translation - fk_nominal(desc, b).translation) / (2 * h);
      CHECK_FALSE(p.undefined[m].test(i));
      CHECK(p.delta_q[m][i] == doctest::Approx(ji.dot(offsets[m]) / ji.squaredNorm()).epsilon(1e-6));
      const Vec3 rest = offsets[m] - p.delta_q[m][i] * ji;
      CHECK(std::abs(rest.dot(ji)) < 1e-6 * ji.norm() * offsets[m].norm());
    }
  }

  // A pure joint-i motion is recovered exactly.
  Dataset one;
  MeasurementSample s = ds.samples[0];
  const Vec3 j3 = augmented_joint_sensitivity(desc, s.q, EnvState{s.kappa}, th, 2);
  s.t_meas = fk_nominal(desc, s.q).translation + 2e-5 * j3;
  one.samples.push_back(s);
  CHECK(project_residuals_to_joints(desc, one, th).delta_q[0][2] == doctest::Approx(2e-5).epsilon(1e-9));

  RobotDescription on_axis = desc;
  on_axis.links[5] = Vec3(45.0, 0.0, 0.0);
  on_axis.tcp_local = Transform::from_translation(Vec3(60.0, 0.0, 0.0));
  const JointProjection u = project_residuals_to_joints(on_axis, one, th);
  CHECK(u.undefined[0].test(5));
  CHECK(std::isnan(u.delta_q[0][5]));
}

TEST_CASE("moving average profile") {
  std::vector<double> q{0.0, 0.1, 0.2, 0.3, 0.4}, v{1.0, 2.0, std::nan(""), 4.0, 5.0};
  const auto p = moving_average_profile(q, v, 0.25, {0.1, 0.3, 2.0});
  CHECK(p[0].count == 2);
  CHECK(p[0].value == doctest::Approx(1.5));
  CHECK(p[1].count == 2);
  CHECK(p[1].value == doctest::Approx(4.5));
  CHECK(p[2].count == 0);
  CHECK(std::isnan(p[2].value));
}

TEST_CASE("repeatability") {
  CHECK(repeatability_rp(6.26, 2.75) == doctest::Approx(14.51).epsilon(1e-12));

  std::vector<std::vector<RepeatabilityPoint>> same(3);
  for (int c = 0; c < 3; ++c)
    for (int p = 0; p < 20; ++p) same[c].push_back({1.0 * p, Vec3(c, 2.0, 3.0)});
  const auto zero = repeatability(same, 0.0);
  CHECK(zero.l_bar_um == 0.0);
  CHECK(zero.s_l_um == 0.0);
  CHECK(zero.rp_um == 0.0);

  // Mean distance of an isotropic Gaussian is 2 sqrt(2/pi) sigma.
  const double sigma = 4e-3;
  const auto r = repeatability(gaussian_clusters(5, 4000, sigma, 7), 0.0);
  CHECK(r.n_points == 20000);
  CHECK(r.l_bar_um == doctest::Approx(2.0 * std::sqrt(2.0 / M_PI) * 4.0).epsilon(0.02));
  CHECK(r.rp_um == doctest::Approx(r.l_bar_um + 3.0 * r.s_l_um).epsilon(1e-14));

  // Independent recomputation on the raw points.
  const auto clusters = gaussian_clusters(3, 30, sigma, 8);
  std::vector<double> dist;
  for (const auto& c : clusters) {
    Vec3 centre = Vec3::Zero();
    for (const auto& p : c) centre += p.position;
    centre /= c.size();
    for (const auto& p : c) dist.push_back(1e3 * (p.position - centre).norm());
  }
  double mean = 0.0, ss = 0.0;
  for (double d : dist) mean += d / dist.size();
  for (double d : dist) ss += (d - mean) * (d - mean);
  const auto small = repeatability(clusters, 0.0);
  CHECK(small.l_bar_um == doctest::Approx(mean).epsilon(1e-12));
  CHECK(small.s_l_um == doctest::Approx(std::sqrt(ss / (dist.size() - 1))).epsilon(1e-12));

  // A linear drift is removed by the rolling mean and the trimmed points stay.
  auto drifting = gaussian_clusters(2, 400, sigma, 9);
  for (auto& c : drifting)
    for (auto& p : c) p.position.x() += 1e-5 * p.timestamp;
  const auto raw = repeatability(drifting, 0.0);
  const auto fixed = repeatability(drifting, 600.0);
  CHECK(raw.l_bar_um > 1.5 * fixed.l_bar_um);
  CHECK(fixed.n_points < 800);
  CHECK(fixed.drift_um[0] > 30.0);

  CHECK_THROWS_AS(repeatability({}, 0.0), InputError);
  CHECK_THROWS_AS(repeatability(gaussian_clusters(1, 1, sigma, 1), 0.0), InputError);
  CHECK_THROWS_AS(repeatability(gaussian_clusters(1, 10, sigma, 1), 1e6), InputError);
}

TEST_CASE("cross-validation: geometry-only noiseless recovery and fold bookkeeping") {
  const auto desc = example_description();
  const Dataset ds = synth(geometry_truth(10), 500, 11);
  CrossvalConfig cfg;
  cfg.solver.max_iters = 30;
  const auto report = run_crossval(desc, ds, default_sampling_box(), {ModelVariant::parse("G")}, cfg);
  REQUIRE(report.variants.size() == 1);
  const auto& v = report.variants[0];
  REQUIRE(v.folds.size() == 5);
  CHECK_FALSE(report.any_failed());
  std::size_t total = 0;
  for (const auto& f : v.folds) {
    CHECK(f.n_train + f.n_validation == ds.size());
    total += f.n_validation;
  }
  CHECK(total == ds.size());
  CHECK(v.validation.mean_um < 1e-3);
  CHECK(v.validation.count == ds.size());
}

TEST_CASE("fold aggregation") {
  ErrorSummary a, b;
  a.p95_um = 3.0;
  a.max_um = 5.0;
  b.p95_um = 4.0;
  b.max_um = 4.5;
  const ErrorSummary agg = aggregate_folds({a, b}, {1e-3, 2e-3, 6e-3});
  CHECK(agg.mean_um == doctest::Approx(3.0));
  CHECK(agg.p95_um == 4.0);
  CHECK(agg.max_um == 5.0);
  CHECK(agg.count == 3);
}

TEST_CASE("data reduction with the full training set reproduces cross-validation") {
  const auto desc = example_description();
  const Dataset ds = synth(geometry_truth(12), 200, 13, 5.0);
  CrossvalConfig cfg;
  cfg.solver.variant = ModelVariant::parse("G");
  cfg.solver.max_iters = 20;
  const auto cv = run_crossval(desc, ds, default_sampling_box(), {cfg.solver.variant}, cfg);
  const auto red = data_reduction_study(desc, ds, default_sampling_box(), {50, 160}, cfg, 3);
  REQUIRE(red.size() == 2);
  REQUIRE(red[1].fold_val_mean_um.size() == 5);
  for (int f = 0; f < 5; ++f)
    CHECK(red[1].fold_val_mean_um[f] == doctest::Approx(cv.variants[0].folds[f].validation.mean_um).epsilon(1e-9));
  CHECK(red[0].val_mean_um > red[1].val_mean_um);
  CHECK_THROWS_AS(data_reduction_study(desc, ds, default_sampling_box(), {161}, cfg, 3), InputError);
  CHECK_THROWS_AS(data_reduction_study(desc, ds, default_sampling_box(), {100, 50}, cfg, 3), InputError);
}
