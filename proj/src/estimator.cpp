#include "vjcal/estimator.hpp"

#include "vjcal/jacobian.hpp"
#include "vjcal/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace vjcal {

void SolverConfig::validate() const {
  if (!(lambda_gn >= 0.0) || !std::isfinite(lambda_gn)) throw InputError("solver config: 'lambda_gn' must be >= 0");
  if (!(lambda_j >= 0.0) || !std::isfinite(lambda_j)) throw InputError("solver config: 'lambda_j' must be >= 0");
  if (max_iters < 1) throw InputError("solver config: 'max_iters' must be >= 1");
  if (!(rel_tol >= 0.0)) throw InputError("solver config: 'rel_tol' must be >= 0");
  if (threads < 1) throw InputError("solver config: 'threads' must be >= 1");
}

std::array<double, kNumJoints> joint_scaling(const RobotDescription& desc, const Dataset& ds) {
  std::array<double, kNumJoints> l{};
  if (ds.empty()) return l;
  for (const auto& s : ds.samples) {
    for (int i = 0; i < kNumJoints; ++i) l[i] += nominal_joint_sensitivity(desc, s.q, i).norm();
  }
  for (double& v : l) v /= static_cast<double>(ds.size());
  return l;
}

double percentile_nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

std::vector<double> pose_errors(const RobotDescription& desc, const Dataset& ds, const ParameterVector& theta) {
  std::vector<double> e(ds.size());
  for (std::size_t m = 0; m < ds.size(); ++m) {
    const auto& s = ds.samples[m];
    e[m] = (s.t_meas - fk_augmented(desc, s.q, EnvState{s.kappa}, theta).translation).norm();
  }
  return e;
}

ErrorSummary summarize_errors(const std::vector<double>& errors_mm) {
  if (errors_mm.empty()) throw InputError("cannot summarize errors of an empty dataset");
  ErrorSummary s;
  s.count = errors_mm.size();
  s.mean_um = 1e3 * std::accumulate(errors_mm.begin(), errors_mm.end(), 0.0) / static_cast<double>(s.count);
  s.p95_um = 1e3 * percentile_nearest_rank(errors_mm, 95.0);
  s.max_um = 1e3 * *std::max_element(errors_mm.begin(), errors_mm.end());
  return s;
}

ErrorSummary evaluate(const RobotDescription& desc, const Dataset& ds, const ParameterVector& theta) {
  if (ds.empty()) throw InputError("cannot evaluate on an empty dataset");
  return summarize_errors(pose_errors(desc, ds, theta));
}

ParameterVector initial_guess_for(const ModelVariant& variant, const std::array<JointRange, kNumJoints>& ranges,
                                  double d_supp) {
  return variant.has(Submodel::JointCorrection) ? initial_guess(ranges, d_supp) : initial_guess();
}

Estimator::Estimator(const RobotDescription& desc, const Dataset& train, SolverConfig config)
    : desc_(desc), train_(train), config_(config) {
  config_.validate();
  if (train_.empty()) throw InputError("cannot calibrate on an empty dataset");
  scaling_ = joint_scaling(desc_, train_);
}

double Estimator::regularizer(const ParameterVector& theta) const {
  if (!config_.variant.has(Submodel::JointCorrection)) return 0.0;
  double r = 0.0;
  for (int i = 0; i < kNumJoints; ++i) {
    for (double v : theta.joint_curves[i].values) r += (v / scaling_[i]) * (v / scaling_[i]);
  }
  return config_.lambda_j * r;
}

double Estimator::loss(const ParameterVector& theta) const {
  const std::size_t n = train_.size();
  std::vector<double> sq(n);
  parallel_for(n, config_.threads, [&](std::size_t m) {
    const auto& s = train_.samples[m];
    sq[m] = (fk_augmented(desc_, s.q, EnvState{s.kappa}, theta).translation - s.t_meas).squaredNorm();
  });
  double data = 0.0;
  for (double v : sq) data += v;
  return data / (2.0 * static_cast<double>(n)) + regularizer(theta);
}

Estimator::System Estimator::gradient_and_gauss_newton_matrix(const ParameterVector& theta) const {
  const ParameterLayout layout(config_.variant, theta);
  const int n_free = layout.size();
  System sys;
  sys.gradient = Eigen::VectorXd::Zero(n_free);
  sys.gauss_newton = Eigen::MatrixXd::Zero(n_free, n_free);

  const std::size_t n = train_.size();
  constexpr std::size_t kBlock = 512;
  std::vector<SparseJacobian> block(kBlock);
  double data = 0.0;
  for (std::size_t begin = 0; begin < n; begin += kBlock) {
    const std::size_t count = std::min(kBlock, n - begin);
    parallel_for(count, config_.threads, [&](std::size_t k) {
      const auto& s = train_.samples[begin + k];
      block[k] = sparse_position_jacobian(desc_, s.q, EnvState{s.kappa}, theta, layout);
    });
    for (std::size_t k = 0; k < count; ++k) {
      const SparseJacobian& jac = block[k];
      const Vec3 r = jac.position - train_.samples[begin + k].t_meas;
      data += r.squaredNorm();
      const Eigen::VectorXd g = jac.values.transpose() * r;
      const Eigen::MatrixXd vtv = jac.values.transpose() * jac.values;
      const int e = static_cast<int>(jac.columns.size());
      for (int a = 0; a < e; ++a) {
        const int ca = jac.columns[a];
        sys.gradient[ca] += g[a];
        for (int b = 0; b < e; ++b) sys.gauss_newton(ca, jac.columns[b]) += vtv(a, b);
      }
    }
  }
  const double inv_m = 1.0 / static_cast<double>(n);
  sys.gradient *= inv_m;
  sys.gauss_newton *= inv_m;
  sys.loss = 0.5 * data * inv_m;

  if (config_.variant.has(Submodel::JointCorrection)) {
    for (int i = 0; i < kNumJoints; ++i) {
      const double w = 2.0 * config_.lambda_j / (scaling_[i] * scaling_[i]);
      const int off = layout.joint_offset(i);
      const auto& values = theta.joint_curves[i].values;
      for (int k = 0; k < layout.joint_size(i); ++k) {
        sys.gradient[off + k] += w * values[k];
        sys.gauss_newton(off + k, off + k) += w;
      }
    }
    sys.loss += regularizer(theta);
  }
  return sys;
}

CalibrationResult Estimator::solve(const ParameterVector& theta0) const {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  const ParameterLayout layout(config_.variant, theta0);
  CalibrationResult result;
  result.config = config_;
  result.scaling = scaling_;
  SolverTrace& trace = result.trace;

  ParameterVector theta = theta0;
  System sys = gradient_and_gauss_newton_matrix(theta);
  trace.iterations.push_back({0, sys.loss, sys.gradient.norm(), 0.0, elapsed()});
  if (!std::isfinite(sys.loss)) {
    trace.stop_reason = "non-finite loss at the initial guess";
    throw SolverDivergedError(trace.stop_reason, trace);
  }
  ParameterVector best = theta;
  double best_loss = sys.loss;
  trace.stop_reason = "max_iters reached";

  for (int it = 1; it <= config_.max_iters; ++it) {
    // (B + lambda I) step = g, solved as (D A D)(D^-1 step) = D g with D = diag(A)^-1/2.
    Eigen::MatrixXd a = sys.gauss_newton;
    a.diagonal().array() += config_.lambda_gn;
    const Eigen::VectorXd d = a.diagonal().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
    a = d.asDiagonal() * a * d.asDiagonal();
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
      trace.stop_reason = "damped Gauss-Newton matrix is not positive definite at iteration " + std::to_string(it);
      throw NumericalError(trace.stop_reason);
    }
    const Eigen::VectorXd step = d.asDiagonal() * llt.solve(d.asDiagonal() * sys.gradient);
    const Eigen::VectorXd flat = layout.pack(theta) - step;
    ParameterVector next = layout.unpack(flat, theta);
    System next_sys = gradient_and_gauss_newton_matrix(next);
    trace.iterations.push_back({it, next_sys.loss, next_sys.gradient.norm(), step.norm(), elapsed()});
    if (!std::isfinite(next_sys.loss)) {
      trace.stop_reason = "non-finite loss at iteration " + std::to_string(it);
      throw SolverDivergedError(trace.stop_reason, trace);
    }
    const double previous = sys.loss;
    theta = std::move(next);
    sys = std::move(next_sys);
    if (sys.loss < best_loss) {
      best_loss = sys.loss;
      best = theta;
    }
    const double rel = std::abs(sys.loss - previous) / std::max(previous, std::numeric_limits<double>::min());
    if (rel < config_.rel_tol) {
      trace.converged = true;
      trace.stop_reason = "relative loss change below tolerance";
      break;
    }
  }
  result.theta = std::move(best);
  result.train = evaluate(desc_, train_, result.theta);
  return result;
}

}  // namespace vjcal
