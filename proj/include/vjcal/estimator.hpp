#pragma once

#include "vjcal/data_pipeline.hpp"
#include "vjcal/errors.hpp"
#include "vjcal/parameters.hpp"
#include "vjcal/robot_model.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace vjcal {

struct SolverConfig {
  double lambda_gn = 1e-7;  // damping added to the Gauss-Newton matrix
  double lambda_j = 1e-5;   // joint-correction regularization weight
  int max_iters = 200;
  double rel_tol = 1e-12;   // stop when |L_k - L_{k-1}| / L_{k-1} falls below
  ModelVariant variant = ModelVariant::full();
  int threads = 1;

  /// Throws InputError on negative weights or max_iters < 1.
  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double loss = 0.0;
  double gradient_norm = 0.0;
  double step_norm = 0.0;  // norm of the step that produced this iterate
  double wall_time_s = 0.0;
};

struct SolverTrace {
  std::vector<IterationRecord> iterations;
  std::string stop_reason;
  bool converged = false;
};

/// Position-error statistics in micrometres.
struct ErrorSummary {
  double mean_um = 0.0;
  double p95_um = 0.0;
  double max_um = 0.0;
  std::size_t count = 0;
};

struct CalibrationResult {
  ParameterVector theta;
  SolverTrace trace;
  std::array<double, kNumJoints> scaling{};  // l_i (mm/rad)
  ErrorSummary train;
  SolverConfig config;
};

/// Thrown when the loss becomes non-finite; carries the trace so far.
class SolverDivergedError : public NumericalError {
 public:
  SolverDivergedError(const std::string& what, SolverTrace trace)
      : NumericalError(what), trace_(std::move(trace)) {}
  const SolverTrace& trace() const { return trace_; }

 private:
  SolverTrace trace_;
};

/// Mean nominal sensitivity ||d t / d q_i|| over the dataset (mm/rad).
std::array<double, kNumJoints> joint_scaling(const RobotDescription& desc, const Dataset& ds);

/// Nearest-rank percentile (p in (0, 100]) of unsorted values.
double percentile_nearest_rank(std::vector<double> values, double p);

/// Per-pose Euclidean position errors ||t_meas - t_pred|| (mm).
std::vector<double> pose_errors(const RobotDescription& desc, const Dataset& ds, const ParameterVector& theta);

ErrorSummary summarize_errors(const std::vector<double>& errors_mm);

/// Mean, 95th percentile and maximum of the pose errors. Throws InputError
/// on an empty dataset.
ErrorSummary evaluate(const RobotDescription& desc, const Dataset& ds, const ParameterVector& theta);

/// The identification problem on one training set:
///   L = 1/(2m) sum ||t_pred - t_meas||^2 + lambda_J sum_i ||theta_J,i / l_i||^2
/// with the Gauss-Newton approximation of its Hessian.
class Estimator {
 public:
  /// Throws InputError if the dataset is empty.
  Estimator(const RobotDescription& desc, const Dataset& train, SolverConfig config);

  const std::array<double, kNumJoints>& scaling() const { return scaling_; }
  const SolverConfig& config() const { return config_; }

  double loss(const ParameterVector& theta) const;
  double regularizer(const ParameterVector& theta) const;
  struct System {
    double loss = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd gauss_newton;  // B
  };
  System gradient_and_gauss_newton_matrix(const ParameterVector& theta) const;

  /// Damped Gauss-Newton from theta0; returns the minimum-loss iterate.
  CalibrationResult solve(const ParameterVector& theta0) const;

 private:
  const RobotDescription& desc_;
  const Dataset& train_;
  SolverConfig config_;
  std::array<double, kNumJoints> scaling_{};
};

/// The usual starting point: theta^(0) with zero joint curves on `ranges`
/// when the variant includes joint correction.
ParameterVector initial_guess_for(const ModelVariant& variant, const std::array<JointRange, kNumJoints>& ranges,
                                  double d_supp);

}  // namespace vjcal
