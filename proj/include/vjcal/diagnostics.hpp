#pragma once

#include "vjcal/data_pipeline.hpp"
#include "vjcal/estimator.hpp"

#include <bitset>
#include <string>
#include <vector>

namespace vjcal {

/// Singular values per submodel, descending. Submodels absent from the
/// variant have empty spectra.
struct SpectrumReport {
  std::vector<double> geometry;
  std::vector<double> compliance;
  std::vector<double> thermal;
  std::vector<double> joint;
  bool jacobian_based = false;
};

/// SVD of the per-sample loss-gradient matrix G (row m is
/// (t_pred - t_meas)^T d t_pred / d theta_sub) for each submodel block.
/// Meaningful only near a converged theta.
SpectrumReport submodel_spectra(const RobotDescription& desc, const Dataset& ds, const ParameterVector& theta,
                                const ModelVariant& variant, int threads = 1);

/// Same, on the stacked position Jacobian instead of the gradient matrix.
SpectrumReport jacobian_spectra(const RobotDescription& desc, const Dataset& ds, const ParameterVector& theta,
                                const ModelVariant& variant, int threads = 1);

/// Residuals mapped onto each joint by scalar least squares:
///   dq_i = J_i^T (t_meas - t_pred) / (J_i^T J_i),  J_i = d t_pred / d q_i.
struct JointProjection {
  std::vector<Vector6> delta_q;                      // rad
  std::vector<std::bitset<kNumJoints>> undefined;    // ||J_i|| below threshold
};

JointProjection project_residuals_to_joints(const RobotDescription& desc, const Dataset& ds,
                                            const ParameterVector& theta, double min_sensitivity = 1e-6);

struct ProfilePoint {
  double q = 0.0;
  double value = 0.0;
  std::size_t count = 0;
};

/// Mean of `values` over |q - center| <= window / 2 for each center.
std::vector<ProfilePoint> moving_average_profile(const std::vector<double>& q, const std::vector<double>& values,
                                                 double window, const std::vector<double>& centers);

struct RepeatabilityPoint {
  double timestamp = 0.0;  // s
  Vec3 position = Vec3::Zero();  // mm
};

struct RepeatabilityReport {
  double l_bar_um = 0.0;
  double s_l_um = 0.0;
  double rp_um = 0.0;
  std::vector<Vec3> cluster_means;  // mm, raw points
  std::vector<double> drift_um;     // per cluster, span of the rolling mean
  std::size_t n_points = 0;         // points used after trimming
};

double repeatability_rp(double l_bar, double s_l);

/// Removes drift with a centered rolling mean (window in seconds, <= 0
/// disables it), trims half a window at both ends of each cluster, then
/// l_bar = mean distance to the cluster centre, S_l its sample deviation,
/// RP = l_bar + 3 S_l. Throws InputError if a cluster keeps < 2 points.
RepeatabilityReport repeatability(const std::vector<std::vector<RepeatabilityPoint>>& clusters,
                                  double drift_window_s = 1800.0);

/// Clusters from a file with columns cluster,timestamp_s,x_mm,y_mm,z_mm.
std::vector<std::vector<RepeatabilityPoint>> load_repeatability_clusters(const std::string& path);

struct CrossvalConfig {
  SolverConfig solver;
  int k_folds = 5;
  double d_supp = kDefaultSupportDensity;
};

struct FoldResult {
  int fold = 0;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  ErrorSummary train;
  ErrorSummary validation;
  int iterations = 0;
  bool converged = false;
  std::string error;  // non-empty when the solve failed
  ParameterVector theta;
  std::vector<double> validation_errors_mm;
};

struct VariantResult {
  ModelVariant variant;
  std::vector<FoldResult> folds;
  ErrorSummary train;       // pooled mean, worst-fold p95 and max
  ErrorSummary validation;  // same
};

struct AblationReport {
  int k_folds = 5;
  std::vector<VariantResult> variants;
  bool any_failed() const;
};

/// Pooled mean over every residual of every fold; p95 and max are the
/// maximum over folds of the per-fold values.
ErrorSummary aggregate_folds(const std::vector<ErrorSummary>& per_fold, const std::vector<double>& pooled_mm);

/// Temporal k-fold calibration and evaluation of each variant. Joint
/// correction grids cover `ranges` (from the filtered dataset). Failed
/// folds are recorded, not thrown.
AblationReport run_crossval(const RobotDescription& desc, const Dataset& ds,
                            const std::array<JointRange, kNumJoints>& ranges, const std::vector<ModelVariant>& variants,
                            const CrossvalConfig& config);

struct ReductionPoint {
  std::size_t k = 0;
  double val_mean_um = 0.0;
  double val_mean_std_um = 0.0;   // across folds
  double train_mean_um = 0.0;
  double train_mean_std_um = 0.0;
  double joint_corr_mean_abs_rad = 0.0;  // mean |theta_J| over folds
  std::vector<double> fold_val_mean_um;
  std::size_t failed_folds = 0;
};

/// For each k, subsample every fold's training set to k samples, calibrate
/// the configured variant and evaluate on the fold's validation chunk.
std::vector<ReductionPoint> data_reduction_study(const RobotDescription& desc, const Dataset& ds,
                                                 const std::array<JointRange, kNumJoints>& ranges,
                                                 const std::vector<std::size_t>& k_values,
                                                 const CrossvalConfig& config, std::uint64_t seed);

}  // namespace vjcal
