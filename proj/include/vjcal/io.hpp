#pragma once

#include "vjcal/data_pipeline.hpp"
#include "vjcal/diagnostics.hpp"
#include "vjcal/estimator.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vjcal {

using Json = nlohmann::ordered_json;

Json read_json_file(const std::string& path);
void write_json_file(const Json& j, const std::string& path);

/// Robot description document. Parsing throws InputError naming the key
/// path of a missing or mistyped field, e.g. "joints[2].axis".
Json description_to_json(const RobotDescription& desc);
RobotDescription description_from_json(const Json& j);
RobotDescription load_description(const std::string& path);

/// FNV-1a (64 bit, hex) of the canonical description document.
std::string description_checksum(const RobotDescription& desc);

Json theta_to_json(const ParameterVector& theta, const RobotDescription& desc);
/// Throws InputError if the stored checksum does not match `desc`.
ParameterVector theta_from_json(const Json& j, const RobotDescription& desc);

Json calibration_to_json(const CalibrationResult& result, const RobotDescription& desc);
ParameterVector load_theta(const std::string& path, const RobotDescription& desc);

Json error_summary_to_json(const ErrorSummary& s);

/// Options shared by the command-line workflows.
struct RunConfig {
  SolverConfig solver;
  int folds = 5;
  double d_supp = kDefaultSupportDensity;
  int min_count = 10;
  std::optional<double> sigma_threshold_um = 6.0;
  std::vector<std::size_t> k_values;
  std::uint64_t seed = 1;
  double drift_window_s = 1800.0;
};

RunConfig run_config_from_json(const Json& j);
Json run_config_to_json(const RunConfig& c);

/// Synthetic-data recipe: sampling and noise settings plus either an
/// explicit ground-truth file or a ground-truth recipe with its own seed.
struct SynthConfig {
  SynthSpec spec;
  GroundTruthRecipe recipe;
  std::uint64_t truth_seed = 7;
  std::optional<std::string> truth_file;
};

SynthConfig synth_config_from_json(const Json& j);
Json synth_config_to_json(const SynthConfig& c);
/// Resolves the ground truth of `c` for `desc` into c.spec.ground_truth.
SynthSpec resolve_synth_spec(const SynthConfig& c, const RobotDescription& desc);

Json spectrum_to_json(const SpectrumReport& r);
Json ablation_to_json(const AblationReport& r);
/// Table rows: variant,fold,train_mean,train_p95,train_max,val_mean,val_p95,val_max (um).
std::string ablation_to_csv(const AblationReport& r);
Json reduction_to_json(const std::vector<ReductionPoint>& points);
std::string reduction_to_csv(const std::vector<ReductionPoint>& points);
Json repeatability_to_json(const RepeatabilityReport& r);
std::string projection_to_csv(const Dataset& ds, const JointProjection& p);

}  // namespace vjcal
