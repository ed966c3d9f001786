#pragma once

#include "vjcal/parameters.hpp"
#include "vjcal/robot_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vjcal {

struct MeasurementSample {
  double timestamp = 0.0;             // s
  JointState q = JointState::Zero();  // rad
  double kappa = 25.0;                // deg C
  Vec3 t_meas = Vec3::Zero();         // mm
  std::optional<double> sigma_um;     // within-sample variability
};

struct DatasetProvenance {
  std::string source;
  std::vector<std::string> filters;
  std::optional<std::uint64_t> seed;
};

/// Time-ordered measurements.
struct Dataset {
  std::vector<MeasurementSample> samples;
  DatasetProvenance provenance;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  /// Throws InputError on non-finite fields, negative sigma or decreasing time.
  void validate() const;
};

/// Column schema of the dataset file, in order.
inline constexpr const char* kDatasetColumns[] = {"timestamp_s", "q1", "q2", "q3", "q4", "q5", "q6",
                                                  "kappa_c", "x_mm", "y_mm", "z_mm", "sigma_um"};

Dataset read_dataset(std::istream& in, const std::string& source);
void write_dataset(const Dataset& ds, std::ostream& out);
/// Loads and time-sorts a dataset file. Throws InputError naming the row or
/// column on malformed input.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

/// Keeps samples whose sigma is at or below the threshold. Samples without
/// sigma are kept and counted in the provenance note.
Dataset filter_sigma(const Dataset& ds, double threshold_um);

struct DensityFilterResult {
  Dataset dataset;
  std::array<JointRange, kNumJoints> ranges{};
  int passes = 0;
};

/// Restricts every joint to the longest contiguous run of segments (width
/// 1/d_supp, aligned to multiples of 1/d_supp) holding at least `min_count`
/// samples, dropping everything outside and repeating until nothing
/// changes. Throws UnusableDatasetError if a joint has no qualifying segment.
DensityFilterResult filter_support_density(const Dataset& ds, double d_supp, int min_count = 10);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Consecutive chunks in time; fold i validates on chunk i. Chunk sizes
/// differ by at most one (earlier chunks take the remainder).
std::vector<Fold> temporal_folds(std::size_t n_samples, int k_folds = 5);
std::vector<Fold> temporal_folds(const Dataset& ds, int k_folds = 5);

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices);

/// Uniform random subset of k samples, kept in time order.
Dataset subsample_training(const Dataset& train, std::size_t k, std::uint64_t seed);

/// Ambient temperature mean + amplitude * sin(2 pi t / period).
struct TemperatureProfile {
  double mean_c = 21.0;
  double amplitude_c = 1.5;
  double period_s = 86400.0;
  double at(double t) const;
};

/// Log-normal model for the tracker's within-sample variability column.
struct TrackerSigmaModel {
  double median_um = 3.0;
  double log_sd = 0.42;
};

struct SynthSpec {
  ParameterVector ground_truth;
  std::array<JointRange, kNumJoints> box{};
  TemperatureProfile temperature;
  Vec3 noise_sigma_um = Vec3::Zero();  // per axis
  std::size_t n_samples = 1000;
  std::uint64_t seed = 1;
  double start_time_s = 0.0;
  double sample_interval_s = 30.0;
  std::optional<TrackerSigmaModel> tracker_sigma;

  void validate() const;
};

/// Joint-space box used for synthetic sampling with the example arm.
std::array<JointRange, kNumJoints> default_sampling_box();

/// Recipe for the synthetic ground truth.
struct GroundTruthRecipe {
  double geo_angle_rad = 1e-3;          // uniform +- bound for geometric angles
  double geo_translation_mm = 0.5;      // uniform +- bound for geometric translations
  double joint_error_amplitude_rad = 1.5e-4;
  double alpha_scale = 1.0;             // multiplies every expansion coefficient
  std::optional<double> uniform_alpha;  // replaces the per-link coefficients
  double d_supp = kDefaultSupportDensity;
  bool geometry = true;
  bool compliance = true;
  bool thermal = true;
  bool joint_correction = true;
};

/// Lumped masses m2..m5 (kg), compliances k2..k6 (rad/(N*mm)) and expansion
/// coefficients alpha1..alpha6 (1/K) used as default synthetic truth.
Eigen::Vector4d reference_masses();
Eigen::Matrix<double, 5, 1> reference_compliances();
Vector6 reference_expansion();

/// Seeded ground truth: random geometric offsets, reference compliance and
/// thermal values, and zero-mean two-harmonic joint errors sampled on the
/// support grid covering `box`.
ParameterVector default_ground_truth(const RobotDescription& desc, const std::array<JointRange, kNumJoints>& box,
                                     const GroundTruthRecipe& recipe, std::uint64_t seed);

/// Samples q uniformly in the box, kappa from the profile, and
/// t_meas = fk_augmented(q, kappa; ground truth) + Gaussian noise.
Dataset synthesize(const RobotDescription& desc, const SynthSpec& spec);

}  // namespace vjcal
