#pragma once

#include "vjcal/transform.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vjcal {

inline constexpr int kNumJoints = 6;
inline constexpr int kGeoParams = 6 + 5 * kNumJoints;  // base + five per joint
inline constexpr int kFreeMasses = 4;                   // m2..m5
inline constexpr int kFreeCompliances = 5;              // k2..k6
inline constexpr int kComplianceParams = kFreeMasses + kFreeCompliances;
inline constexpr int kThermalParams = kNumJoints;
inline constexpr double kDefaultSupportDensity = 80.0;  // support points per rad

enum class Submodel : std::uint8_t {
  Geometry = 1,
  Compliance = 2,
  Thermal = 4,
  JointCorrection = 8,
};

/// Which submodels take part in a calibration. Written as a string of the
/// letters G, C, T, J ("GCTJ" is the full model).
class ModelVariant {
 public:
  ModelVariant() = default;
  static ModelVariant full();
  /// Accepts any combination of G, C, T, J (G is mandatory) or "full".
  /// Throws InputError otherwise.
  static ModelVariant parse(std::string_view text);

  bool has(Submodel s) const { return (flags_ & static_cast<std::uint8_t>(s)) != 0; }
  ModelVariant with(Submodel s) const;
  std::string name() const;

  friend bool operator==(const ModelVariant&, const ModelVariant&) = default;

 private:
  std::uint8_t flags_ = static_cast<std::uint8_t>(Submodel::Geometry);
};

/// Supported joint-angle interval [q_min, q_max] (rad).
struct JointRange {
  double q_min = 0.0;
  double q_max = 0.0;
};

/// Grid index of the segment that holds q for support density d: floor(q * d).
long segment_index(double q, double d_supp);

/// Piecewise-linear joint correction. Support points sit at integer
/// multiples of q_step = 1 / d_supp, from node `first_node` onward.
/// A default-constructed (empty) curve means "no joint correction".
struct JointCorrectionCurve {
  double d_supp = kDefaultSupportDensity;
  long first_node = 0;
  std::vector<double> values;

  /// Zero-valued curve whose nodes cover [q_min, q_max], snapped outward.
  static JointCorrectionCurve on_range(double q_min, double q_max, double d_supp);

  bool empty() const { return values.empty(); }
  int size() const { return static_cast<int>(values.size()); }
  double q_step() const { return 1.0 / d_supp; }
  double node_angle(int local_index) const { return (first_node + local_index) / d_supp; }
  double q_min() const { return node_angle(0); }
  double q_max() const { return node_angle(size() - 1); }
};

/// Value of a curve at q with its two-entry sparse gradient.
struct CurveSample {
  double value = 0.0;
  int lower = 0;  // local node index carrying w_lower
  double w_lower = 1.0;
  double w_upper = 0.0;  // weight of node lower + 1 (absent when zero and lower is last)
  bool out_of_support = false;
};

/// Linear interpolation between the bracketing support values. Angles
/// outside [q_min, q_max] are clamped to the nearest end and flagged.
CurveSample joint_correction(const JointCorrectionCurve& curve, double q);

/// Fixed, never-optimized model constants.
struct ModelConstants {
  double kappa0 = 25.0;                                    // thermal baseline (deg C)
  std::array<double, kNumJoints> com_ratio{0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
};

/// Calibration parameters of the augmented model. Units: rad, mm, kg,
/// rad/(N*mm) for compliances and 1/K for expansion coefficients.
struct ParameterVector {
  Vector6 base_geo = Vector6::Zero();
  std::array<Eigen::Matrix<double, 5, 1>, kNumJoints> joint_geo{};
  Eigen::Vector4d masses = Eigen::Vector4d::Ones();  // m2..m5
  double m6 = 1.0;                                   // frozen
  Eigen::Matrix<double, 5, 1> compliances = Eigen::Matrix<double, 5, 1>::Zero();  // k2..k6
  Vector6 thermal = Vector6::Zero();                 // alpha1..alpha6
  std::array<JointCorrectionCurve, kNumJoints> joint_curves{};
  ModelConstants constants{};

  ParameterVector();

  /// Masses m1..m6; m1 does not exist in the model and reads as 0.
  std::array<double, kNumJoints> all_masses() const;
  /// Compliances k1..k6; k1 does not exist in the model and reads as 0.
  std::array<double, kNumJoints> all_compliances() const;
};

/// The initial guess: ones for the masses, zeros everywhere else. When
/// `ranges` is given, zero-valued joint-correction curves cover them.
ParameterVector initial_guess();
ParameterVector initial_guess(const std::array<JointRange, kNumJoints>& ranges,
                              double d_supp = kDefaultSupportDensity);

/// Maps the free parameters of a variant onto a flat vector laid out as
/// [G (36) | C (m2..m5, k2..k6) | T (6) | J (sum of curve sizes)].
/// Submodels missing from the variant have no columns.
class ParameterLayout {
 public:
  struct Block {
    Submodel kind;
    int offset;
    int size;
  };

  ParameterLayout(ModelVariant variant, const ParameterVector& shape);

  int size() const { return size_; }
  ModelVariant variant() const { return variant_; }
  int geo_offset() const { return geo_; }
  int mass_offset() const { return mass_; }
  int compliance_offset() const { return compliance_; }
  int thermal_offset() const { return thermal_; }
  int joint_offset(int joint) const { return joint_[joint]; }
  int joint_size(int joint) const { return joint_size_[joint]; }
  std::vector<Block> blocks() const;

  Eigen::VectorXd pack(const ParameterVector& theta) const;
  /// Writes `flat` into a copy of `base`; entries outside the layout keep
  /// their value from `base`. Throws std::invalid_argument on length or
  /// curve-shape mismatch.
  ParameterVector unpack(const Eigen::VectorXd& flat, const ParameterVector& base) const;

 private:
  ModelVariant variant_;
  int geo_ = -1, mass_ = -1, compliance_ = -1, thermal_ = -1;
  std::array<int, kNumJoints> joint_{-1, -1, -1, -1, -1, -1};
  std::array<int, kNumJoints> joint_size_{};
  int size_ = 0;
};

}  // namespace vjcal
