#include "vjcal/parameters.hpp"

#include "vjcal/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace vjcal {

namespace {

constexpr std::uint8_t bit(Submodel s) { return static_cast<std::uint8_t>(s); }

// Snapping tolerance for range ends that were produced as node / d_supp.
constexpr double kNodeSnap = 1e-9;

}  // namespace

ModelVariant ModelVariant::full() {
  return parse("GCTJ");
}

ModelVariant ModelVariant::parse(std::string_view text) {
  if (text == "full") return full();
  ModelVariant v;
  v.flags_ = 0;
  if (text.empty()) throw InputError("empty model variant");
  for (char c : text) {
    Submodel s;
    switch (c) {
      case 'G': s = Submodel::Geometry; break;
      case 'C': s = Submodel::Compliance; break;
      case 'T': s = Submodel::Thermal; break;
      case 'J': s = Submodel::JointCorrection; break;
      default:
        throw InputError("unknown submodel letter '" + std::string(1, c) + "' in variant '" +
                         std::string(text) + "'");
    }
    if (v.flags_ & bit(s)) {
      throw InputError("duplicate submodel letter in variant '" + std::string(text) + "'");
    }
    v.flags_ |= bit(s);
  }
  if (!v.has(Submodel::Geometry)) {
    throw InputError("variant '" + std::string(text) + "' lacks G; base localization is mandatory");
  }
  return v;
}

ModelVariant ModelVariant::with(Submodel s) const {
  ModelVariant v = *this;
  v.flags_ |= bit(s);
  return v;
}

std::string ModelVariant::name() const {
  std::string out;
  if (has(Submodel::Geometry)) out += 'G';
  if (has(Submodel::Compliance)) out += 'C';
  if (has(Submodel::Thermal)) out += 'T';
  if (has(Submodel::JointCorrection)) out += 'J';
  return out;
}

long segment_index(double q, double d_supp) {
  return static_cast<long>(std::floor(q * d_supp));
}

JointCorrectionCurve JointCorrectionCurve::on_range(double q_min, double q_max, double d_supp) {
  if (!(d_supp > 0.0) || !std::isfinite(d_supp)) {
    throw std::invalid_argument("support density must be positive");
  }
  if (!(q_max > q_min)) throw std::invalid_argument("joint range must satisfy q_min < q_max");
  const long lo = static_cast<long>(std::floor(q_min * d_supp + kNodeSnap));
  long hi = static_cast<long>(std::ceil(q_max * d_supp - kNodeSnap));
  if (hi <= lo) hi = lo + 1;
  JointCorrectionCurve curve;
  curve.d_supp = d_supp;
  curve.first_node = lo;
  curve.values.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  return curve;
}

CurveSample joint_correction(const JointCorrectionCurve& curve, double q) {
  CurveSample out;
  const int n = curve.size();
  if (n == 0) return out;
  if (n == 1) {
    out.value = curve.values[0];
    out.out_of_support = true;
    return out;
  }
  const double s = q * curve.d_supp - static_cast<double>(curve.first_node);
  if (s <= 0.0) {
    out.lower = 0;
    out.w_lower = 1.0;
    out.w_upper = 0.0;
    out.value = curve.values[0];
    out.out_of_support = s < 0.0;
    return out;
  }
  if (s >= n - 1) {
    out.lower = n - 2;
    out.w_lower = 0.0;
    out.w_upper = 1.0;
    out.value = curve.values[n - 1];
    out.out_of_support = s > n - 1;
    return out;
  }
  const long lower_node = segment_index(q, curve.d_supp);
  int lower = static_cast<int>(lower_node - curve.first_node);
  if (lower < 0) lower = 0;
  if (lower > n - 2) lower = n - 2;
  const double frac = q * curve.d_supp - static_cast<double>(curve.first_node + lower);
  out.lower = lower;
  out.w_upper = frac;
  out.w_lower = 1.0 - frac;
  out.value = curve.values[lower] + frac * (curve.values[lower + 1] - curve.values[lower]);
  return out;
}

ParameterVector::ParameterVector() {
  for (auto& g : joint_geo) g.setZero();
}

std::array<double, kNumJoints> ParameterVector::all_masses() const {
  return {0.0, masses[0], masses[1], masses[2], masses[3], m6};
}

std::array<double, kNumJoints> ParameterVector::all_compliances() const {
  return {0.0, compliances[0], compliances[1], compliances[2], compliances[3], compliances[4]};
}

ParameterVector initial_guess() {
  return ParameterVector{};
}

ParameterVector initial_guess(const std::array<JointRange, kNumJoints>& ranges, double d_supp) {
  ParameterVector theta;
  for (int i = 0; i < kNumJoints; ++i) {
    theta.joint_curves[i] = JointCorrectionCurve::on_range(ranges[i].q_min, ranges[i].q_max, d_supp);
  }
  return theta;
}

ParameterLayout::ParameterLayout(ModelVariant variant, const ParameterVector& shape)
    : variant_(variant) {
  int offset = 0;
  if (variant.has(Submodel::Geometry)) {
    geo_ = offset;
    offset += kGeoParams;
  }
  if (variant.has(Submodel::Compliance)) {
    mass_ = offset;
    compliance_ = offset + kFreeMasses;
    offset += kComplianceParams;
  }
  if (variant.has(Submodel::Thermal)) {
    thermal_ = offset;
    offset += kThermalParams;
  }
  if (variant.has(Submodel::JointCorrection)) {
    for (int i = 0; i < kNumJoints; ++i) {
      const int n = shape.joint_curves[i].size();
      if (n < 2) {
        throw std::invalid_argument("joint correction requested but curve " + std::to_string(i + 1) +
                                    " has fewer than 2 support points");
      }
      joint_[i] = offset;
      joint_size_[i] = n;
      offset += n;
    }
  }
  size_ = offset;
}

std::vector<ParameterLayout::Block> ParameterLayout::blocks() const {
  std::vector<Block> out;
  if (geo_ >= 0) out.push_back({Submodel::Geometry, geo_, kGeoParams});
  if (mass_ >= 0) out.push_back({Submodel::Compliance, mass_, kComplianceParams});
  if (thermal_ >= 0) out.push_back({Submodel::Thermal, thermal_, kThermalParams});
  if (joint_[0] >= 0) {
    int total = 0;
    for (int n : joint_size_) total += n;
    out.push_back({Submodel::JointCorrection, joint_[0], total});
  }
  return out;
}

Eigen::VectorXd ParameterLayout::pack(const ParameterVector& theta) const {
  Eigen::VectorXd flat(size_);
  if (geo_ >= 0) {
    flat.segment<6>(geo_) = theta.base_geo;
    for (int i = 0; i < kNumJoints; ++i) flat.segment<5>(geo_ + 6 + 5 * i) = theta.joint_geo[i];
  }
  if (mass_ >= 0) {
    flat.segment<kFreeMasses>(mass_) = theta.masses;
    flat.segment<kFreeCompliances>(compliance_) = theta.compliances;
  }
  if (thermal_ >= 0) flat.segment<kThermalParams>(thermal_) = theta.thermal;
  for (int i = 0; i < kNumJoints; ++i) {
    if (joint_[i] < 0) continue;
    const auto& v = theta.joint_curves[i].values;
    if (static_cast<int>(v.size()) != joint_size_[i]) {
      throw std::invalid_argument("pack: curve " + std::to_string(i + 1) + " size mismatch");
    }
    flat.segment(joint_[i], joint_size_[i]) = Eigen::Map<const Eigen::VectorXd>(v.data(), joint_size_[i]);
  }
  return flat;
}

ParameterVector ParameterLayout::unpack(const Eigen::VectorXd& flat, const ParameterVector& base) const {
  if (flat.size() != size_) {
    throw std::invalid_argument("unpack: flat length " + std::to_string(flat.size()) + " != layout size " +
                                std::to_string(size_));
  }
  ParameterVector theta = base;
  if (geo_ >= 0) {
    theta.base_geo = flat.segment<6>(geo_);
    for (int i = 0; i < kNumJoints; ++i) theta.joint_geo[i] = flat.segment<5>(geo_ + 6 + 5 * i);
  }
  if (mass_ >= 0) {
    theta.masses = flat.segment<kFreeMasses>(mass_);
    theta.compliances = flat.segment<kFreeCompliances>(compliance_);
  }
  if (thermal_ >= 0) theta.thermal = flat.segment<kThermalParams>(thermal_);
  for (int i = 0; i < kNumJoints; ++i) {
    if (joint_[i] < 0) continue;
    auto& v = theta.joint_curves[i].values;
    if (static_cast<int>(v.size()) != joint_size_[i]) {
      throw std::invalid_argument("unpack: curve " + std::to_string(i + 1) + " size mismatch");
    }
    Eigen::Map<Eigen::VectorXd>(v.data(), joint_size_[i]) = flat.segment(joint_[i], joint_size_[i]);
  }
  return theta;
}

}  // namespace vjcal
