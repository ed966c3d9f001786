#include "vjcal/data_pipeline.hpp"

#include "vjcal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace vjcal {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string stem(const std::string& name) {
  const auto p = name.find('_');
  return p == std::string::npos ? name : name.substr(0, p);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_cell(const std::string& cell, const std::string& column, std::size_t row) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (cell.empty() || end != begin + cell.size() || !std::isfinite(v)) {
    throw InputError("dataset row " + std::to_string(row) + ": column '" + column + "' has invalid value '" + cell +
                     "'");
  }
  return v;
}

}  // namespace

void Dataset::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const std::string where = "sample " + std::to_string(i);
    if (!std::isfinite(s.timestamp) || !s.q.allFinite() || !std::isfinite(s.kappa) || !s.t_meas.allFinite()) {
      throw InputError(where + ": non-finite field");
    }
    if (s.sigma_um && !(*s.sigma_um >= 0.0)) throw InputError(where + ": sigma must be >= 0");
    if (i > 0 && s.timestamp < samples[i - 1].timestamp) throw InputError(where + ": timestamps decrease");
  }
}

Dataset read_dataset(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty dataset file");
  const std::vector<std::string> header = split_row(line);

  std::map<std::string, int> position;
  for (std::size_t c = 0; c < header.size(); ++c) position[header[c]] = static_cast<int>(c);
  auto find = [&](const std::string& name, bool required) -> int {
    if (auto it = position.find(name); it != position.end()) return it->second;
    if (name.size() == 2 && name[0] == 'q') {
      if (auto it = position.find(name + "_rad"); it != position.end()) return it->second;
    }
    for (const auto& h : header) {
      if (stem(h) == stem(name) && h != name) {
        throw InputError(source + ": column '" + h + "' has the wrong unit, expected '" + name + "'");
      }
    }
    if (required) throw InputError(source + ": missing column '" + name + "'");
    return -1;
  };

  std::array<int, 12> col{};
  for (int c = 0; c < 12; ++c) col[c] = find(kDatasetColumns[c], c < 11);

  Dataset ds;
  ds.provenance.source = source;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    auto cell = [&](int c) -> const std::string& {
      if (col[c] >= static_cast<int>(cells.size())) {
        throw InputError(source + ": dataset row " + std::to_string(row) + " is missing column '" +
                         kDatasetColumns[c] + "'");
      }
      return cells[col[c]];
    };
    auto num = [&](int c) { return parse_cell(cell(c), kDatasetColumns[c], row); };
    MeasurementSample s;
    s.timestamp = num(0);
    for (int j = 0; j < kNumJoints; ++j) s.q[j] = num(1 + j);
    s.kappa = num(7);
    s.t_meas = Vec3(num(8), num(9), num(10));
    if (col[11] >= 0 && col[11] < static_cast<int>(cells.size()) && !cells[col[11]].empty()) {
      s.sigma_um = num(11);
      if (*s.sigma_um < 0.0) {
        throw InputError(source + ": dataset row " + std::to_string(row) + ": sigma_um must be >= 0");
      }
    }
    ds.samples.push_back(s);
  }
  std::stable_sort(ds.samples.begin(), ds.samples.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return ds;
}

void write_dataset(const Dataset& ds, std::ostream& out) {
  for (int c = 0; c < 12; ++c) out << (c ? "," : "") << kDatasetColumns[c];
  out << '\n';
  for (const auto& s : ds.samples) {
    out << fmt(s.timestamp);
    for (int j = 0; j < kNumJoints; ++j) out << ',' << fmt(s.q[j]);
    out << ',' << fmt(s.kappa);
    for (int a = 0; a < 3; ++a) out << ',' << fmt(s.t_meas[a]);
    out << ',';
    if (s.sigma_um) out << fmt(*s.sigma_um);
    out << '\n';
  }
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset file '" + path + "'");
  return read_dataset(in, path);
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write dataset file '" + path + "'");
  write_dataset(ds, out);
}

Dataset filter_sigma(const Dataset& ds, double threshold_um) {
  Dataset out;
  out.provenance = ds.provenance;
  std::size_t without = 0;
  for (const auto& s : ds.samples) {
    if (!s.sigma_um) {
      ++without;
      out.samples.push_back(s);
    } else if (*s.sigma_um <= threshold_um) {
      out.samples.push_back(s);
    }
  }
  out.provenance.filters.push_back("sigma<=" + fmt(threshold_um) + "um: kept " + std::to_string(out.size()) +
                                   " of " + std::to_string(ds.size()) + " (" + std::to_string(without) +
                                   " without sigma)");
  return out;
}

DensityFilterResult filter_support_density(const Dataset& ds, double d_supp, int min_count) {
  if (!(d_supp > 0.0)) throw InputError("support density must be positive");
  DensityFilterResult result;
  std::vector<MeasurementSample> current = ds.samples;
  std::array<std::pair<long, long>, kNumJoints> runs{};
  for (;;) {
    ++result.passes;
    for (int j = 0; j < kNumJoints; ++j) {
      std::map<long, int> counts;
      for (const auto& s : current) ++counts[segment_index(s.q[j], d_supp)];
      long best_lo = 0, best_hi = -1, run_lo = 0;
      long best_len = 0, best_mass = 0, run_len = 0, run_mass = 0, prev = 0;
      for (const auto& [bin, count] : counts) {
        if (count < min_count) {
          run_len = 0;
          continue;
        }
        if (run_len > 0 && bin == prev + 1) {
          ++run_len;
          run_mass += count;
        } else {
          run_lo = bin;
          run_len = 1;
          run_mass = count;
        }
        prev = bin;
        if (run_len > best_len || (run_len == best_len && run_mass > best_mass)) {
          best_len = run_len;
          best_mass = run_mass;
          best_lo = run_lo;
          best_hi = bin;
        }
      }
      if (best_len == 0) {
        throw UnusableDatasetError("joint " + std::to_string(j + 1) + ": no segment of width 1/" + fmt(d_supp) +
                                   " rad holds at least " + std::to_string(min_count) + " samples");
      }
      runs[j] = {best_lo, best_hi};
    }
    std::vector<MeasurementSample> kept;
    kept.reserve(current.size());
    for (const auto& s : current) {
      bool inside = true;
      for (int j = 0; j < kNumJoints && inside; ++j) {
        const long b = segment_index(s.q[j], d_supp);
        inside = b >= runs[j].first && b <= runs[j].second;
      }
      if (inside) kept.push_back(s);
    }
    const bool stable = kept.size() == current.size();
    current = std::move(kept);
    if (stable) break;
  }
  for (int j = 0; j < kNumJoints; ++j) {
    result.ranges[j] = {runs[j].first / d_supp, (runs[j].second + 1) / d_supp};
  }
  result.dataset.samples = std::move(current);
  result.dataset.provenance = ds.provenance;
  result.dataset.provenance.filters.push_back("density d=" + fmt(d_supp) + " min=" + std::to_string(min_count) +
                                              ": kept " + std::to_string(result.dataset.size()) + " of " +
                                              std::to_string(ds.size()) + " in " + std::to_string(result.passes) +
                                              " passes");
  return result;
}

std::vector<Fold> temporal_folds(std::size_t n_samples, int k_folds) {
  if (k_folds < 2) throw InputError("need at least 2 folds");
  const auto k = static_cast<std::size_t>(k_folds);
  if (n_samples < k) {
    throw UnusableDatasetError("dataset has " + std::to_string(n_samples) + " samples, fewer than " +
                               std::to_string(k) + " folds");
  }
  const std::size_t base = n_samples / k, extra = n_samples % k;
  std::vector<Fold> folds(k);
  std::size_t begin = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t end = begin + base + (f < extra ? 1 : 0);
    for (std::size_t i = 0; i < n_samples; ++i) {
      (i >= begin && i < end ? folds[f].validation : folds[f].train).push_back(i);
    }
    begin = end;
  }
  return folds;
}

std::vector<Fold> temporal_folds(const Dataset& ds, int k_folds) {
  return temporal_folds(ds.size(), k_folds);
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.provenance = ds.provenance;
  out.samples.reserve(indices.size());
  for (std::size_t i : indices) out.samples.push_back(ds.samples.at(i));
  return out;
}

Dataset subsample_training(const Dataset& train, std::size_t k, std::uint64_t seed) {
  if (k > train.size()) {
    throw InputError("cannot subsample " + std::to_string(k) + " of " + std::to_string(train.size()) + " samples");
  }
  std::vector<std::size_t> all(train.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::size_t> picked;
  picked.reserve(k);
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), k, rng);
  Dataset out = subset(train, picked);
  out.provenance.filters.push_back("subsample k=" + std::to_string(k) + " seed=" + std::to_string(seed));
  return out;
}

double TemperatureProfile::at(double t) const {
  return mean_c + amplitude_c * std::sin(2.0 * M_PI * t / period_s);
}

void SynthSpec::validate() const {
  if (n_samples < 1) throw InputError("synth config: 'n_samples' must be >= 1");
  if (!(noise_sigma_um.array() >= 0.0).all()) throw InputError("synth config: 'noise_sigma_um' must be >= 0");
  for (int j = 0; j < kNumJoints; ++j) {
    if (!(box[j].q_min < box[j].q_max)) {
      throw InputError("synth config: 'box[" + std::to_string(j) + "]' must satisfy q_min < q_max");
    }
  }
  if (!(temperature.period_s > 0.0)) throw InputError("synth config: 'temperature.period_s' must be positive");
}

std::array<JointRange, kNumJoints> default_sampling_box() {
  return {{{-0.7, 0.7}, {-1.3, -0.1}, {-0.2, 1.0}, {-0.7, 0.7}, {0.3, 1.5}, {-0.7, 0.7}}};
}

Eigen::Vector4d reference_masses() { return {67.0, -13.2, 34.6, -26.5}; }

Eigen::Matrix<double, 5, 1> reference_compliances() {
  Eigen::Matrix<double, 5, 1> k;
  k << 3.87e-9, 4.26e-9, 20.3e-9, 47.8e-9, 70.1e-9;
  return k;
}

Vector6 reference_expansion() {
  Vector6 a;
  a << 28.85e-6, 32.43e-6, 13.45e-6, 18.98e-6, 21.36e-6, 30.33e-6;
  return a;
}

ParameterVector default_ground_truth(const RobotDescription& desc, const std::array<JointRange, kNumJoints>& box,
                                     const GroundTruthRecipe& recipe, std::uint64_t seed) {
  (void)desc;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  ParameterVector theta;
  if (recipe.geometry) {
    for (int c = 0; c < 6; ++c) {
      theta.base_geo[c] = unit(rng) * (c < 3 ? recipe.geo_angle_rad : recipe.geo_translation_mm);
    }
    for (int i = 0; i < kNumJoints; ++i) {
      for (int f = 0; f < 5; ++f) {
        theta.joint_geo[i][f] = unit(rng) * (f < 3 ? recipe.geo_angle_rad : recipe.geo_translation_mm);
      }
    }
  }
  if (recipe.compliance) {
    theta.masses = reference_masses();
    theta.compliances = reference_compliances();
  }
  if (recipe.thermal) {
    theta.thermal = recipe.uniform_alpha ? Vector6::Constant(*recipe.uniform_alpha) : reference_expansion();
    theta.thermal *= recipe.alpha_scale;
  }
  if (recipe.joint_correction) {
    std::uniform_real_distribution<double> w1(5.0, 10.0), w2(15.0, 25.0), phase(0.0, 2.0 * M_PI);
    const double a1 = recipe.joint_error_amplitude_rad * 2.0 / 3.0;
    const double a2 = recipe.joint_error_amplitude_rad / 3.0;
    for (int i = 0; i < kNumJoints; ++i) {
      auto curve = JointCorrectionCurve::on_range(box[i].q_min, box[i].q_max, recipe.d_supp);
      const double f1 = w1(rng), f2 = w2(rng), p1 = phase(rng), p2 = phase(rng);
      for (int n = 0; n < curve.size(); ++n) {
        const double q = curve.node_angle(n);
        curve.values[n] = a1 * std::sin(f1 * q + p1) + a2 * std::sin(f2 * q + p2);
      }
      const double mean = std::accumulate(curve.values.begin(), curve.values.end(), 0.0) / curve.size();
      for (double& v : curve.values) v -= mean;
      theta.joint_curves[i] = std::move(curve);
    }
  }
  return theta;
}

Dataset synthesize(const RobotDescription& desc, const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset ds;
  ds.provenance.source = "synthetic";
  ds.provenance.seed = spec.seed;
  ds.samples.reserve(spec.n_samples);
  for (std::size_t m = 0; m < spec.n_samples; ++m) {
    MeasurementSample s;
    s.timestamp = spec.start_time_s + static_cast<double>(m) * spec.sample_interval_s;
    for (int j = 0; j < kNumJoints; ++j) {
      s.q[j] = spec.box[j].q_min + unit(rng) * (spec.box[j].q_max - spec.box[j].q_min);
    }
    s.kappa = spec.temperature.at(s.timestamp);
    const Vec3 t = fk_augmented(desc, s.q, EnvState{s.kappa}, spec.ground_truth).translation;
    Vec3 noise;
    for (int a = 0; a < 3; ++a) noise[a] = normal(rng) * spec.noise_sigma_um[a] * 1e-3;
    s.t_meas = t + noise;
    if (spec.tracker_sigma) {
      s.sigma_um = spec.tracker_sigma->median_um * std::exp(spec.tracker_sigma->log_sd * normal(rng));
    }
    ds.samples.push_back(s);
  }
  return ds;
}

}  // namespace vjcal
