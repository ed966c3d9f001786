#include "vjcal/diagnostics.hpp"

#include "vjcal/errors.hpp"
#include "vjcal/jacobian.hpp"
#include "vjcal/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace vjcal {

namespace {

std::vector<double> singular_values(const Eigen::MatrixXd& m) {
  if (m.cols() == 0 || m.rows() == 0) return {};
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd s = svd.singularValues();
  std::vector<double> out(s.data(), s.data() + s.size());
  std::sort(out.rbegin(), out.rend());
  return out;
}

SpectrumReport spectra_of(const Eigen::MatrixXd& g, const ParameterLayout& layout) {
  SpectrumReport r;
  for (const auto& b : layout.blocks()) {
    if (b.kind == Submodel::JointCorrection) continue;
    auto sv = singular_values(g.middleCols(b.offset, b.size));
    if (b.kind == Submodel::Geometry) r.geometry = std::move(sv);
    if (b.kind == Submodel::Compliance) r.compliance = std::move(sv);
    if (b.kind == Submodel::Thermal) r.thermal = std::move(sv);
  }
  if (layout.variant().has(Submodel::JointCorrection)) {
    const int off = layout.joint_offset(0);
    r.joint = singular_values(g.middleCols(off, layout.size() - off));
  }
  return r;
}

std::vector<SparseJacobian> all_jacobians(const RobotDescription& desc, const Dataset& ds,
                                          const ParameterVector& theta, const ParameterLayout& layout, int threads) {
  std::vector<SparseJacobian> jacs(ds.size());
  parallel_for(ds.size(), threads, [&](std::size_t m) {
    const auto& s = ds.samples[m];
    jacs[m] = sparse_position_jacobian(desc, s.q, EnvState{s.kappa}, theta, layout);
  });
  return jacs;
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (v.size() - 1));
}

}  // namespace

SpectrumReport submodel_spectra(const RobotDescription& desc, const Dataset& ds, const ParameterVector& theta,
                                const ModelVariant& variant, int threads) {
  const ParameterLayout layout(variant, theta);
  const auto jacs = all_jacobians(desc, ds, theta, layout, threads);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ds.size()), layout.size());
  for (std::size_t m = 0; m < ds.size(); ++m) {
    const Vec3 r = jacs[m].position - ds.samples[m].t_meas;
    const Eigen::VectorXd row = jacs[m].values.transpose() * r;
    for (std::size_t e = 0; e < jacs[m].columns.size(); ++e) g(m, jacs[m].columns[e]) += row[e];
  }
  return spectra_of(g, layout);
}

SpectrumReport jacobian_spectra(const RobotDescription& desc, const Dataset& ds, const ParameterVector& theta,
                                const ModelVariant& variant, int threads) {
  const ParameterLayout layout(variant, theta);
  const auto jacs = all_jacobians(desc, ds, theta, layout, threads);
  Eigen::MatrixXd stacked = Eigen::MatrixXd::Zero(3 * static_cast<Eigen::Index>(ds.size()), layout.size());
  for (std::size_t m = 0; m < ds.size(); ++m) {
    for (std::size_t e = 0; e < jacs[m].columns.size(); ++e) {
      stacked.block<3, 1>(3 * m, jacs[m].columns[e]) += jacs[m].values.col(e);
    }
  }
  SpectrumReport r = spectra_of(stacked, layout);
  r.jacobian_based = true;
  return r;
}

JointProjection project_residuals_to_joints(const RobotDescription& desc, const Dataset& ds,
                                            const ParameterVector& theta, double min_sensitivity) {
  JointProjection out;
  out.delta_q.resize(ds.size(), Vector6::Zero());
  out.undefined.resize(ds.size());
  for (std::size_t m = 0; m < ds.size(); ++m) {
    const auto& s = ds.samples[m];
    const EnvState env{s.kappa};
    const Vec3 r = s.t_meas - fk_augmented(desc, s.q, env, theta).translation;
    for (int i = 0; i < kNumJoints; ++i) {
      const Vec3 j = augmented_joint_sensitivity(desc, s.q, env, theta, i);
      const double jj = j.squaredNorm();
      if (std::sqrt(jj) < min_sensitivity) {
        out.undefined[m].set(i);
        out.delta_q[m][i] = std::nan("");
        continue;
      }
      out.delta_q[m][i] = j.dot(r) / jj;
    }
  }
  return out;
}

std::vector<ProfilePoint> moving_average_profile(const std::vector<double>& q, const std::vector<double>& values,
                                                 double window, const std::vector<double>& centers) {
  std::vector<std::size_t> order(q.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return q[a] < q[b]; });
  std::vector<double> sorted_q(q.size());
  for (std::size_t k = 0; k < order.size(); ++k) sorted_q[k] = q[order[k]];
  std::vector<ProfilePoint> out;
  out.reserve(centers.size());
  for (double c : centers) {
    ProfilePoint p;
    p.q = c;
    auto lo = std::lower_bound(sorted_q.begin(), sorted_q.end(), c - 0.5 * window);
    auto hi = std::upper_bound(sorted_q.begin(), sorted_q.end(), c + 0.5 * window);
    double sum = 0.0;
    for (auto it = lo; it != hi; ++it) {
      const double v = values[order[it - sorted_q.begin()]];
      if (std::isnan(v)) continue;
      sum += v;
      ++p.count;
    }
    p.value = p.count ? sum / p.count : std::nan("");
    out.push_back(p);
  }
  return out;
}

double repeatability_rp(double l_bar, double s_l) { return l_bar + 3.0 * s_l; }

RepeatabilityReport repeatability(const std::vector<std::vector<RepeatabilityPoint>>& clusters,
                                  double drift_window_s) {
  if (clusters.empty()) throw InputError("repeatability: no clusters");
  RepeatabilityReport rep;
  std::vector<double> distances;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    auto pts = clusters[c];
    if (pts.size() < 2) throw InputError("repeatability: cluster " + std::to_string(c) + " has fewer than 2 points");
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    Vec3 raw_mean = Vec3::Zero();
    for (const auto& p : pts) raw_mean += p.position;
    rep.cluster_means.push_back(raw_mean / static_cast<double>(pts.size()));

    std::vector<Vec3> detrended;
    if (drift_window_s > 0.0) {
      const double half = 0.5 * drift_window_s;
      const double t0 = pts.front().timestamp, t1 = pts.back().timestamp;
      std::vector<Vec3> rolling(pts.size());
      std::size_t lo = 0, hi = 0;
      Vec3 sum = Vec3::Zero();
      for (std::size_t j = 0; j < pts.size(); ++j) {
        while (hi < pts.size() && pts[hi].timestamp <= pts[j].timestamp + half) sum += pts[hi++].position;
        while (pts[lo].timestamp < pts[j].timestamp - half) sum -= pts[lo++].position;
        rolling[j] = sum / static_cast<double>(hi - lo);
      }
      double drift = 0.0;
      for (std::size_t j = 0; j < pts.size(); ++j) {
        drift = std::max(drift, (rolling[j] - rolling.front()).norm());
        if (pts[j].timestamp < t0 + half || pts[j].timestamp > t1 - half) continue;
        detrended.push_back(pts[j].position - rolling[j]);
      }
      rep.drift_um.push_back(1e3 * drift);
    } else {
      for (const auto& p : pts) detrended.push_back(p.position);
      rep.drift_um.push_back(0.0);
    }
    if (detrended.size() < 2) {
      throw InputError("repeatability: cluster " + std::to_string(c) +
                       " keeps fewer than 2 points after trimming; shorten the drift window");
    }
    Vec3 centre = Vec3::Zero();
    for (const auto& p : detrended) centre += p;
    centre /= static_cast<double>(detrended.size());
    for (const auto& p : detrended) distances.push_back(1e3 * (p - centre).norm());
  }
  const double n = static_cast<double>(distances.size());
  rep.n_points = distances.size();
  rep.l_bar_um = std::accumulate(distances.begin(), distances.end(), 0.0) / n;
  double ss = 0.0;
  for (double l : distances) ss += (l - rep.l_bar_um) * (l - rep.l_bar_um);
  rep.s_l_um = std::sqrt(ss / (n - 1.0));
  rep.rp_um = repeatability_rp(rep.l_bar_um, rep.s_l_um);
  return rep;
}

std::vector<std::vector<RepeatabilityPoint>> load_repeatability_clusters(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open repeatability file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty file");
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) {
      cell.erase(std::remove_if(cell.begin(), cell.end(), ::isspace), cell.end());
      header.push_back(cell);
    }
  }
  const std::vector<std::string> need{"cluster", "timestamp_s", "x_mm", "y_mm", "z_mm"};
  std::vector<int> col;
  for (const auto& name : need) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError(path + ": missing column '" + name + "'");
    col.push_back(static_cast<int>(it - header.begin()));
  }
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<RepeatabilityPoint>> clusters;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::istringstream r(line);
    std::string cell;
    while (std::getline(r, cell, ',')) cells.push_back(cell);
    auto num = [&](int c) {
      if (col[c] >= static_cast<int>(cells.size())) {
        throw InputError(path + ": row " + std::to_string(row) + " is missing column '" + need[c] + "'");
      }
      const std::string& s = cells[col[c]];
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || !std::isfinite(v)) {
        throw InputError(path + ": row " + std::to_string(row) + ": invalid value in '" + need[c] + "'");
      }
      return v;
    };
    RepeatabilityPoint p{num(1), Vec3(num(2), num(3), num(4))};
    const std::string id = cells.at(col[0]);
    auto [it, inserted] = index.emplace(id, clusters.size());
    if (inserted) clusters.emplace_back();
    clusters[it->second].push_back(p);
  }
  return clusters;
}

bool AblationReport::any_failed() const {
  for (const auto& v : variants) {
    for (const auto& f : v.folds) {
      if (!f.error.empty()) return true;
    }
  }
  return false;
}

ErrorSummary aggregate_folds(const std::vector<ErrorSummary>& per_fold, const std::vector<double>& pooled_mm) {
  ErrorSummary agg;
  if (pooled_mm.empty()) return agg;
  agg.count = pooled_mm.size();
  agg.mean_um = 1e3 * std::accumulate(pooled_mm.begin(), pooled_mm.end(), 0.0) / static_cast<double>(agg.count);
  for (const auto& f : per_fold) {
    agg.p95_um = std::max(agg.p95_um, f.p95_um);
    agg.max_um = std::max(agg.max_um, f.max_um);
  }
  return agg;
}

AblationReport run_crossval(const RobotDescription& desc, const Dataset& ds,
                            const std::array<JointRange, kNumJoints>& ranges, const std::vector<ModelVariant>& variants,
                            const CrossvalConfig& config) {
  const auto folds = temporal_folds(ds, config.k_folds);
  AblationReport report;
  report.k_folds = config.k_folds;
  for (const auto& variant : variants) {
    VariantResult vr;
    vr.variant = variant;
    std::vector<ErrorSummary> train_stats, val_stats;
    std::vector<double> train_pool, val_pool;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      FoldResult fr;
      fr.fold = static_cast<int>(f);
      const Dataset train = subset(ds, folds[f].train);
      const Dataset val = subset(ds, folds[f].validation);
      fr.n_train = train.size();
      fr.n_validation = val.size();
      try {
        SolverConfig sc = config.solver;
        sc.variant = variant;
        const Estimator est(desc, train, sc);
        CalibrationResult res = est.solve(initial_guess_for(variant, ranges, config.d_supp));
        fr.theta = std::move(res.theta);
        fr.iterations = static_cast<int>(res.trace.iterations.size()) - 1;
        fr.converged = res.trace.converged;
        const auto train_err = pose_errors(desc, train, fr.theta);
        fr.validation_errors_mm = pose_errors(desc, val, fr.theta);
        fr.train = summarize_errors(train_err);
        fr.validation = summarize_errors(fr.validation_errors_mm);
        train_stats.push_back(fr.train);
        val_stats.push_back(fr.validation);
        train_pool.insert(train_pool.end(), train_err.begin(), train_err.end());
        val_pool.insert(val_pool.end(), fr.validation_errors_mm.begin(), fr.validation_errors_mm.end());
      } catch (const NumericalError& e) {
        fr.error = "fold " + std::to_string(f) + ": " + e.what();
      }
      vr.folds.push_back(std::move(fr));
    }
    vr.train = aggregate_folds(train_stats, train_pool);
    vr.validation = aggregate_folds(val_stats, val_pool);
    report.variants.push_back(std::move(vr));
  }
  return report;
}

std::vector<ReductionPoint> data_reduction_study(const RobotDescription& desc, const Dataset& ds,
                                                 const std::array<JointRange, kNumJoints>& ranges,
                                                 const std::vector<std::size_t>& k_values,
                                                 const CrossvalConfig& config, std::uint64_t seed) {
  if (!std::is_sorted(k_values.begin(), k_values.end())) throw InputError("k values must be ascending");
  const auto folds = temporal_folds(ds, config.k_folds);
  std::size_t smallest = ds.size();
  for (const auto& f : folds) smallest = std::min(smallest, f.train.size());
  for (std::size_t k : k_values) {
    if (k < 1 || k > smallest) {
      throw InputError("k = " + std::to_string(k) + " exceeds the smallest training set (" +
                       std::to_string(smallest) + ")");
    }
  }
  std::vector<ReductionPoint> out;
  for (std::size_t k : k_values) {
    ReductionPoint p;
    p.k = k;
    std::vector<double> train_means, abs_j;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const Dataset full_train = subset(ds, folds[f].train);
      const Dataset train = subsample_training(full_train, k, seed + f);
      const Dataset val = subset(ds, folds[f].validation);
      try {
        const Estimator est(desc, train, config.solver);
        const CalibrationResult res = est.solve(initial_guess_for(config.solver.variant, ranges, config.d_supp));
        p.fold_val_mean_um.push_back(evaluate(desc, val, res.theta).mean_um);
        train_means.push_back(res.train.mean_um);
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& c : res.theta.joint_curves) {
          for (double v : c.values) sum += std::abs(v);
          n += c.values.size();
        }
        abs_j.push_back(n ? sum / n : 0.0);
      } catch (const NumericalError&) {
        ++p.failed_folds;
      }
    }
    auto mean = [](const std::vector<double>& v) {
      return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    };
    p.val_mean_um = mean(p.fold_val_mean_um);
    p.val_mean_std_um = sample_std(p.fold_val_mean_um);
    p.train_mean_um = mean(train_means);
    p.train_mean_std_um = sample_std(train_means);
    p.joint_corr_mean_abs_rad = mean(abs_j);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace vjcal
