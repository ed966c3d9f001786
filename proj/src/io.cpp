#include "vjcal/io.hpp"

#include "vjcal/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace vjcal {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const Json& field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw InputError("'" + (path.empty() ? std::string("<root>") : path) + "' must be an object");
  auto it = j.find(key);
  if (it == j.end()) throw InputError("missing field '" + join(path, key) + "'");
  return *it;
}

const Json* optional_field(const Json& j, const std::string& key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double as_double(const Json& j, const std::string& path) {
  if (!j.is_number()) throw InputError("field '" + path + "' must be a number");
  return j.get<double>();
}

long long as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw InputError("field '" + path + "' must be an integer");
  return j.get<long long>();
}

std::uint64_t as_seed(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw InputError("field '" + path + "' must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

bool as_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw InputError("field '" + path + "' must be true or false");
  return j.get<bool>();
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw InputError("field '" + path + "' must be a string");
  return j.get<std::string>();
}

Eigen::VectorXd as_vector(const Json& j, const std::string& path, int size = -1) {
  if (!j.is_array() || (size >= 0 && static_cast<int>(j.size()) != size)) {
    throw InputError("field '" + path + "' must be an array" +
                     (size >= 0 ? " of " + std::to_string(size) + " numbers" : std::string(" of numbers")));
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = as_double(j[i], at_index(path, i));
  return v;
}

Vec3 as_vec3(const Json& j, const std::string& path) { return as_vector(j, path, 3); }

template <typename V>
Json array_of(const V& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json transform_to_json(const Transform& t) {
  Json rows = Json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(array_of(Vec3(t.rotation.row(r).transpose())));
  return Json{{"rotation", rows}, {"translation", array_of(t.translation)}};
}

Transform transform_from_json(const Json& j, const std::string& path) {
  Transform t;
  t.translation = as_vec3(field(j, "translation", path), join(path, "translation"));
  if (const Json* r = optional_field(j, "rotation")) {
    const std::string rp = join(path, "rotation");
    if (!r->is_array() || r->size() != 3) throw InputError("field '" + rp + "' must be a 3x3 array");
    for (int row = 0; row < 3; ++row) t.rotation.row(row) = as_vec3((*r)[row], at_index(rp, row)).transpose();
  }
  return t;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_json_file(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

Json description_to_json(const RobotDescription& d) {
  Json joints = Json::array();
  for (const auto& js : d.joints) {
    joints.push_back(Json{{"axis", array_of(js.axis)}, {"limits", Json::array({js.q_min_hw, js.q_max_hw})}});
  }
  Json links = Json::array();
  for (const auto& l : d.links) links.push_back(array_of(l));
  return Json{{"name", d.name},
              {"base", transform_to_json(d.base)},
              {"tcp_local", transform_to_json(d.tcp_local)},
              {"joints", joints},
              {"links", links},
              {"gravity", array_of(d.gravity)}};
}

RobotDescription description_from_json(const Json& j) {
  RobotDescription d;
  d.name = as_string(field(j, "name", ""), "name");
  d.base = transform_from_json(field(j, "base", ""), "base");
  d.tcp_local = transform_from_json(field(j, "tcp_local", ""), "tcp_local");
  const Json& joints = field(j, "joints", "");
  if (!joints.is_array() || joints.size() != kNumJoints) throw InputError("field 'joints' must list 6 joints");
  for (int i = 0; i < kNumJoints; ++i) {
    const std::string p = at_index("joints", i);
    d.joints[i].axis = as_vec3(field(joints[i], "axis", p), p + ".axis");
    const Eigen::VectorXd lim = as_vector(field(joints[i], "limits", p), p + ".limits", 2);
    d.joints[i].q_min_hw = lim[0];
    d.joints[i].q_max_hw = lim[1];
  }
  const Json& links = field(j, "links", "");
  if (!links.is_array() || links.size() != kNumJoints) throw InputError("field 'links' must list 6 translations");
  for (int i = 0; i < kNumJoints; ++i) d.links[i] = as_vec3(links[i], at_index("links", i));
  if (const Json* g = optional_field(j, "gravity")) d.gravity = as_vec3(*g, "gravity");
  d.validate();
  return d;
}

RobotDescription load_description(const std::string& path) {
  try {
    return description_from_json(read_json_file(path));
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::string description_checksum(const RobotDescription& desc) {
  const std::string text = description_to_json(desc).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return hex64(h);
}

Json theta_to_json(const ParameterVector& t, const RobotDescription& desc) {
  Json joints_geo = Json::array();
  for (const auto& g : t.joint_geo) joints_geo.push_back(array_of(g));
  Json curves = Json::array();
  double d_supp = kDefaultSupportDensity;
  for (const auto& c : t.joint_curves) {
    if (c.empty()) {
      curves.push_back(nullptr);
      continue;
    }
    d_supp = c.d_supp;
    curves.push_back(Json{{"d_supp", c.d_supp},
                          {"first_node", c.first_node},
                          {"q_min", c.q_min()},
                          {"q_max", c.q_max()},
                          {"values", c.values}});
  }
  return Json{
      {"description_checksum", description_checksum(desc)},
      {"geometry", {{"base", array_of(t.base_geo)}, {"joints", joints_geo}}},
      {"compliance", {{"masses", array_of(t.masses)}, {"m6", t.m6}, {"compliances", array_of(t.compliances)}}},
      {"thermal", {{"alpha", array_of(t.thermal)}}},
      {"joint_correction", {{"d_supp", d_supp}, {"curves", curves}}},
      {"constants",
       {{"kappa0", t.constants.kappa0},
        {"com_ratio", Json(std::vector<double>(t.constants.com_ratio.begin(), t.constants.com_ratio.end()))}}},
  };
}

ParameterVector theta_from_json(const Json& j, const RobotDescription& desc) {
  const std::string stored = as_string(field(j, "description_checksum", ""), "description_checksum");
  if (stored != description_checksum(desc)) {
    throw InputError("parameter file was calibrated for a different robot description (checksum " + stored +
                     ", expected " + description_checksum(desc) + ")");
  }
  ParameterVector t;
  const Json& geo = field(j, "geometry", "");
  t.base_geo = as_vector(field(geo, "base", "geometry"), "geometry.base", 6);
  const Json& jg = field(geo, "joints", "geometry");
  if (!jg.is_array() || jg.size() != kNumJoints) throw InputError("field 'geometry.joints' must list 6 blocks");
  for (int i = 0; i < kNumJoints; ++i) t.joint_geo[i] = as_vector(jg[i], at_index("geometry.joints", i), 5);
  const Json& c = field(j, "compliance", "");
  t.masses = as_vector(field(c, "masses", "compliance"), "compliance.masses", 4);
  t.m6 = as_double(field(c, "m6", "compliance"), "compliance.m6");
  t.compliances = as_vector(field(c, "compliances", "compliance"), "compliance.compliances", 5);
  t.thermal = as_vector(field(field(j, "thermal", ""), "alpha", "thermal"), "thermal.alpha", 6);
  const Json& jc = field(j, "joint_correction", "");
  const Json& curves = field(jc, "curves", "joint_correction");
  if (!curves.is_array() || curves.size() != kNumJoints) {
    throw InputError("field 'joint_correction.curves' must list 6 entries");
  }
  for (int i = 0; i < kNumJoints; ++i) {
    if (curves[i].is_null()) continue;
    const std::string p = at_index("joint_correction.curves", i);
    JointCorrectionCurve curve;
    curve.d_supp = as_double(field(curves[i], "d_supp", p), p + ".d_supp");
    curve.first_node = as_int(field(curves[i], "first_node", p), p + ".first_node");
    const Eigen::VectorXd v = as_vector(field(curves[i], "values", p), p + ".values");
    curve.values.assign(v.data(), v.data() + v.size());
    if (curve.size() == 1) throw InputError("field '" + p + ".values' needs at least 2 support points");
    t.joint_curves[i] = std::move(curve);
  }
  if (const Json* k = optional_field(j, "constants")) {
    if (const Json* k0 = optional_field(*k, "kappa0")) t.constants.kappa0 = as_double(*k0, "constants.kappa0");
    if (const Json* r = optional_field(*k, "com_ratio")) {
      const Eigen::VectorXd rv = as_vector(*r, "constants.com_ratio", kNumJoints);
      for (int i = 0; i < kNumJoints; ++i) t.constants.com_ratio[i] = rv[i];
    }
  }
  return t;
}

ParameterVector load_theta(const std::string& path, const RobotDescription& desc) {
  Json j = read_json_file(path);
  if (j.is_object() && j.contains("theta")) j = j["theta"];
  try {
    return theta_from_json(j, desc);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

Json error_summary_to_json(const ErrorSummary& s) {
  return Json{{"mean_um", s.mean_um}, {"p95_um", s.p95_um}, {"max_um", s.max_um}, {"count", s.count}};
}

namespace {

Json solver_to_json(const SolverConfig& c) {
  return Json{{"lambda_gn", c.lambda_gn}, {"lambda_j", c.lambda_j}, {"max_iters", c.max_iters},
              {"rel_tol", c.rel_tol},     {"variant", c.variant.name()}, {"threads", c.threads}};
}

Json trace_to_json(const SolverTrace& t) {
  Json its = Json::array();
  for (const auto& r : t.iterations) {
    its.push_back(Json{{"iteration", r.iteration},
                       {"loss", r.loss},
                       {"gradient_norm", r.gradient_norm},
                       {"step_norm", r.step_norm},
                       {"wall_time_s", r.wall_time_s}});
  }
  return Json{{"converged", t.converged}, {"stop_reason", t.stop_reason}, {"iterations", its}};
}

}  // namespace

Json calibration_to_json(const CalibrationResult& r, const RobotDescription& desc) {
  return Json{{"theta", theta_to_json(r.theta, desc)},
              {"config", solver_to_json(r.config)},
              {"scaling_mm_per_rad", std::vector<double>(r.scaling.begin(), r.scaling.end())},
              {"train_errors", error_summary_to_json(r.train)},
              {"trace", trace_to_json(r.trace)}};
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  if (!j.is_object()) throw InputError("config must be an object");
  if (const Json* v = optional_field(j, "lambda_gn")) c.solver.lambda_gn = as_double(*v, "lambda_gn");
  if (const Json* v = optional_field(j, "lambda_j")) c.solver.lambda_j = as_double(*v, "lambda_j");
  if (const Json* v = optional_field(j, "max_iters")) c.solver.max_iters = static_cast<int>(as_int(*v, "max_iters"));
  if (const Json* v = optional_field(j, "rel_tol")) c.solver.rel_tol = as_double(*v, "rel_tol");
  if (const Json* v = optional_field(j, "threads")) c.solver.threads = static_cast<int>(as_int(*v, "threads"));
  if (const Json* v = optional_field(j, "variant")) c.solver.variant = ModelVariant::parse(as_string(*v, "variant"));
  if (const Json* v = optional_field(j, "folds")) c.folds = static_cast<int>(as_int(*v, "folds"));
  if (const Json* v = optional_field(j, "d_supp")) c.d_supp = as_double(*v, "d_supp");
  if (const Json* v = optional_field(j, "min_count")) c.min_count = static_cast<int>(as_int(*v, "min_count"));
  if (j.contains("sigma_threshold_um")) {
    const Json& v = j["sigma_threshold_um"];
    c.sigma_threshold_um = v.is_null() ? std::nullopt : std::optional<double>(as_double(v, "sigma_threshold_um"));
  }
  if (const Json* v = optional_field(j, "k_values")) {
    if (!v->is_array()) throw InputError("field 'k_values' must be an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const long long k = as_int((*v)[i], at_index("k_values", i));
      if (k < 1) throw InputError("field '" + at_index("k_values", i) + "' must be >= 1");
      c.k_values.push_back(static_cast<std::size_t>(k));
    }
  }
  if (const Json* v = optional_field(j, "seed")) c.seed = as_seed(*v, "seed");
  if (const Json* v = optional_field(j, "drift_window_s")) c.drift_window_s = as_double(*v, "drift_window_s");
  c.solver.validate();
  return c;
}

Json run_config_to_json(const RunConfig& c) {
  Json j = solver_to_json(c.solver);
  j["folds"] = c.folds;
  j["d_supp"] = c.d_supp;
  j["min_count"] = c.min_count;
  j["sigma_threshold_um"] = c.sigma_threshold_um ? Json(*c.sigma_threshold_um) : Json(nullptr);
  j["k_values"] = c.k_values;
  j["seed"] = c.seed;
  j["drift_window_s"] = c.drift_window_s;
  return j;
}

SynthConfig synth_config_from_json(const Json& j) {
  SynthConfig c;
  if (!j.is_object()) throw InputError("synth config must be an object");
  c.spec.seed = as_seed(field(j, "seed", ""), "seed");
  const long long n = as_int(field(j, "n_samples", ""), "n_samples");
  if (n < 1) throw InputError("field 'n_samples' must be >= 1");
  c.spec.n_samples = static_cast<std::size_t>(n);
  if (const Json* v = optional_field(j, "noise_sigma_um")) {
    c.spec.noise_sigma_um = v->is_array() ? as_vec3(*v, "noise_sigma_um")
                                          : Vec3::Constant(as_double(*v, "noise_sigma_um"));
  }
  c.spec.box = default_sampling_box();
  if (const Json* v = optional_field(j, "box")) {
    if (!v->is_array() || v->size() != kNumJoints) throw InputError("field 'box' must list 6 [q_min, q_max] pairs");
    for (int i = 0; i < kNumJoints; ++i) {
      const Eigen::VectorXd b = as_vector((*v)[i], at_index("box", i), 2);
      c.spec.box[i] = {b[0], b[1]};
    }
  }
  if (const Json* v = optional_field(j, "temperature")) {
    if (const Json* x = optional_field(*v, "mean_c")) c.spec.temperature.mean_c = as_double(*x, "temperature.mean_c");
    if (const Json* x = optional_field(*v, "amplitude_c")) {
      c.spec.temperature.amplitude_c = as_double(*x, "temperature.amplitude_c");
    }
    if (const Json* x = optional_field(*v, "period_s")) {
      c.spec.temperature.period_s = as_double(*x, "temperature.period_s");
    }
  }
  if (const Json* v = optional_field(j, "start_time_s")) c.spec.start_time_s = as_double(*v, "start_time_s");
  if (const Json* v = optional_field(j, "sample_interval_s")) {
    c.spec.sample_interval_s = as_double(*v, "sample_interval_s");
  }
  if (const Json* v = optional_field(j, "tracker_sigma")) {
    TrackerSigmaModel m;
    if (const Json* x = optional_field(*v, "median_um")) m.median_um = as_double(*x, "tracker_sigma.median_um");
    if (const Json* x = optional_field(*v, "log_sd")) m.log_sd = as_double(*x, "tracker_sigma.log_sd");
    c.spec.tracker_sigma = m;
  }
  if (const Json* v = optional_field(j, "ground_truth_file")) c.truth_file = as_string(*v, "ground_truth_file");
  if (const Json* g = optional_field(j, "ground_truth")) {
    const std::string p = "ground_truth";
    auto num = [&](const char* key, double& dst) {
      if (const Json* x = optional_field(*g, key)) dst = as_double(*x, join(p, key));
    };
    auto flag = [&](const char* key, bool& dst) {
      if (const Json* x = optional_field(*g, key)) dst = as_bool(*x, join(p, key));
    };
    if (const Json* x = optional_field(*g, "seed")) c.truth_seed = as_seed(*x, join(p, "seed"));
    num("geo_angle_rad", c.recipe.geo_angle_rad);
    num("geo_translation_mm", c.recipe.geo_translation_mm);
    num("joint_error_amplitude_rad", c.recipe.joint_error_amplitude_rad);
    num("alpha_scale", c.recipe.alpha_scale);
    num("d_supp", c.recipe.d_supp);
    if (const Json* x = optional_field(*g, "uniform_alpha")) c.recipe.uniform_alpha = as_double(*x, join(p, "uniform_alpha"));
    flag("geometry", c.recipe.geometry);
    flag("compliance", c.recipe.compliance);
    flag("thermal", c.recipe.thermal);
    flag("joint_correction", c.recipe.joint_correction);
  }
  c.spec.validate();
  return c;
}

Json synth_config_to_json(const SynthConfig& c) {
  Json box = Json::array();
  for (const auto& b : c.spec.box) box.push_back(Json::array({b.q_min, b.q_max}));
  Json j{{"seed", c.spec.seed},
         {"n_samples", c.spec.n_samples},
         {"noise_sigma_um", array_of(c.spec.noise_sigma_um)},
         {"box", box},
         {"temperature",
          {{"mean_c", c.spec.temperature.mean_c},
           {"amplitude_c", c.spec.temperature.amplitude_c},
           {"period_s", c.spec.temperature.period_s}}},
         {"start_time_s", c.spec.start_time_s},
         {"sample_interval_s", c.spec.sample_interval_s}};
  if (c.spec.tracker_sigma) {
    j["tracker_sigma"] = {{"median_um", c.spec.tracker_sigma->median_um}, {"log_sd", c.spec.tracker_sigma->log_sd}};
  }
  if (c.truth_file) {
    j["ground_truth_file"] = *c.truth_file;
  } else {
    const auto& r = c.recipe;
    j["ground_truth"] = {{"seed", c.truth_seed},
                         {"geo_angle_rad", r.geo_angle_rad},
                         {"geo_translation_mm", r.geo_translation_mm},
                         {"joint_error_amplitude_rad", r.joint_error_amplitude_rad},
                         {"alpha_scale", r.alpha_scale},
                         {"uniform_alpha", r.uniform_alpha ? Json(*r.uniform_alpha) : Json(nullptr)},
                         {"d_supp", r.d_supp},
                         {"geometry", r.geometry},
                         {"compliance", r.compliance},
                         {"thermal", r.thermal},
                         {"joint_correction", r.joint_correction}};
  }
  return j;
}

SynthSpec resolve_synth_spec(const SynthConfig& c, const RobotDescription& desc) {
  SynthSpec spec = c.spec;
  spec.ground_truth = c.truth_file ? load_theta(*c.truth_file, desc)
                                   : default_ground_truth(desc, spec.box, c.recipe, c.truth_seed);
  return spec;
}

Json spectrum_to_json(const SpectrumReport& r) {
  return Json{{"basis", r.jacobian_based ? "jacobian" : "loss_gradient"},
              {"geometry", r.geometry},
              {"compliance", r.compliance},
              {"thermal", r.thermal},
              {"joint_correction", r.joint}};
}

Json ablation_to_json(const AblationReport& r) {
  Json variants = Json::array();
  for (const auto& v : r.variants) {
    Json folds = Json::array();
    for (const auto& f : v.folds) {
      Json fj{{"fold", f.fold}, {"n_train", f.n_train}, {"n_validation", f.n_validation}};
      if (f.error.empty()) {
        fj["train"] = error_summary_to_json(f.train);
        fj["validation"] = error_summary_to_json(f.validation);
        fj["iterations"] = f.iterations;
        fj["converged"] = f.converged;
      } else {
        fj["error"] = f.error;
      }
      folds.push_back(fj);
    }
    variants.push_back(Json{{"variant", v.variant.name()},
                            {"train", error_summary_to_json(v.train)},
                            {"validation", error_summary_to_json(v.validation)},
                            {"folds", folds}});
  }
  return Json{{"k_folds", r.k_folds}, {"variants", variants}};
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string ablation_to_csv(const AblationReport& r) {
  std::ostringstream out;
  out << "variant,fold,train_mean_um,train_p95_um,train_max_um,val_mean_um,val_p95_um,val_max_um\n";
  for (const auto& v : r.variants) {
    for (const auto& f : v.folds) {
      out << v.variant.name() << ',' << f.fold;
      if (f.error.empty()) {
        out << ',' << num(f.train.mean_um) << ',' << num(f.train.p95_um) << ',' << num(f.train.max_um) << ','
            << num(f.validation.mean_um) << ',' << num(f.validation.p95_um) << ',' << num(f.validation.max_um);
      } else {
        out << ",,,,,,";
      }
      out << '\n';
    }
    out << v.variant.name() << ",all," << num(v.train.mean_um) << ',' << num(v.train.p95_um) << ','
        << num(v.train.max_um) << ',' << num(v.validation.mean_um) << ',' << num(v.validation.p95_um) << ','
        << num(v.validation.max_um) << '\n';
  }
  return out.str();
}

Json reduction_to_json(const std::vector<ReductionPoint>& points) {
  Json a = Json::array();
  for (const auto& p : points) {
    a.push_back(Json{{"k", p.k},
                     {"val_mean_um", p.val_mean_um},
                     {"val_mean_std_um", p.val_mean_std_um},
                     {"train_mean_um", p.train_mean_um},
                     {"train_mean_std_um", p.train_mean_std_um},
                     {"joint_corr_mean_abs_rad", p.joint_corr_mean_abs_rad},
                     {"fold_val_mean_um", p.fold_val_mean_um},
                     {"failed_folds", p.failed_folds}});
  }
  return a;
}

std::string reduction_to_csv(const std::vector<ReductionPoint>& points) {
  std::ostringstream out;
  out << "k,val_mean_um,val_std_um,train_mean_um,train_std_um,joint_corr_mean_abs_urad\n";
  for (const auto& p : points) {
    out << p.k << ',' << num(p.val_mean_um) << ',' << num(p.val_mean_std_um) << ',' << num(p.train_mean_um) << ','
        << num(p.train_mean_std_um) << ',' << num(1e6 * p.joint_corr_mean_abs_rad) << '\n';
  }
  return out.str();
}

Json repeatability_to_json(const RepeatabilityReport& r) {
  Json means = Json::array();
  for (const auto& m : r.cluster_means) means.push_back(array_of(m));
  return Json{{"l_bar_um", r.l_bar_um}, {"s_l_um", r.s_l_um},       {"rp_um", r.rp_um},
              {"n_points", r.n_points}, {"cluster_means_mm", means}, {"drift_um", r.drift_um}};
}

std::string projection_to_csv(const Dataset& ds, const JointProjection& p) {
  std::ostringstream out;
  out.precision(17);
  out << "timestamp_s,q1,q2,q3,q4,q5,q6,dq1,dq2,dq3,dq4,dq5,dq6\n";
  for (std::size_t m = 0; m < ds.size(); ++m) {
    out << ds.samples[m].timestamp;
    for (int i = 0; i < kNumJoints; ++i) out << ',' << ds.samples[m].q[i];
    for (int i = 0; i < kNumJoints; ++i) {
      out << ',';
      if (!p.undefined[m].test(i)) out << p.delta_q[m][i];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace vjcal
