// vjcal command-line front end.

#include "vjcal/data_pipeline.hpp"
#include "vjcal/diagnostics.hpp"
#include "vjcal/errors.hpp"
#include "vjcal/estimator.hpp"
#include "vjcal/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace vjcal;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string robot, dataset, config, theta, out;
  std::string variant = "GCTJ";
  std::string k_values;
  int folds = 0;
  double d_supp = 0.0, lambda_gn = -1.0, lambda_j = -1.0, window = -1.0;
  long long seed = -1;
  int threads = 0;
  bool jacobian = false;
};

struct Manifest {
  Json doc;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  Manifest(const std::string& command, int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    doc = Json{{"command", command}, {"argv", args}, {"tool_version", kVersion},
               {"inputs", Json::object()}, {"outputs", Json::array()}, {"seeds", Json::object()}};
  }
  void input(const std::string& key, const std::string& path) {
    if (!path.empty()) doc["inputs"][key] = path;
  }
  void output(const std::string& path) { doc["outputs"].push_back(path); }
  void write(const std::string& out) {
    doc["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json_file(doc, out + ".manifest.json");
  }
};

void write_text(const std::string& text, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
}

std::string with_extension(const std::string& path, const std::string& ext) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? path.substr(0, dot) : path) + ext;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw InputError(std::string("missing required option ") + flag);
}

RunConfig load_config(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : run_config_from_json(read_json_file(o.config));
  if (o.d_supp > 0.0) c.d_supp = o.d_supp;
  if (o.lambda_gn >= 0.0) c.solver.lambda_gn = o.lambda_gn;
  if (o.lambda_j >= 0.0) c.solver.lambda_j = o.lambda_j;
  if (o.threads > 0) c.solver.threads = o.threads;
  if (o.folds > 0) c.folds = o.folds;
  if (o.seed >= 0) c.seed = static_cast<std::uint64_t>(o.seed);
  if (o.window >= 0.0) c.drift_window_s = o.window;
  c.solver.validate();
  return c;
}

std::vector<ModelVariant> parse_variants(const std::string& text) {
  std::vector<ModelVariant> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(ModelVariant::parse(item));
  if (out.empty()) throw InputError("no model variant given");
  return out;
}

struct Prepared {
  Dataset data;
  std::array<JointRange, kNumJoints> ranges{};
};

Prepared prepare(const Options& o, const RunConfig& c, Manifest& m) {
  require(o.dataset, "--dataset");
  Dataset ds = load_dataset(o.dataset);
  ds.validate();
  const std::size_t raw = ds.size();
  if (c.sigma_threshold_um) ds = filter_sigma(ds, *c.sigma_threshold_um);
  const std::size_t after_sigma = ds.size();
  auto dens = filter_support_density(ds, c.d_supp, c.min_count);
  m.doc["filtering"] = {{"raw", raw}, {"after_sigma", after_sigma}, {"after_density", dens.dataset.size()},
                        {"notes", dens.dataset.provenance.filters}};
  std::cerr << "dataset: " << raw << " samples, " << after_sigma << " after sigma filter, " << dens.dataset.size()
            << " after density filter\n";
  return {std::move(dens.dataset), dens.ranges};
}

void print_summary(const char* label, const ErrorSummary& s) {
  std::printf("%s mean %.3f um, p95 %.3f um, max %.3f um (n=%zu)\n", label, s.mean_um, s.p95_um, s.max_um, s.count);
}

int cmd_synth(const Options& o, Manifest& m) {
  require(o.robot, "--robot");
  require(o.config, "--config");
  require(o.out, "--out");
  const RobotDescription desc = load_description(o.robot);
  SynthConfig sc = synth_config_from_json(read_json_file(o.config));
  if (o.seed >= 0) sc.spec.seed = static_cast<std::uint64_t>(o.seed);
  const SynthSpec spec = resolve_synth_spec(sc, desc);
  const Dataset ds = synthesize(desc, spec);
  save_dataset(ds, o.out);
  const std::string truth = with_extension(o.out, ".truth.json");
  write_json_file(theta_to_json(spec.ground_truth, desc), truth);
  m.input("robot", o.robot);
  m.input("config", o.config);
  m.doc["seeds"] = {{"samples", sc.spec.seed}, {"ground_truth", sc.truth_seed}};
  m.doc["config"] = synth_config_to_json(sc);
  m.output(o.out);
  m.output(truth);
  m.write(o.out);
  std::printf("wrote %zu samples to %s\n", ds.size(), o.out.c_str());
  return 0;
}

int cmd_calibrate(const Options& o, Manifest& m) {
  require(o.robot, "--robot");
  require(o.out, "--out");
  const RobotDescription desc = load_description(o.robot);
  RunConfig c = load_config(o);
  c.solver.variant = ModelVariant::parse(o.variant);
  m.input("robot", o.robot);
  m.input("dataset", o.dataset);
  m.input("config", o.config);
  m.doc["config"] = run_config_to_json(c);
  const Prepared p = prepare(o, c, m);
  const Estimator est(desc, p.data, c.solver);
  try {
    const CalibrationResult res = est.solve(initial_guess_for(c.solver.variant, p.ranges, c.d_supp));
    write_json_file(calibration_to_json(res, desc), o.out);
    m.output(o.out);
    m.write(o.out);
    print_summary("train", res.train);
    return 0;
  } catch (const SolverDivergedError& e) {
    const std::string trace = with_extension(o.out, ".trace.json");
    CalibrationResult partial;
    partial.trace = e.trace();
    partial.config = c.solver;
    write_json_file(Json{{"error", e.what()}, {"trace", calibration_to_json(partial, desc)["trace"]}}, trace);
    m.output(trace);
    m.write(o.out);
    std::cerr << "solver diverged; trace written to " << trace << '\n';
    throw;
  }
}

int cmd_evaluate(const Options& o, Manifest& m) {
  require(o.robot, "--robot");
  require(o.theta, "--theta");
  require(o.dataset, "--dataset");
  const RobotDescription desc = load_description(o.robot);
  const ParameterVector theta = load_theta(o.theta, desc);
  const Dataset ds = load_dataset(o.dataset);
  ds.validate();
  const ErrorSummary s = evaluate(desc, ds, theta);
  std::size_t flagged = 0;
  for (const auto& smp : ds.samples) {
    SupportFlags f;
    fk_augmented(desc, smp.q, EnvState{smp.kappa}, theta, &f);
    flagged += f.any();
  }
  print_summary("eval", s);
  if (flagged) std::printf("%zu samples outside the joint-correction support (clamped)\n", flagged);
  m.input("robot", o.robot);
  m.input("dataset", o.dataset);
  m.input("theta", o.theta);
  if (!o.out.empty()) {
    Json j = error_summary_to_json(s);
    j["out_of_support"] = flagged;
    write_json_file(j, o.out);
    m.output(o.out);
    m.write(o.out);
  }
  return 0;
}

int cmd_crossval(const Options& o, Manifest& m) {
  require(o.robot, "--robot");
  require(o.out, "--out");
  const RobotDescription desc = load_description(o.robot);
  const RunConfig c = load_config(o);
  const auto variants = parse_variants(o.variant);
  m.input("robot", o.robot);
  m.input("dataset", o.dataset);
  m.input("config", o.config);
  m.doc["config"] = run_config_to_json(c);
  const Prepared p = prepare(o, c, m);
  const AblationReport rep = run_crossval(desc, p.data, p.ranges, variants, {c.solver, c.folds, c.d_supp});
  write_json_file(ablation_to_json(rep), o.out);
  const std::string csv = with_extension(o.out, ".csv");
  write_text(ablation_to_csv(rep), csv);
  m.output(o.out);
  m.output(csv);
  m.write(o.out);
  std::cout << ablation_to_csv(rep);
  if (rep.any_failed()) {
    for (const auto& v : rep.variants) {
      for (const auto& f : v.folds) {
        if (!f.error.empty()) std::cerr << v.variant.name() << " " << f.error << '\n';
      }
    }
    return 4;
  }
  return 0;
}

int cmd_reduce(const Options& o, Manifest& m) {
  require(o.robot, "--robot");
  require(o.out, "--out");
  const RobotDescription desc = load_description(o.robot);
  RunConfig c = load_config(o);
  c.solver.variant = ModelVariant::parse(o.variant);
  if (!o.k_values.empty()) {
    c.k_values.clear();
    std::stringstream in(o.k_values);
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        c.k_values.push_back(std::stoul(item));
      } catch (const std::exception&) {
        throw InputError("invalid --k value '" + item + "'");
      }
    }
  }
  if (c.k_values.empty()) throw InputError("no k values given (--k or config 'k_values')");
  m.input("robot", o.robot);
  m.input("dataset", o.dataset);
  m.input("config", o.config);
  m.doc["config"] = run_config_to_json(c);
  m.doc["seeds"] = {{"subsample", c.seed}};
  const Prepared p = prepare(o, c, m);
  const auto pts = data_reduction_study(desc, p.data, p.ranges, c.k_values, {c.solver, c.folds, c.d_supp}, c.seed);
  write_json_file(reduction_to_json(pts), o.out);
  const std::string csv = with_extension(o.out, ".csv");
  write_text(reduction_to_csv(pts), csv);
  m.output(o.out);
  m.output(csv);
  m.write(o.out);
  std::cout << reduction_to_csv(pts);
  return 0;
}

int cmd_spectra(const Options& o, Manifest& m) {
  require(o.robot, "--robot");
  require(o.theta, "--theta");
  require(o.dataset, "--dataset");
  require(o.out, "--out");
  const RobotDescription desc = load_description(o.robot);
  const ParameterVector theta = load_theta(o.theta, desc);
  const Dataset ds = load_dataset(o.dataset);
  const ModelVariant variant = ModelVariant::parse(o.variant);
  const int threads = std::max(o.threads, 1);
  const SpectrumReport r = o.jacobian ? jacobian_spectra(desc, ds, theta, variant, threads)
                                      : submodel_spectra(desc, ds, theta, variant, threads);
  write_json_file(spectrum_to_json(r), o.out);
  m.input("robot", o.robot);
  m.input("dataset", o.dataset);
  m.input("theta", o.theta);
  m.output(o.out);
  m.write(o.out);
  return 0;
}

int cmd_project(const Options& o, Manifest& m) {
  require(o.robot, "--robot");
  require(o.theta, "--theta");
  require(o.dataset, "--dataset");
  require(o.out, "--out");
  const RobotDescription desc = load_description(o.robot);
  const ParameterVector theta = load_theta(o.theta, desc);
  const Dataset ds = load_dataset(o.dataset);
  write_text(projection_to_csv(ds, project_residuals_to_joints(desc, ds, theta)), o.out);
  m.input("robot", o.robot);
  m.input("dataset", o.dataset);
  m.input("theta", o.theta);
  m.output(o.out);
  m.write(o.out);
  return 0;
}

int cmd_repeatability(const Options& o, Manifest& m) {
  require(o.dataset, "--dataset");
  const RunConfig c = load_config(o);
  const RepeatabilityReport r = repeatability(load_repeatability_clusters(o.dataset), c.drift_window_s);
  std::printf("l_bar %.4f um, S_l %.4f um, RP %.4f um (n=%zu)\n", r.l_bar_um, r.s_l_um, r.rp_um, r.n_points);
  m.input("clusters", o.dataset);
  m.doc["drift_window_s"] = c.drift_window_s;
  if (!o.out.empty()) {
    write_json_file(repeatability_to_json(r), o.out);
    m.output(o.out);
    m.write(o.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static error-model calibration for 6-axis arms"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--robot", o.robot, "robot description (JSON)");
    sub->add_option("--dataset", o.dataset, "measurement file (CSV)");
    sub->add_option("--config", o.config, "configuration (JSON)");
    sub->add_option("--out", o.out, "output path");
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "random seed")->check(CLI::NonNegativeNumber);
  };
  auto solver = [&](CLI::App* sub) {
    sub->add_option("--variant", o.variant, "submodels, e.g. G, GC, GCT, GCTJ");
    sub->add_option("--d-supp", o.d_supp, "support points per rad")->check(CLI::PositiveNumber);
    sub->add_option("--lambda-gn", o.lambda_gn, "Gauss-Newton damping")->check(CLI::NonNegativeNumber);
    sub->add_option("--lambda-j", o.lambda_j, "joint-correction regularization")->check(CLI::NonNegativeNumber);
    sub->add_option("--folds", o.folds, "temporal folds")->check(CLI::Range(2, 1000));
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  common(synth);
  auto* calibrate = app.add_subcommand("calibrate", "identify the model on a dataset");
  common(calibrate);
  solver(calibrate);
  auto* eval = app.add_subcommand("evaluate", "position errors of a calibrated model");
  common(eval);
  eval->add_option("--theta", o.theta, "parameter or calibration file");
  auto* crossval = app.add_subcommand("crossval", "temporal cross-validation over model variants");
  common(crossval);
  solver(crossval);
  o.variant = "G,GC,GCT,GCTJ";
  auto* reduce = app.add_subcommand("reduce-study", "accuracy versus training-set size");
  common(reduce);
  solver(reduce);
  reduce->add_option("--k", o.k_values, "comma-separated training sizes");
  auto* spectra = app.add_subcommand("spectra", "per-submodel singular value spectra");
  common(spectra);
  spectra->add_option("--theta", o.theta, "parameter or calibration file");
  spectra->add_option("--variant", o.variant, "submodels");
  spectra->add_flag("--jacobian", o.jacobian, "use the stacked Jacobian instead of the gradient matrix");
  auto* project = app.add_subcommand("project-residuals", "residuals mapped onto joint angles");
  common(project);
  project->add_option("--theta", o.theta, "parameter or calibration file");
  auto* rep = app.add_subcommand("repeatability", "ISO 9283 repeatability of point clusters");
  common(rep);
  rep->add_option("--window", o.window, "drift rolling-mean window (s), 0 disables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (!crossval->parsed() && o.variant == "G,GC,GCT,GCTJ") o.variant = "GCTJ";

  CLI::App* sub = app.get_subcommands().front();
  Manifest manifest(sub->get_name(), argc, argv);
  try {
    if (sub == synth) return cmd_synth(o, manifest);
    if (sub == calibrate) return cmd_calibrate(o, manifest);
    if (sub == eval) return cmd_evaluate(o, manifest);
    if (sub == crossval) return cmd_crossval(o, manifest);
    if (sub == reduce) return cmd_reduce(o, manifest);
    if (sub == spectra) return cmd_spectra(o, manifest);
    if (sub == project) return cmd_project(o, manifest);
    if (sub == rep) return cmd_repeatability(o, manifest);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const UnusableDatasetError& e) {
    std::cerr << "unusable dataset: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
