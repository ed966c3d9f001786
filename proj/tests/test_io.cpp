#include "vjcal/io.hpp"

#include <doctest.h>

#include <functional>

using namespace vjcal;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("description round trip and checksum") {
  const auto d = example_description();
  const RobotDescription back = description_from_json(description_to_json(d));
  CHECK(description_to_json(back) == description_to_json(d));
  CHECK(description_checksum(back) == description_checksum(d));
  CHECK(description_checksum(d).size() == 16);

  RobotDescription moved = d;
  moved.links[3].x() += 1e-3;
  CHECK(description_checksum(moved) != description_checksum(d));
}

TEST_CASE("description parsing names the offending key path") {
  const Json good = description_to_json(example_description());

  Json j = good;
  j["joints"][2].erase("axis");
  CHECK(message_of([&] { description_from_json(j); }).find("joints[2].axis") != std::string::npos);

  j = good;
  j["joints"][4]["limits"] = Json::array({1.0});
  CHECK(message_of([&] { description_from_json(j); }).find("joints[4].limits") != std::string::npos);

  j = good;
  j["links"][1] = "long";
  CHECK(message_of([&] { description_from_json(j); }).find("links[1]") != std::string::npos);

  j = good;
  j.erase("tcp_local");
  CHECK(message_of([&] { description_from_json(j); }).find("tcp_local") != std::string::npos);

  j = good;
  j["joints"][0]["axis"] = Json::array({0.0, 0.0, 2.0});
  CHECK(message_of([&] { description_from_json(j); }).find("joints[0].axis") != std::string::npos);

  j = good;
  j.erase("gravity");
  CHECK(description_from_json(j).gravity == example_description().gravity);
}

TEST_CASE("theta round trip and description mismatch") {
  const auto d = example_description();
  GroundTruthRecipe r;
  const ParameterVector th = default_ground_truth(d, default_sampling_box(), r, 5);
  const ParameterVector back = theta_from_json(theta_to_json(th, d), d);
  CHECK(back.base_geo == th.base_geo);
  for (int i = 0; i < kNumJoints; ++i) {
    CHECK(back.joint_geo[i] == th.joint_geo[i]);
    CHECK(back.joint_curves[i].values == th.joint_curves[i].values);
    CHECK(back.joint_curves[i].first_node == th.joint_curves[i].first_node);
  }
  CHECK(back.masses == th.masses);
  CHECK(back.compliances == th.compliances);
  CHECK(back.thermal == th.thermal);
  CHECK(back.m6 == th.m6);

  const ParameterVector plain = theta_from_json(theta_to_json(initial_guess(), d), d);
  for (const auto& c : plain.joint_curves) CHECK(c.empty());

  RobotDescription other = d;
  other.tcp_local.translation.z() += 1.0;
  CHECK_THROWS_WITH_AS(theta_from_json(theta_to_json(th, d), other), doctest::Contains("different robot"),
                       InputError);
}

TEST_CASE("run configuration") {
  const RunConfig defaults = run_config_from_json(Json::object());
  CHECK(defaults.solver.lambda_gn == 1e-7);
  CHECK(defaults.solver.lambda_j == 1e-5);
  CHECK(defaults.solver.max_iters == 200);
  CHECK(defaults.folds == 5);
  CHECK(defaults.d_supp == 80.0);
  CHECK(defaults.min_count == 10);
  CHECK(defaults.sigma_threshold_um == 6.0);

  const Json j = run_config_to_json(defaults);
  const RunConfig again = run_config_from_json(j);
  CHECK(run_config_to_json(again) == j);

  CHECK(!run_config_from_json(Json{{"sigma_threshold_um", nullptr}}).sigma_threshold_um);
  CHECK_THROWS_WITH_AS(run_config_from_json(Json{{"seed", "abc"}}), doctest::Contains("seed"), InputError);
  CHECK_THROWS_AS(run_config_from_json(Json{{"seed", -3}}), InputError);
  CHECK_THROWS_AS(run_config_from_json(Json{{"lambda_j", -1.0}}), InputError);
  CHECK_THROWS_AS(run_config_from_json(Json{{"max_iters", 0}}), InputError);
  CHECK_THROWS_AS(run_config_from_json(Json{{"variant", "TX"}}), std::exception);
  CHECK_THROWS_WITH_AS(run_config_from_json(Json{{"k_values", {10, 0}}}), doctest::Contains("k_values[1]"),
                       InputError);
}

TEST_CASE("synthetic configuration") {
  Json j{{"seed", 4}, {"n_samples", 50}, {"noise_sigma_um", 5.0}};
  const SynthConfig c = synth_config_from_json(j);
  CHECK(c.spec.noise_sigma_um == Vec3::Constant(5.0));
  CHECK(c.spec.box[1].q_min == default_sampling_box()[1].q_min);
  const SynthConfig again = synth_config_from_json(synth_config_to_json(c));
  CHECK(synth_config_to_json(again) == synth_config_to_json(c));

  const auto d = example_description();
  const SynthSpec a = resolve_synth_spec(c, d), b = resolve_synth_spec(again, d);
  CHECK(a.ground_truth.base_geo == b.ground_truth.base_geo);

  j["seed"] = "seven";
  CHECK_THROWS_WITH_AS(synth_config_from_json(j), doctest::Contains("seed"), InputError);
  j["seed"] = 1.5;
  CHECK_THROWS_AS(synth_config_from_json(j), InputError);
  j = Json{{"seed", 1}};
  CHECK_THROWS_WITH_AS(synth_config_from_json(j), doctest::Contains("n_samples"), InputError);
  j = Json{{"seed", 1}, {"n_samples", 10}, {"box", {{0.0, 1.0}}}};
  CHECK_THROWS_AS(synth_config_from_json(j), InputError);
  j = Json{{"seed", 1}, {"n_samples", 10}, {"ground_truth", {{"thermal", "yes"}}}};
  CHECK_THROWS_WITH_AS(synth_config_from_json(j), doctest::Contains("ground_truth.thermal"), InputError);
}

TEST_CASE("missing files") {
  CHECK_THROWS_AS(load_description("/nonexistent/robot.json"), InputError);
  CHECK_THROWS_AS(read_json_file("/nonexistent/x.json"), InputError);
  CHECK_THROWS_AS(load_repeatability_clusters("/nonexistent/r.csv"), InputError);
}
