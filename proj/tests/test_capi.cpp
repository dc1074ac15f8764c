#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lqrlr/lqrlr.h"

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("lqrlr_capi_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Scalar plant a = b1 = b2 = q = r = 1; unstructured optimum k = 1 + sqrt(2).
const char* kScalarModel = R"({
  "format": "lqrlr-model", "version": 1,
  "n": 1, "m": 1, "l": 1,
  "A": [1.0], "B1": [1.0], "B2": [1.0], "Q": [1.0], "R": [1.0],
  "structure": {"agent_count": 1, "input_groups": [0], "state_groups": [0]}
})";

}  // namespace

TEST_CASE("version string") {
  CHECK(std::string(lqrlr_version()).find('.') != std::string::npos);
}

TEST_CASE("standard design on the scalar oracle model") {
  const std::string path = temp_path("scalar.json");
  {
    std::ofstream out(path);
    out << kScalarModel;
  }
  lqrlr_model* model = nullptr;
  REQUIRE(lqrlr_model_load(path.c_str(), &model) == LQRLR_OK);
  CHECK(lqrlr_model_states(model) == 1);
  CHECK(lqrlr_model_inputs(model) == 1);
  CHECK(lqrlr_model_agents(model) == 1);

  lqrlr_design_options opts;
  lqrlr_design_options_defaults(&opts);
  opts.variant = LQRLR_VARIANT_STANDARD;
  lqrlr_design* design = nullptr;
  REQUIRE(lqrlr_design_run(model, &opts, &design) == LQRLR_OK);
  CHECK(lqrlr_design_termination(design) == LQRLR_TERM_CONVERGED);
  const double k_opt = 1.0 + std::sqrt(2.0);
  CHECK(std::abs(lqrlr_design_cost(design) - k_opt) <= 1e-8);
  double k = 0.0;
  REQUIRE(lqrlr_design_gain(design, LQRLR_GAIN_K, &k, 1) == LQRLR_OK);
  CHECK(std::abs(k - k_opt) <= 1e-8);

  const std::string doc_path = temp_path("scalar_design.json");
  REQUIRE(lqrlr_design_save(design, model, doc_path.c_str()) == LQRLR_OK);
  CHECK(slurp(doc_path).find("\"termination\": \"converged\"") != std::string::npos);

  lqrlr_design_free(design);
  lqrlr_model_free(model);
  std::filesystem::remove(path);
  std::filesystem::remove(doc_path);
}

TEST_CASE("generated model round trip through the C surface") {
  lqrlr_model* model = nullptr;
  REQUIRE(lqrlr_model_generate(3, 10.0, 7, -1, &model) == LQRLR_OK);
  CHECK(lqrlr_model_states(model) == 6);
  CHECK(lqrlr_model_inputs(model) == 3);
  CHECK(lqrlr_model_disturbances(model) == 3);
  CHECK(lqrlr_model_agents(model) == 3);

  const std::string path = temp_path("gen3.json");
  REQUIRE(lqrlr_model_save(model, path.c_str()) == LQRLR_OK);
  lqrlr_model* loaded = nullptr;
  REQUIRE(lqrlr_model_load(path.c_str(), &loaded) == LQRLR_OK);

  lqrlr_design_options opts;
  lqrlr_design_options_defaults(&opts);
  opts.variant = LQRLR_VARIANT_LOWRANK_HARD;
  opts.rank = 1;
  lqrlr_design* a = nullptr;
  lqrlr_design* b = nullptr;
  REQUIRE(lqrlr_design_run(model, &opts, &a) == LQRLR_OK);
  REQUIRE(lqrlr_design_run(loaded, &opts, &b) == LQRLR_OK);
  size_t na = 0, nb = 0;
  std::vector<double> pa(4096), pb(4096);
  REQUIRE(lqrlr_design_residuals(a, pa.data(), nullptr, pa.size(), &na) == LQRLR_OK);
  REQUIRE(lqrlr_design_residuals(b, pb.data(), nullptr, pb.size(), &nb) == LQRLR_OK);
  REQUIRE(na == nb);
  for (size_t i = 0; i < na && i < pa.size(); ++i) CHECK(pa[i] == pb[i]);

  lqrlr_design_free(a);
  lqrlr_design_free(b);
  lqrlr_model_free(loaded);
  lqrlr_model_free(model);
  std::filesystem::remove(path);
}

TEST_CASE("error reporting") {
  lqrlr_model* model = nullptr;
  CHECK(lqrlr_model_load("/nonexistent/model.json", &model) == LQRLR_ERR_IO);
  CHECK(std::string(lqrlr_last_error()).find("cannot open") != std::string::npos);
  CHECK(std::string(lqrlr_last_error_tag()) == "E_IO");

  REQUIRE(lqrlr_model_generate(3, 10.0, 7, -1, &model) == LQRLR_OK);
  lqrlr_design_options opts;
  lqrlr_design_options_defaults(&opts);
  opts.variant = LQRLR_VARIANT_LOWRANK_HARD;
  opts.rank = 99;  // > min(m, n)
  lqrlr_design* design = nullptr;
  CHECK(lqrlr_design_run(model, &opts, &design) == LQRLR_ERR_ARG);
  CHECK(std::string(lqrlr_last_error()).find("rank") != std::string::npos);
  lqrlr_model_free(model);

  CHECK(lqrlr_model_load(nullptr, &model) == LQRLR_ERR_ARG);
}

TEST_CASE("tiny scenario through the C surface") {
  lqrlr_scenario_options opts;
  lqrlr_scenario_options_defaults(&opts, 2);
  const int agents[] = {3};
  const double sigmas[] = {0.0, 0.2};
  opts.agent_counts = agents;
  opts.agent_counts_len = 1;
  opts.trials_outer = 2;
  opts.trials_inner = 3;
  opts.seed = 99;
  opts.noise_variances = sigmas;
  opts.noise_variances_len = 2;
  opts.threads = 1;

  lqrlr_report* report = nullptr;
  REQUIRE(lqrlr_scenario_run(&opts, &report) == LQRLR_OK);
  CHECK(lqrlr_report_row_count(report) == 2 /*sigmas*/ * 3 /*designs*/ * 2 /*trials*/);

  const std::string csv_path = temp_path("s2.csv");
  const std::string json_path = temp_path("s2.json");
  const std::string svg_path = temp_path("s2.svg");
  REQUIRE(lqrlr_report_write_csv(report, csv_path.c_str()) == LQRLR_OK);
  REQUIRE(lqrlr_report_write_json(report, json_path.c_str()) == LQRLR_OK);
  REQUIRE(lqrlr_report_write_svg(report, svg_path.c_str()) == LQRLR_OK);
  CHECK(slurp(csv_path).rfind("scenario,", 0) == 0);
  CHECK(slurp(svg_path).rfind("<svg", 0) == 0);
  lqrlr_report_free(report);
  std::filesystem::remove(csv_path);
  std::filesystem::remove(json_path);
  std::filesystem::remove(svg_path);
}
