// Command-line front end; talks to the solver library through the C API only.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lqrlr/lqrlr.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitSolver = 3;
constexpr int kExitInfeasible = 4;

int report_error(lqrlr_status status) {
  std::fprintf(stderr, "error[%s]: %s\n", lqrlr_last_error_tag(), lqrlr_last_error());
  switch (status) {
    case LQRLR_ERR_ARG:
    case LQRLR_ERR_PARSE:
    case LQRLR_ERR_IO: return kExitUsage;
    case LQRLR_ERR_INFEASIBLE: return kExitInfeasible;
    default: return kExitSolver;
  }
}

int usage_error(const std::string& msg) {
  std::fprintf(stderr, "error[E_ARGS]: %s\n", msg.c_str());
  return kExitUsage;
}

// "A..B" (inclusive range), a single value, or a comma list.
bool parse_agents(const std::string& text, std::vector<int>& out) {
  out.clear();
  const auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      const int a = std::stoi(text.substr(0, dots));
      const int b = std::stoi(text.substr(dots + 2));
      if (b < a) return false;
      for (int v = a; v <= b; ++v) out.push_back(v);
      return true;
    }
    size_t pos = 0;
    while (pos <= text.size()) {
      const auto comma = text.find(',', pos);
      const std::string tok = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
      if (!tok.empty()) out.push_back(std::stoi(tok));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  } catch (const std::exception&) {
    return false;
  }
  return !out.empty();
}

int threads_from_env() {
  const char* env = std::getenv("LQRLR_THREADS");
  if (!env || !*env) return 0;
  return std::atoi(env);
}

std::string sibling_path(const std::string& path, const char* new_ext) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + new_ext;
  }
  return path.substr(0, dot) + new_ext;
}

struct DesignArgs {
  std::string model_path;
  std::string variant = "standard";
  std::string out_path;
  lqrlr_design_options opts{};
};

int run_design(const DesignArgs& args) {
  lqrlr_design_options opts = args.opts;
  if (args.variant == "standard") {
    opts.variant = LQRLR_VARIANT_STANDARD;
  } else if (args.variant == "sparse") {
    opts.variant = LQRLR_VARIANT_SPARSE;
  } else if (args.variant == "lowrank-soft") {
    opts.variant = LQRLR_VARIANT_LOWRANK_SOFT;
  } else if (args.variant == "lowrank-hard") {
    opts.variant = LQRLR_VARIANT_LOWRANK_HARD;
  } else {
    return usage_error("unknown variant: " + args.variant);
  }

  lqrlr_model* model = nullptr;
  lqrlr_status st = lqrlr_model_load(args.model_path.c_str(), &model);
  if (st != LQRLR_OK) return report_error(st);

  if (opts.variant == LQRLR_VARIANT_LOWRANK_HARD) {
    const int mn = std::min(lqrlr_model_inputs(model), lqrlr_model_states(model));
    if (opts.rank < 1 || opts.rank > mn) {
      lqrlr_model_free(model);
      return usage_error("--rank must lie in [1, " + std::to_string(mn) + "] for this model");
    }
  }

  lqrlr_design* design = nullptr;
  st = lqrlr_design_run(model, &opts, &design);
  if (st != LQRLR_OK) {
    lqrlr_model_free(model);
    return report_error(st);
  }

  if (!args.out_path.empty()) {
    st = lqrlr_design_save(design, model, args.out_path.c_str());
    if (st != LQRLR_OK) {
      lqrlr_design_free(design);
      lqrlr_model_free(model);
      return report_error(st);
    }
  }

  const int term = lqrlr_design_termination(design);
  std::printf("variant=%s termination=%s iterations=%d J=%.17g J_stand=%.17g\n",
              args.variant.c_str(),
              term == LQRLR_TERM_CONVERGED ? "converged"
                                           : (term == LQRLR_TERM_MAX_ITER ? "max_iter"
                                                                          : "infeasible"),
              lqrlr_design_iterations(design), lqrlr_design_cost(design),
              lqrlr_design_cost_standard(design));
  lqrlr_design_free(design);
  lqrlr_model_free(model);
  if (term == LQRLR_TERM_MAX_ITER) return kExitSolver;
  if (term == LQRLR_TERM_INFEASIBLE) return kExitInfeasible;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured LQR gain synthesis (standard, sparse, low-rank) and the "
               "wireless-communication scenario sweeps"};
  app.require_subcommand(1);

  // --- design ---
  DesignArgs d;
  lqrlr_design_options_defaults(&d.opts);
  auto* design = app.add_subcommand("design", "Synthesize a feedback gain for a model file");
  design->add_option("--model", d.model_path, "Model file (JSON)")->required();
  design->add_option("--variant", d.variant, "standard|sparse|lowrank-soft|lowrank-hard");
  design->add_option("--rho", d.opts.rho, "ADMM penalty");
  design->add_option("--gamma", d.opts.gamma, "Regularization weight");
  design->add_option("--rank", d.opts.rank, "Target rank (lowrank-hard)");
  design->add_option("--eps-pri", d.opts.eps_pri, "Primal residual tolerance");
  design->add_option("--eps-dual", d.opts.eps_dual, "Dual residual tolerance");
  design->add_option("--max-iter", d.opts.max_outer, "Outer iteration cap");
  design->add_option("--out", d.out_path, "Result document path (JSON)");

  // --- scenario ---
  int sc_id = 1;
  std::string sc_agents = "10..20";
  int sc_trials = 100, sc_inner = 100;
  std::uint64_t sc_seed = 1;
  std::vector<double> sc_sigma2;
  std::vector<int> sc_attacks, sc_ranks;
  int sc_coupling = -1;
  std::string sc_out, sc_plot;
  bool sc_quiet = false;
  lqrlr_scenario_options sc_defaults{};
  lqrlr_scenario_options_defaults(&sc_defaults, 1);
  double sc_rho = sc_defaults.rho, sc_eps_pri = sc_defaults.eps_pri,
         sc_eps_dual = sc_defaults.eps_dual;
  int sc_max_iter = sc_defaults.max_outer;

  auto* scenario = app.add_subcommand("scenario", "Run a Monte-Carlo communication scenario");
  scenario->add_option("--id", sc_id, "Scenario 1|2|3|4")->required();
  scenario->add_option("--agents", sc_agents, "Agent sweep, e.g. 10..20 or 10,12,14");
  scenario->add_option("--trials", sc_trials, "Designs per sweep point");
  scenario->add_option("--inner-trials", sc_inner, "Perturbations per design (scenarios 2-3)");
  scenario->add_option("--seed", sc_seed, "Master seed");
  scenario->add_option("--sigma2", sc_sigma2, "Noise variances (scenario 2)")->delimiter(',');
  scenario->add_option("--attacks", sc_attacks, "Attacked link counts (scenario 3)")
      ->delimiter(',');
  scenario->add_option("--ranks", sc_ranks, "Rank sweep (scenario 4)")->delimiter(',');
  scenario->add_option("--coupling-sign", sc_coupling, "+1 or -1 coupling exponent sign");
  scenario->add_option("--rho", sc_rho, "ADMM penalty");
  scenario->add_option("--eps-pri", sc_eps_pri, "Primal residual tolerance");
  scenario->add_option("--eps-dual", sc_eps_dual, "Dual residual tolerance");
  scenario->add_option("--max-iter", sc_max_iter, "Outer iteration cap");
  scenario->add_option("--out", sc_out, "CSV output path (aggregate JSON lands next to it)")
      ->required();
  scenario->add_option("--plot", sc_plot, "Optional SVG chart path");
  scenario->add_flag("--quiet", sc_quiet, "Suppress per-sweep-point log lines");

  // --- genmodel ---
  int gm_agents = 4;
  double gm_extent = 10.0;
  std::uint64_t gm_seed = 1;
  int gm_coupling = -1;
  std::string gm_out;
  auto* genmodel = app.add_subcommand("genmodel", "Generate a coupled multi-agent model file");
  genmodel->add_option("--agents", gm_agents, "Number of agents")->required();
  genmodel->add_option("--extent", gm_extent, "Plane side length");
  genmodel->add_option("--seed", gm_seed, "Layout seed");
  genmodel->add_option("--coupling-sign", gm_coupling, "+1 or -1 coupling exponent sign");
  genmodel->add_option("--out", gm_out, "Model file path")->required();

  auto* version = app.add_subcommand("version", "Print the tool version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (version->parsed()) {
    std::printf("lqrlr %s\n", lqrlr_version());
    return kExitOk;
  }

  if (design->parsed()) {
    return run_design(d);
  }

  if (genmodel->parsed()) {
    lqrlr_model* model = nullptr;
    lqrlr_status st = lqrlr_model_generate(gm_agents, gm_extent, gm_seed, gm_coupling, &model);
    if (st != LQRLR_OK) return report_error(st);
    st = lqrlr_model_save(model, gm_out.c_str());
    lqrlr_model_free(model);
    if (st != LQRLR_OK) return report_error(st);
    std::printf("wrote %s (agents=%d states=%d inputs=%d)\n", gm_out.c_str(), gm_agents,
                2 * gm_agents, gm_agents);
    return kExitOk;
  }

  if (scenario->parsed()) {
    std::vector<int> agents;
    if (!parse_agents(sc_agents, agents)) {
      return usage_error("--agents: expected A..B, a value, or a comma list");
    }
    lqrlr_scenario_options opts{};
    lqrlr_scenario_options_defaults(&opts, sc_id);
    opts.agent_counts = agents.data();
    opts.agent_counts_len = agents.size();
    opts.trials_outer = sc_trials;
    opts.trials_inner = sc_inner;
    opts.seed = sc_seed;
    if (!sc_sigma2.empty()) {
      opts.noise_variances = sc_sigma2.data();
      opts.noise_variances_len = sc_sigma2.size();
    }
    if (!sc_attacks.empty()) {
      opts.attack_counts = sc_attacks.data();
      opts.attack_counts_len = sc_attacks.size();
    }
    if (!sc_ranks.empty()) {
      opts.ranks = sc_ranks.data();
      opts.ranks_len = sc_ranks.size();
    }
    opts.coupling_sign = sc_coupling;
    opts.rho = sc_rho;
    opts.eps_pri = sc_eps_pri;
    opts.eps_dual = sc_eps_dual;
    opts.max_outer = sc_max_iter;
    opts.threads = threads_from_env();
    opts.verbose = sc_quiet ? 0 : 1;

    lqrlr_report* report = nullptr;
    lqrlr_status st = lqrlr_scenario_run(&opts, &report);
    if (st != LQRLR_OK) return report_error(st);

    st = lqrlr_report_write_csv(report, sc_out.c_str());
    if (st == LQRLR_OK) {
      st = lqrlr_report_write_json(report, sibling_path(sc_out, ".json").c_str());
    }
    if (st == LQRLR_OK && !sc_plot.empty()) {
      st = lqrlr_report_write_svg(report, sc_plot.c_str());
    }
    const int rows = lqrlr_report_row_count(report);
    lqrlr_report_free(report);
    if (st != LQRLR_OK) return report_error(st);
    std::printf("scenario %d: %d rows -> %s\n", sc_id, rows, sc_out.c_str());
    return kExitOk;
  }

  return kExitUsage;
}
