#include "lqrlr/lqrlr.h"

#include <cstring>
#include <string>

#include "core/admm.hpp"
#include "core/experiments.hpp"
#include "core/model_io.hpp"
#include "core/report.hpp"
#include "core/svg.hpp"
#include "core/version.hpp"

using namespace lqrlr;

struct lqrlr_model_s {
  ModelFile file;
};

struct lqrlr_design_s {
  DesignResult result;
  AdmmConfig cfg;
  std::string variant_label;
};

struct lqrlr_report_s {
  ScenarioReport report;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_error_tag;

lqrlr_status status_of(const Error& e) {
  switch (e.code()) {
    case Errc::invalid_argument: return LQRLR_ERR_ARG;
    case Errc::parse: return LQRLR_ERR_PARSE;
    case Errc::io: return LQRLR_ERR_IO;
    case Errc::unstable: return LQRLR_ERR_INFEASIBLE;
    case Errc::calibration: return LQRLR_ERR_INFEASIBLE;
    case Errc::eigen_failure:
    case Errc::numerical:
    case Errc::non_stabilizable:
    case Errc::inner_stall: return LQRLR_ERR_SOLVER;
  }
  return LQRLR_ERR_INTERNAL;
}

template <typename Fn>
lqrlr_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    g_last_error_tag.clear();
    return fn();
  } catch (const Error& e) {
    g_last_error = e.what();
    g_last_error_tag = e.tag();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    g_last_error_tag = "E_INTERNAL";
    return LQRLR_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    g_last_error_tag = "E_INTERNAL";
    return LQRLR_ERR_INTERNAL;
  }
}

lqrlr_status fail_arg(const char* msg) {
  g_last_error = msg;
  g_last_error_tag = "E_ARGS";
  return LQRLR_ERR_ARG;
}

AdmmConfig admm_config_from(const lqrlr_design_options& o) {
  AdmmConfig cfg;
  switch (o.variant) {
    case LQRLR_VARIANT_SPARSE: cfg.variant = Variant::sparse; break;
    case LQRLR_VARIANT_LOWRANK_SOFT: cfg.variant = Variant::lowrank_soft; break;
    case LQRLR_VARIANT_LOWRANK_HARD: cfg.variant = Variant::lowrank_hard; break;
    default: cfg.variant = Variant::lowrank_soft; break;
  }
  cfg.rho = o.rho;
  cfg.gamma = o.gamma;
  if (o.rank > 0) cfg.rank = o.rank;
  cfg.eps_pri = o.eps_pri;
  cfg.eps_dual = o.eps_dual;
  cfg.max_outer = o.max_outer;
  cfg.max_inner = o.max_inner;
  cfg.inner_tol = o.inner_tol;
  return cfg;
}

const char* variant_label(int v) {
  switch (v) {
    case LQRLR_VARIANT_STANDARD: return "standard";
    case LQRLR_VARIANT_SPARSE: return "sparse";
    case LQRLR_VARIANT_LOWRANK_SOFT: return "lowrank-soft";
    case LQRLR_VARIANT_LOWRANK_HARD: return "lowrank-hard";
  }
  return "unknown";
}

}  // namespace

extern "C" {

const char* lqrlr_version(void) { return kToolVersion; }
const char* lqrlr_last_error(void) { return g_last_error.c_str(); }
const char* lqrlr_last_error_tag(void) { return g_last_error_tag.c_str(); }

lqrlr_status lqrlr_model_load(const char* path, lqrlr_model** out) {
  if (!path || !out) return fail_arg("lqrlr_model_load: null argument");
  return guarded([&] {
    auto* m = new lqrlr_model_s{load_model_file(path)};
    *out = m;
    return LQRLR_OK;
  });
}

lqrlr_status lqrlr_model_generate(int n_agents, double extent, uint64_t seed, int coupling_sign,
                                  lqrlr_model** out) {
  if (!out) return fail_arg("lqrlr_model_generate: null output");
  return guarded([&] {
    ModelFile mf;
    AgentLayout layout = generate_layout(n_agents, extent, seed);
    auto [model, structure] = build_coupled_model(layout, coupling_sign);
    mf.model = std::move(model);
    mf.structure = std::move(structure);
    mf.layout = std::move(layout);
    mf.coupling_sign = coupling_sign;
    mf.gen_seed = seed;
    *out = new lqrlr_model_s{std::move(mf)};
    return LQRLR_OK;
  });
}

lqrlr_status lqrlr_model_save(const lqrlr_model* model, const char* path) {
  if (!model || !path) return fail_arg("lqrlr_model_save: null argument");
  return guarded([&] {
    save_model_file(model->file, path);
    return LQRLR_OK;
  });
}

void lqrlr_model_free(lqrlr_model* model) { delete model; }

int lqrlr_model_states(const lqrlr_model* model) {
  return model ? static_cast<int>(model->file.model.states()) : 0;
}
int lqrlr_model_inputs(const lqrlr_model* model) {
  return model ? static_cast<int>(model->file.model.inputs()) : 0;
}
int lqrlr_model_disturbances(const lqrlr_model* model) {
  return model ? static_cast<int>(model->file.model.disturbances()) : 0;
}
int lqrlr_model_agents(const lqrlr_model* model) {
  return model ? model->file.structure.agent_count : 0;
}

void lqrlr_design_options_defaults(lqrlr_design_options* opts) {
  if (!opts) return;
  const AdmmConfig d;
  opts->variant = LQRLR_VARIANT_LOWRANK_SOFT;
  opts->rho = d.rho;
  opts->gamma = d.gamma;
  opts->rank = 0;
  opts->eps_pri = d.eps_pri;
  opts->eps_dual = d.eps_dual;
  opts->max_outer = d.max_outer;
  opts->max_inner = d.max_inner;
  opts->inner_tol = d.inner_tol;
}

lqrlr_status lqrlr_design_run(const lqrlr_model* model, const lqrlr_design_options* opts,
                              lqrlr_design** out) {
  if (!model || !opts || !out) return fail_arg("lqrlr_design_run: null argument");
  return guarded([&] {
    auto* d = new lqrlr_design_s;
    try {
      d->cfg = admm_config_from(*opts);
      d->variant_label = variant_label(opts->variant);
      if (opts->variant == LQRLR_VARIANT_STANDARD) {
        d->result = solve_standard_lqr(model->file.model);
      } else {
        d->result = admm_solve(model->file.model, model->file.structure, d->cfg);
      }
    } catch (...) {
      delete d;
      throw;
    }
    *out = d;
    return LQRLR_OK;
  });
}

int lqrlr_design_termination(const lqrlr_design* design) {
  if (!design) return LQRLR_TERM_INFEASIBLE;
  switch (design->result.termination) {
    case Termination::converged: return LQRLR_TERM_CONVERGED;
    case Termination::max_iter: return LQRLR_TERM_MAX_ITER;
    case Termination::infeasible: return LQRLR_TERM_INFEASIBLE;
  }
  return LQRLR_TERM_INFEASIBLE;
}

int lqrlr_design_iterations(const lqrlr_design* design) {
  return design ? design->result.iterations : 0;
}

double lqrlr_design_cost(const lqrlr_design* design) {
  return design ? design->result.J : 0.0;
}

double lqrlr_design_cost_standard(const lqrlr_design* design) {
  return design ? design->result.J_stand : 0.0;
}

lqrlr_status lqrlr_design_gain(const lqrlr_design* design, int kind, double* buf,
                               size_t buf_len) {
  if (!design || !buf) return fail_arg("lqrlr_design_gain: null argument");
  const Matrix* M = nullptr;
  switch (kind) {
    case LQRLR_GAIN_K: M = &design->result.K; break;
    case LQRLR_GAIN_K_DIAG: M = &design->result.K_diag; break;
    case LQRLR_GAIN_K_LOW: M = &design->result.K_low; break;
    case LQRLR_GAIN_DUAL: M = &design->result.dual; break;
    default: return fail_arg("lqrlr_design_gain: unknown gain kind");
  }
  if (buf_len < static_cast<size_t>(M->size())) {
    return fail_arg("lqrlr_design_gain: buffer too small");
  }
  for (Eigen::Index i = 0; i < M->rows(); ++i)
    for (Eigen::Index j = 0; j < M->cols(); ++j) buf[i * M->cols() + j] = (*M)(i, j);
  return LQRLR_OK;
}

lqrlr_status lqrlr_design_residuals(const lqrlr_design* design, double* primal, double* dual,
                                    size_t cap, size_t* count) {
  if (!design) return fail_arg("lqrlr_design_residuals: null design");
  const auto& hist = design->result.residual_history;
  if (count) *count = hist.size();
  const size_t n = std::min(cap, hist.size());
  for (size_t i = 0; i < n; ++i) {
    if (primal) primal[i] = hist[i].first;
    if (dual) dual[i] = hist[i].second;
  }
  return LQRLR_OK;
}

lqrlr_status lqrlr_design_save(const lqrlr_design* design, const lqrlr_model* model,
                               const char* path) {
  if (!design || !model || !path) return fail_arg("lqrlr_design_save: null argument");
  return guarded([&] {
    const auto rep = optimality_report(model->file.model, design->result, design->cfg);
    write_text_file(path, design_result_to_json(model->file.model, design->result, rep,
                                                design->cfg, design->variant_label, ""));
    return LQRLR_OK;
  });
}

void lqrlr_design_free(lqrlr_design* design) { delete design; }

void lqrlr_scenario_options_defaults(lqrlr_scenario_options* opts, int scenario_id) {
  if (!opts) return;
  std::memset(opts, 0, sizeof(*opts));
  const ScenarioConfig d;
  const AdmmConfig a;
  opts->scenario_id = scenario_id;
  opts->trials_outer = d.trials_outer;
  opts->trials_inner = d.trials_inner;
  opts->seed = d.seed;
  opts->lowrank_rank = d.lowrank_rank;
  opts->coupling_sign = d.coupling_sign;
  opts->extent = d.extent;
  opts->link_tol_rel = d.link_tol_rel;
  opts->stability_margin = d.stability_margin;
  opts->rho = a.rho;
  opts->eps_pri = a.eps_pri;
  opts->eps_dual = a.eps_dual;
  opts->max_outer = a.max_outer;
  opts->max_inner = a.max_inner;
  opts->inner_tol = a.inner_tol;
}

lqrlr_status lqrlr_scenario_run(const lqrlr_scenario_options* opts, lqrlr_report** out) {
  if (!opts || !out) return fail_arg("lqrlr_scenario_run: null argument");
  return guarded([&] {
    ScenarioConfig cfg;
    cfg.scenario_id = opts->scenario_id;
    if (opts->agent_counts && opts->agent_counts_len > 0) {
      cfg.agent_counts.assign(opts->agent_counts, opts->agent_counts + opts->agent_counts_len);
    }
    cfg.trials_outer = opts->trials_outer;
    cfg.trials_inner = opts->trials_inner;
    cfg.seed = opts->seed;
    if (opts->noise_variances && opts->noise_variances_len > 0) {
      cfg.noise_variances.assign(opts->noise_variances,
                                 opts->noise_variances + opts->noise_variances_len);
    }
    if (opts->attack_counts && opts->attack_counts_len > 0) {
      cfg.attack_counts.assign(opts->attack_counts,
                               opts->attack_counts + opts->attack_counts_len);
    }
    if (opts->ranks && opts->ranks_len > 0) {
      cfg.rank_sweep.assign(opts->ranks, opts->ranks + opts->ranks_len);
    }
    cfg.lowrank_rank = opts->lowrank_rank;
    cfg.coupling_sign = opts->coupling_sign;
    cfg.extent = opts->extent;
    cfg.link_tol_rel = opts->link_tol_rel;
    cfg.stability_margin = opts->stability_margin;
    cfg.noise_nonzero_only = opts->noise_nonzero_only != 0;
    cfg.threads = opts->threads;
    cfg.verbose = opts->verbose != 0;
    cfg.admm.rho = opts->rho;
    cfg.admm.eps_pri = opts->eps_pri;
    cfg.admm.eps_dual = opts->eps_dual;
    cfg.admm.max_outer = opts->max_outer;
    cfg.admm.max_inner = opts->max_inner;
    cfg.admm.inner_tol = opts->inner_tol;
    *out = new lqrlr_report_s{run_scenario(cfg)};
    return LQRLR_OK;
  });
}

int lqrlr_report_row_count(const lqrlr_report* report) {
  return report ? static_cast<int>(report->report.rows.size()) : 0;
}

lqrlr_status lqrlr_report_write_csv(const lqrlr_report* report, const char* path) {
  if (!report || !path) return fail_arg("lqrlr_report_write_csv: null argument");
  return guarded([&] {
    write_text_file(path, report->report.to_csv());
    return LQRLR_OK;
  });
}

lqrlr_status lqrlr_report_write_json(const lqrlr_report* report, const char* path) {
  if (!report || !path) return fail_arg("lqrlr_report_write_json: null argument");
  return guarded([&] {
    write_text_file(path, report->report.to_json());
    return LQRLR_OK;
  });
}

lqrlr_status lqrlr_report_write_svg(const lqrlr_report* report, const char* path) {
  if (!report || !path) return fail_arg("lqrlr_report_write_svg: null argument");
  return guarded([&] {
    write_text_file(path, render_svg(report->report));
    return LQRLR_OK;
  });
}

void lqrlr_report_free(lqrlr_report* report) { delete report; }

}  // extern "C"
