#include "core/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <thread>

#include "core/version.hpp"

namespace lqrlr {

AgentLayout generate_layout(int n_agents, double extent, std::uint64_t seed) {
  if (n_agents < 2) {
    throw Error(Errc::invalid_argument, "generate_layout: need at least 2 agents");
  }
  if (!(extent > 0.0)) {
    throw Error(Errc::invalid_argument, "generate_layout: extent must be positive");
  }
  AgentLayout layout;
  layout.extent = extent;
  layout.positions.resize(static_cast<size_t>(n_agents));
  Rng rng(seed);
  for (auto& p : layout.positions) {
    p[0] = rng.uniform(0.0, extent);
    p[1] = rng.uniform(0.0, extent);
  }
  return layout;
}

std::pair<StateSpaceModel, BlockStructure> build_coupled_model(const AgentLayout& layout,
                                                               int coupling_sign) {
  if (coupling_sign != 1 && coupling_sign != -1) {
    throw Error(Errc::invalid_argument, "build_coupled_model: coupling_sign must be +1 or -1");
  }
  const int N = static_cast<int>(layout.positions.size());
  if (N < 2) {
    throw Error(Errc::invalid_argument, "build_coupled_model: need at least 2 agents");
  }
  const Eigen::Index n = 2 * N, m = N, l = N;

  StateSpaceModel model;
  model.A = Matrix::Zero(n, n);
  model.B1 = Matrix::Zero(n, m);
  model.B2 = Matrix::Zero(n, l);
  model.Q = Matrix::Identity(n, n);
  model.R = Matrix::Identity(m, m);

  Matrix local(2, 2);
  local << 1.0, 1.0, 1.0, 3.0;
  for (int i = 0; i < N; ++i) {
    model.A.block(2 * i, 2 * i, 2, 2) = local;
    for (int j = 0; j < N; ++j) {
      if (j == i) continue;
      const double c = std::exp(static_cast<double>(coupling_sign) *
                                layout.distance(static_cast<size_t>(i), static_cast<size_t>(j)));
      model.A.block(2 * i, 2 * j, 2, 2) = c * Matrix::Identity(2, 2);
    }
    model.B1(2 * i + 1, i) = 1.0;
    model.B2(2 * i + 1, i) = 1.0;
  }

  BlockStructure structure;
  structure.agent_count = N;
  structure.input_groups.resize(static_cast<size_t>(m));
  structure.state_groups.resize(static_cast<size_t>(n));
  for (int i = 0; i < N; ++i) {
    structure.input_groups[static_cast<size_t>(i)] = i;
    structure.state_groups[static_cast<size_t>(2 * i)] = i;
    structure.state_groups[static_cast<size_t>(2 * i + 1)] = i;
  }
  return {std::move(model), std::move(structure)};
}

LinkCount count_links(const Matrix& K, const BlockStructure& structure, double link_tol) {
  const int na = structure.agent_count;
  std::vector<std::vector<bool>> linked(static_cast<size_t>(na),
                                        std::vector<bool>(static_cast<size_t>(na), false));
  LinkCount out;
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    const int ai = structure.input_groups[static_cast<size_t>(i)];
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      const int aj = structure.state_groups[static_cast<size_t>(j)];
      if (ai == aj) continue;
      if (std::abs(K(i, j)) > link_tol) {
        ++out.offblock_entries;
        linked[static_cast<size_t>(ai)][static_cast<size_t>(aj)] = true;
      }
    }
  }
  out.per_agent_outgoing.assign(static_cast<size_t>(na), 0);
  for (int recv = 0; recv < na; ++recv) {
    for (int send = 0; send < na; ++send) {
      if (recv != send && linked[static_cast<size_t>(recv)][static_cast<size_t>(send)]) {
        ++out.per_agent_outgoing[static_cast<size_t>(send)];
        ++out.total_links;
      }
    }
  }
  return out;
}

double relative_link_tol(const Matrix& K, double rel) {
  const double mx = K.size() > 0 ? K.cwiseAbs().maxCoeff() : 0.0;
  return rel * mx;
}

int numerical_rank(const Matrix& M, double rel_tol) {
  if (M.size() == 0) return 0;
  const Svd dec = svd(M);
  if (dec.sigma.size() == 0 || dec.sigma(0) <= 0.0) return 0;
  const double cut = rel_tol * dec.sigma(0);
  int r = 0;
  for (Eigen::Index i = 0; i < dec.sigma.size(); ++i) {
    if (dec.sigma(i) > cut) ++r;
  }
  return r;
}

std::vector<int> broadcast_transmissions(const Matrix& K_low, int n_agents, int states_per_agent,
                                         double rank_rel_tol) {
  const int r = numerical_rank(K_low, rank_rel_tol);
  return std::vector<int>(static_cast<size_t>(n_agents), states_per_agent * r);
}

std::vector<int> unicast_transmissions(const Matrix& K, const BlockStructure& structure,
                                       int states_per_agent, double link_tol) {
  const LinkCount lc = count_links(K, structure, link_tol);
  std::vector<int> out(lc.per_agent_outgoing.size());
  for (size_t a = 0; a < out.size(); ++a) {
    out[a] = states_per_agent * lc.per_agent_outgoing[a];
  }
  return out;
}

Matrix perturb_offdiag_noise(const Matrix& K, const BlockStructure& structure, double sigma,
                             Rng& rng, bool nonzero_only, double link_tol) {
  Matrix out = K;
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      if (structure.block_diagonal(i, j)) continue;
      if (nonzero_only && std::abs(K(i, j)) <= link_tol) continue;
      out(i, j) += rng.normal(0.0, sigma);
    }
  }
  return out;
}

Matrix remove_links(const Matrix& K, const BlockStructure& structure, int count, Rng& rng,
                    double link_tol, int* shortfall) {
  if (count < 0) {
    throw Error(Errc::invalid_argument, "remove_links: count must be non-negative");
  }
  std::vector<std::pair<Eigen::Index, Eigen::Index>> eligible;
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      if (!structure.block_diagonal(i, j) && std::abs(K(i, j)) > link_tol) {
        eligible.emplace_back(i, j);
      }
    }
  }
  Matrix out = K;
  const size_t avail = eligible.size();
  const size_t take = std::min(static_cast<size_t>(count), avail);
  if (shortfall) *shortfall = count - static_cast<int>(take);
  // partial Fisher-Yates over the eligible list
  for (size_t t = 0; t < take; ++t) {
    const size_t pick = t + static_cast<size_t>(rng.below(avail - t));
    std::swap(eligible[t], eligible[pick]);
    out(eligible[t].first, eligible[t].second) = 0.0;
  }
  return out;
}

namespace {

int link_metric(const LinkCount& lc, LinkCountMode mode) {
  switch (mode) {
    case LinkCountMode::offblock_entries: return lc.offblock_entries;
    case LinkCountMode::pairwise_links: return lc.total_links;
    case LinkCountMode::critical_node_receivers: {
      int mx = 0;
      for (int v : lc.per_agent_outgoing) mx = std::max(mx, v);
      return mx;
    }
  }
  return 0;
}

}  // namespace

CalibrationResult calibrate_sparse_gamma(const StateSpaceModel& model,
                                         const BlockStructure& structure, int target,
                                         LinkCountMode mode, const AdmmConfig& admm_base,
                                         double link_tol_rel, const DesignResult* standard) {
  if (target < 0) {
    throw Error(Errc::invalid_argument, "calibrate_sparse_gamma: target must be non-negative");
  }
  constexpr int kMaxEvals = 40;
  double lo = 1e-6, hi = 1e4;

  std::optional<CalibrationResult> best;
  auto consider = [&](double gamma, DesignResult&& design, int count) {
    if (design.termination == Termination::infeasible) return;
    const bool better = [&] {
      if (!best) return true;
      const int d_new = std::abs(count - target), d_old = std::abs(best->achieved - target);
      if (d_new != d_old) return d_new < d_old;
      const bool under_new = count <= target, under_old = best->achieved <= target;
      if (under_new != under_old) return under_new;  // prefer <= target on ties
      return false;
    }();
    if (better) best = CalibrationResult{gamma, std::move(design), count, 0, {}};
  };

  int evals = 0;
  std::vector<std::pair<double, int>> trajectory;
  auto evaluate = [&](double gamma) -> int {
    AdmmConfig cfg = admm_base;
    cfg.variant = Variant::sparse;
    cfg.gamma = gamma;
    cfg.rank.reset();
    DesignResult design = admm_solve(model, structure, cfg, {}, standard);
    ++evals;
    if (design.termination == Termination::infeasible) {
      trajectory.emplace_back(gamma, -1);
      return -1;
    }
    const Matrix gain = design.structured_gain();
    const int count =
        link_metric(count_links(gain, structure, relative_link_tol(gain, link_tol_rel)), mode);
    trajectory.emplace_back(gamma, count);
    consider(gamma, std::move(design), count);
    return count;
  };

  while (evals < kMaxEvals && hi / lo > 1.02) {
    const double mid = std::sqrt(lo * hi);
    const int count = evaluate(mid);
    if (count == target) break;
    if (count < target) {
      hi = mid;  // too much penalty (or infeasible): back off
    } else {
      lo = mid;
    }
  }

  if (!best) {
    throw Error(Errc::calibration,
                "calibrate_sparse_gamma: no stabilizing sparse design at any tested gamma");
  }
  best->evaluations = evals;
  best->trajectory = std::move(trajectory);
  return *best;
}

void ScenarioConfig::validate() const {
  if (scenario_id < 1 || scenario_id > 4) {
    throw Error(Errc::invalid_argument, "scenario_id must be 1..4");
  }
  if (agent_counts.empty()) {
    throw Error(Errc::invalid_argument, "agent_counts must not be empty");
  }
  for (int n : agent_counts) {
    if (n < 2) throw Error(Errc::invalid_argument, "agent_counts entries must be >= 2");
  }
  if (trials_outer < 1) throw Error(Errc::invalid_argument, "trials_outer must be >= 1");
  if ((scenario_id == 2 || scenario_id == 3) && trials_inner < 1) {
    throw Error(Errc::invalid_argument, "trials_inner must be >= 1");
  }
  if (scenario_id == 2 && noise_variances.empty()) {
    throw Error(Errc::invalid_argument, "noise_variances must not be empty");
  }
  for (double s : noise_variances) {
    if (!(s >= 0.0)) throw Error(Errc::invalid_argument, "noise variances must be >= 0");
  }
  if (scenario_id == 3 && attack_counts.empty()) {
    throw Error(Errc::invalid_argument, "attack_counts must not be empty");
  }
  for (int a : attack_counts) {
    if (a < 0) throw Error(Errc::invalid_argument, "attack counts must be >= 0");
  }
  if (scenario_id == 4) {
    if (rank_sweep.empty()) throw Error(Errc::invalid_argument, "rank_sweep must not be empty");
    for (int r : rank_sweep) {
      if (r < 1) throw Error(Errc::invalid_argument, "rank_sweep entries must be >= 1");
      for (int n : agent_counts) {
        if (r > n) {
          throw Error(Errc::invalid_argument, "rank " + std::to_string(r) +
                                                  " exceeds min(m, n) for N = " +
                                                  std::to_string(n));
        }
      }
    }
  }
  if (lowrank_rank < 1) throw Error(Errc::invalid_argument, "lowrank_rank must be >= 1");
  for (int n : agent_counts) {
    if (scenario_id != 4 && lowrank_rank > n) {
      throw Error(Errc::invalid_argument, "lowrank_rank exceeds min(m, n) for N = " +
                                              std::to_string(n));
    }
  }
  if (coupling_sign != 1 && coupling_sign != -1) {
    throw Error(Errc::invalid_argument, "coupling_sign must be +1 or -1");
  }
  if (!(extent > 0.0)) throw Error(Errc::invalid_argument, "extent must be positive");
  if (!(link_tol_rel > 0.0)) throw Error(Errc::invalid_argument, "link_tol_rel must be positive");
  if (!(stability_margin >= 0.0)) {
    throw Error(Errc::invalid_argument, "stability_margin must be >= 0");
  }
  if (threads < 0) throw Error(Errc::invalid_argument, "threads must be >= 0");
}

namespace {

std::string json_int_array(const std::vector<int>& v) {
  std::string s = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(v[i]);
  }
  return s + "]";
}

std::string json_real_array(const std::vector<double>& v) {
  std::string s = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt_g17(v[i]);
  }
  return s + "]";
}

}  // namespace

std::string scenario_config_json(const ScenarioConfig& c) {
  std::string s = "{";
  s += "\"scenario_id\": " + std::to_string(c.scenario_id);
  s += ", \"agent_counts\": " + json_int_array(c.agent_counts);
  s += ", \"trials_outer\": " + std::to_string(c.trials_outer);
  s += ", \"trials_inner\": " + std::to_string(c.trials_inner);
  s += ", \"noise_variances\": " + json_real_array(c.noise_variances);
  s += ", \"attack_counts\": " + json_int_array(c.attack_counts);
  s += ", \"rank_sweep\": " + json_int_array(c.rank_sweep);
  s += ", \"seed\": " + std::to_string(c.seed);
  s += ", \"lowrank_rank\": " + std::to_string(c.lowrank_rank);
  s += ", \"coupling_sign\": " + std::to_string(c.coupling_sign);
  s += ", \"extent\": " + fmt_g17(c.extent);
  s += ", \"link_tol_rel\": " + fmt_g17(c.link_tol_rel);
  s += ", \"stability_margin\": " + fmt_g17(c.stability_margin);
  s += std::string(", \"noise_nonzero_only\": ") + (c.noise_nonzero_only ? "true" : "false");
  s += ", \"threads\": " + std::to_string(c.threads);
  s += ", \"admm\": {\"rho\": " + fmt_g17(c.admm.rho) +
       ", \"eps_pri\": " + fmt_g17(c.admm.eps_pri) +
       ", \"eps_dual\": " + fmt_g17(c.admm.eps_dual) +
       ", \"max_outer\": " + std::to_string(c.admm.max_outer) +
       ", \"max_inner\": " + std::to_string(c.admm.max_inner) +
       ", \"inner_tol\": " + fmt_g17(c.admm.inner_tol) +
       ", \"backtrack_max_halvings\": " + std::to_string(c.admm.backtrack_max_halvings) +
       ", \"backtrack_accept_rel\": " + fmt_g17(c.admm.backtrack_accept_rel) + "}";
  return s + "}";
}

namespace {

// A stabilizing design of one family for a given trial model.
struct TrialDesign {
  std::string name;
  Matrix gain;
  double J = std::numeric_limits<double>::quiet_NaN();
  bool has_gamma = false;
  double gamma = 0.0;
  int rank = -1;
  std::string termination;
  bool usable = false;  // gain present and stabilizing
};

ReportRow base_row(int scenario, int n_agents, int trial, std::uint64_t seed) {
  ReportRow row;
  row.scenario = scenario;
  row.n_agents = n_agents;
  row.trial = trial;
  row.seed = seed;
  return row;
}

void fill_design_fields(ReportRow& row, const TrialDesign& d, double j_stand,
                        const BlockStructure& structure, double link_tol_rel) {
  row.design = d.name;
  row.termination = d.termination;
  row.has_gamma = d.has_gamma;
  row.gamma = d.gamma;
  row.rank = d.rank;
  row.J_stand = j_stand;
  if (!d.usable) return;
  row.J = d.J;
  row.cost_ratio = d.J / j_stand;
  const double tol = relative_link_tol(d.gain, link_tol_rel);
  const LinkCount lc = count_links(d.gain, structure, tol);
  row.links_pairwise = lc.total_links;
  row.links_offblock = lc.offblock_entries;
  int crit = 0;
  for (int v : lc.per_agent_outgoing) crit = std::max(crit, v);
  row.critical_node_links = crit;
}

TrialDesign make_standard_design(const DesignResult& standard) {
  TrialDesign d;
  d.name = "standard";
  d.gain = standard.K;
  d.J = standard.J;
  d.termination = termination_name(standard.termination);
  d.usable = true;
  return d;
}

TrialDesign make_lowrank_design(const StateSpaceModel& model, const BlockStructure& structure,
                                const AdmmConfig& base, int rank, const DesignResult& standard,
                                Matrix* k_low_store = nullptr) {
  TrialDesign d;
  d.name = "lowrank";
  d.rank = rank;
  try {
    AdmmConfig cfg = base;
    cfg.variant = Variant::lowrank_hard;
    cfg.rank = rank;
    cfg.gamma = 0.0;
    DesignResult res = admm_solve(model, structure, cfg, {}, &standard);
    d.termination = termination_name(res.termination);
    if (res.termination != Termination::infeasible) {
      d.gain = res.structured_gain();
      d.J = res.J;
      d.usable = true;
      if (k_low_store) *k_low_store = res.K_low;
    }
  } catch (const Error& e) {
    d.termination = e.tag();
  }
  return d;
}

TrialDesign make_sparse_design(const StateSpaceModel& model, const BlockStructure& structure,
                               int target, LinkCountMode mode, const AdmmConfig& base,
                               double link_tol_rel, const DesignResult& standard) {
  TrialDesign d;
  d.name = "sparse";
  try {
    CalibrationResult cal =
        calibrate_sparse_gamma(model, structure, target, mode, base, link_tol_rel, &standard);
    d.has_gamma = true;
    d.gamma = cal.gamma;
    d.termination = termination_name(cal.design.termination);
    d.gain = cal.design.structured_gain();
    d.J = cal.design.J;
    d.usable = true;
  } catch (const Error& e) {
    d.termination = e.tag();
  }
  return d;
}

// Run `trials` tasks on a small worker pool; results land in trial order so
// reports never depend on scheduling.
template <typename Fn>
std::vector<std::vector<ReportRow>> parallel_trials(int trials, int threads, Fn&& task) {
  std::vector<std::vector<ReportRow>> slots(static_cast<size_t>(trials));
  std::vector<std::exception_ptr> errors(static_cast<size_t>(trials));
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  const int nthreads = std::max(1, std::min(threads > 0 ? threads : hw, trials));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= trials) return;
      try {
        slots[static_cast<size_t>(i)] = task(i);
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
      }
    }
  };
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return slots;
}

struct SweepTimer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

RunManifest make_manifest(const ScenarioConfig& cfg, int id) {
  ScenarioConfig resolved = cfg;
  resolved.scenario_id = id;
  RunManifest m;
  m.tool_version = kToolVersion;
  m.master_seed = cfg.seed;
  m.config_json = scenario_config_json(resolved);
  return m;
}

void log_sweep_point(const ScenarioConfig& cfg, int id, int n_agents, size_t rows, double ms) {
  if (!cfg.verbose) return;
  std::fprintf(stderr, "scenario %d: N=%d done (%zu rows, %.0f ms)\n", id, n_agents, rows, ms);
}

int uniform_states_per_agent(const BlockStructure& structure) {
  int spa = 0;
  for (int a = 0; a < structure.agent_count; ++a) {
    spa = std::max(spa, structure.states_of_agent(a));
  }
  return spa;
}

}  // namespace

ScenarioReport run_scenario1(const ScenarioConfig& cfg) {
  ScenarioConfig c = cfg;
  c.scenario_id = 1;
  c.validate();
  ScenarioReport report;
  report.scenario_id = 1;
  report.manifest = make_manifest(c, 1);

  for (int N : c.agent_counts) {
    SweepTimer timer;
    auto slots = parallel_trials(c.trials_outer, c.threads, [&](int trial) {
      const std::uint64_t tseed =
          derive_seed(c.seed, {1u, static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(trial)});
      const AgentLayout layout = generate_layout(N, c.extent, tseed);
      auto [model, structure] = build_coupled_model(layout, c.coupling_sign);
      const DesignResult standard = solve_standard_lqr(model);
      const int spa = uniform_states_per_agent(structure);

      std::vector<TrialDesign> designs;
      designs.push_back(make_standard_design(standard));
      Matrix k_low;
      designs.push_back(
          make_lowrank_design(model, structure, c.admm, c.lowrank_rank, standard, &k_low));
      designs.push_back(make_sparse_design(model, structure, 2 * N,
                                           LinkCountMode::offblock_entries, c.admm, c.link_tol_rel,
                                           standard));

      std::vector<ReportRow> rows;
      for (const auto& d : designs) {
        ReportRow row = base_row(1, N, trial, tseed);
        fill_design_fields(row, d, standard.J, structure, c.link_tol_rel);
        if (d.name == "lowrank" && d.usable) {
          row.broadcast_tx = broadcast_transmissions(k_low, N, spa).front();
        }
        rows.push_back(std::move(row));
      }
      return rows;
    });
    size_t added = 0;
    for (auto& batch : slots) {
      added += batch.size();
      for (auto& r : batch) report.rows.push_back(std::move(r));
    }
    const double ms = timer.elapsed_ms();
    report.manifest.timings_ms.emplace_back("N=" + std::to_string(N), ms);
    log_sweep_point(c, 1, N, added, ms);
  }
  return report;
}

namespace {

// Shared harness for scenarios 2 (noise) and 3 (link removal): designs are
// built once per (N, trial) and reused across the sweep grid.
ScenarioReport run_perturbation_scenario(const ScenarioConfig& cfg, int id) {
  ScenarioConfig c = cfg;
  c.scenario_id = id;
  c.validate();
  ScenarioReport report;
  report.scenario_id = id;
  report.manifest = make_manifest(c, id);
  const bool noise = (id == 2);
  const size_t n_params = noise ? c.noise_variances.size() : c.attack_counts.size();

  for (int N : c.agent_counts) {
    SweepTimer timer;
    auto slots = parallel_trials(c.trials_outer, c.threads, [&](int trial) {
      const std::uint64_t tseed = derive_seed(
          c.seed, {static_cast<std::uint64_t>(id), static_cast<std::uint64_t>(N),
                   static_cast<std::uint64_t>(trial)});
      const AgentLayout layout = generate_layout(N, c.extent, tseed);
      auto [model, structure] = build_coupled_model(layout, c.coupling_sign);
      const DesignResult standard = solve_standard_lqr(model);

      std::vector<TrialDesign> designs;
      designs.push_back(make_standard_design(standard));
      designs.push_back(make_sparse_design(model, structure, 2 * N,
                                           LinkCountMode::offblock_entries, c.admm, c.link_tol_rel,
                                           standard));
      Matrix k_low;
      designs.push_back(
          make_lowrank_design(model, structure, c.admm, c.lowrank_rank, standard, &k_low));

      std::vector<ReportRow> rows;
      for (size_t pi = 0; pi < n_params; ++pi) {
        const double param =
            noise ? c.noise_variances[pi] : static_cast<double>(c.attack_counts[pi]);
        for (size_t di = 0; di < designs.size(); ++di) {
          const TrialDesign& d = designs[di];
          ReportRow row = base_row(id, N, trial, tseed);
          row.param_name = noise ? "sigma2" : "attacks";
          row.has_param = true;
          row.param_value = param;
          fill_design_fields(row, d, standard.J, structure, c.link_tol_rel);
          if (d.usable) {
            Rng rng(derive_seed(c.seed, {static_cast<std::uint64_t>(id),
                                         static_cast<std::uint64_t>(N),
                                         static_cast<std::uint64_t>(trial),
                                         1000u + static_cast<std::uint64_t>(pi),
                                         static_cast<std::uint64_t>(di)}));
            const double tol = relative_link_tol(d.gain, c.link_tol_rel);
            long long successes = 0;
            int shortfall_max = 0;
            for (int inner = 0; inner < c.trials_inner; ++inner) {
              Matrix perturbed;
              if (noise) {
                perturbed = perturb_offdiag_noise(d.gain, structure, std::sqrt(param), rng,
                                                  c.noise_nonzero_only, tol);
              } else {
                int shortfall = 0;
                perturbed = remove_links(d.gain, structure, c.attack_counts[pi], rng, tol,
                                         &shortfall);
                shortfall_max = std::max(shortfall_max, shortfall);
              }
              if (is_stabilizing(model, perturbed, c.stability_margin)) ++successes;
            }
            row.success_count = successes;
            row.trials_inner = c.trials_inner;
            if (!noise) row.shortfall = shortfall_max;
          }
          rows.push_back(std::move(row));
        }
      }
      return rows;
    });
    size_t added = 0;
    for (auto& batch : slots) {
      added += batch.size();
      for (auto& r : batch) report.rows.push_back(std::move(r));
    }
    const double ms = timer.elapsed_ms();
    report.manifest.timings_ms.emplace_back("N=" + std::to_string(N), ms);
    log_sweep_point(c, id, N, added, ms);
  }
  return report;
}

}  // namespace

ScenarioReport run_scenario2(const ScenarioConfig& cfg) { return run_perturbation_scenario(cfg, 2); }

ScenarioReport run_scenario3(const ScenarioConfig& cfg) { return run_perturbation_scenario(cfg, 3); }

ScenarioReport run_scenario4(const ScenarioConfig& cfg) {
  ScenarioConfig c = cfg;
  c.scenario_id = 4;
  c.validate();
  ScenarioReport report;
  report.scenario_id = 4;
  report.manifest = make_manifest(c, 4);

  for (int N : c.agent_counts) {
    SweepTimer timer;
    auto slots = parallel_trials(c.trials_outer, c.threads, [&](int trial) {
      const std::uint64_t tseed =
          derive_seed(c.seed, {4u, static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(trial)});
      const AgentLayout layout = generate_layout(N, c.extent, tseed);
      auto [model, structure] = build_coupled_model(layout, c.coupling_sign);
      const DesignResult standard = solve_standard_lqr(model);
      const int spa = uniform_states_per_agent(structure);

      std::vector<ReportRow> rows;
      {
        ReportRow row = base_row(4, N, trial, tseed);
        fill_design_fields(row, make_standard_design(standard), standard.J, structure,
                           c.link_tol_rel);
        rows.push_back(std::move(row));
      }
      for (int r : c.rank_sweep) {
        Matrix k_low;
        const TrialDesign lowrank =
            make_lowrank_design(model, structure, c.admm, r, standard, &k_low);
        {
          ReportRow row = base_row(4, N, trial, tseed);
          row.param_name = "rank";
          row.has_param = true;
          row.param_value = r;
          fill_design_fields(row, lowrank, standard.J, structure, c.link_tol_rel);
          if (lowrank.usable) {
            row.broadcast_tx = broadcast_transmissions(k_low, N, spa).front();
          }
          rows.push_back(std::move(row));
        }
        // Match the sparse critical node to the broadcast budget: spa * r
        // transmissions = spa * (distinct receivers), i.e. r receivers.
        TrialDesign sparse =
            make_sparse_design(model, structure, r, LinkCountMode::critical_node_receivers,
                               c.admm, c.link_tol_rel, standard);
        sparse.rank = r;
        {
          ReportRow row = base_row(4, N, trial, tseed);
          row.param_name = "rank";
          row.has_param = true;
          row.param_value = r;
          fill_design_fields(row, sparse, standard.J, structure, c.link_tol_rel);
          rows.push_back(std::move(row));
        }
      }
      return rows;
    });
    size_t added = 0;
    for (auto& batch : slots) {
      added += batch.size();
      for (auto& r : batch) report.rows.push_back(std::move(r));
    }
    const double ms = timer.elapsed_ms();
    report.manifest.timings_ms.emplace_back("N=" + std::to_string(N), ms);
    log_sweep_point(c, 4, N, added, ms);
  }
  return report;
}

ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  switch (cfg.scenario_id) {
    case 1: return run_scenario1(cfg);
    case 2: return run_scenario2(cfg);
    case 3: return run_scenario3(cfg);
    case 4: return run_scenario4(cfg);
    default: throw Error(Errc::invalid_argument, "scenario_id must be 1..4");
  }
}

}  // namespace lqrlr
