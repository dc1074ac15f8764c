#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "core/admm.hpp"
#include "core/model.hpp"
#include "core/report.hpp"
#include "core/rng.hpp"

namespace lqrlr {

struct AgentLayout {
  std::vector<std::array<double, 2>> positions;
  double extent = 10.0;

  double distance(size_t i, size_t j) const {
    const double dx = positions[i][0] - positions[j][0];
    const double dy = positions[i][1] - positions[j][1];
    return std::sqrt(dx * dx + dy * dy);
  }
};

// Agent coordinates i.i.d. uniform on [0, extent]^2 from a seeded mt19937_64.
AgentLayout generate_layout(int n_agents, double extent, std::uint64_t seed);

// Coupled second-order multi-agent plant: per-agent local dynamics
// [[1, 1], [1, 3]], pairwise coupling exp(coupling_sign * d(i, j)) * I2, and
// input/disturbance channel [0; 1] per agent; Q and R identity.
std::pair<StateSpaceModel, BlockStructure> build_coupled_model(const AgentLayout& layout,
                                                               int coupling_sign);

struct LinkCount {
  std::vector<int> per_agent_outgoing;  // distinct receiving agents per sender
  int total_links = 0;                  // directed agent pairs
  int offblock_entries = 0;             // nonzero off-block-diagonal entries
};

// A link j -> i exists iff some entry of K in (agent i's input rows x agent
// j's state columns) exceeds link_tol in magnitude, i != j.
LinkCount count_links(const Matrix& K, const BlockStructure& structure, double link_tol);

// link_tol used throughout: rel * max|K| (zero for an all-zero gain).
double relative_link_tol(const Matrix& K, double rel);

// Count of singular values above rel_tol * sigma_max.
int numerical_rank(const Matrix& M, double rel_tol = 1e-9);

// Broadcast design: states_per_agent * rank(K_low) transmissions per agent.
std::vector<int> broadcast_transmissions(const Matrix& K_low, int n_agents, int states_per_agent,
                                         double rank_rel_tol = 1e-9);

// Point-to-point design: states_per_agent * (distinct receivers) per agent.
std::vector<int> unicast_transmissions(const Matrix& K, const BlockStructure& structure,
                                       int states_per_agent, double link_tol);

// Add i.i.d. N(0, sigma^2) draws to every off-block-diagonal entry (row-major
// order); with nonzero_only, restrict to entries above link_tol.
Matrix perturb_offdiag_noise(const Matrix& K, const BlockStructure& structure, double sigma,
                             Rng& rng, bool nonzero_only = false, double link_tol = 0.0);

// Zero `count` off-block entries with magnitude > link_tol, chosen uniformly
// without replacement; when fewer exist, zero them all and report the
// shortfall.
Matrix remove_links(const Matrix& K, const BlockStructure& structure, int count, Rng& rng,
                    double link_tol, int* shortfall = nullptr);

enum class LinkCountMode { offblock_entries, pairwise_links, critical_node_receivers };

struct CalibrationResult {
  double gamma = 0.0;
  DesignResult design;
  int achieved = 0;  // link count of the chosen design, in the requested mode
  int evaluations = 0;
  std::vector<std::pair<double, int>> trajectory;  // (gamma, count) per solve, -1 = infeasible
};

// Bisection on log-gamma over [1e-6, 1e4] (at most 40 solves) for the
// sparse-variant design whose link count is closest to `target`, preferring
// counts <= target on ties. Throws Errc::calibration when no tested gamma
// yields a stabilizing design.
CalibrationResult calibrate_sparse_gamma(const StateSpaceModel& model,
                                         const BlockStructure& structure, int target,
                                         LinkCountMode mode, const AdmmConfig& admm_base,
                                         double link_tol_rel,
                                         const DesignResult* standard = nullptr);

struct ScenarioConfig {
  int scenario_id = 1;
  std::vector<int> agent_counts = {10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  int trials_outer = 100;
  int trials_inner = 100;
  std::vector<double> noise_variances = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<int> attack_counts = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<int> rank_sweep = {1, 2, 3, 4, 5};
  std::uint64_t seed = 1;
  AdmmConfig admm;        // solver knobs; variant/gamma/rank are set per design
  int lowrank_rank = 1;   // broadcast design rank in scenarios 1-3
  int coupling_sign = -1; // -1 decaying (default), +1 literal growth
  double extent = 10.0;
  double link_tol_rel = 1e-6;
  double stability_margin = 0.0;
  bool noise_nonzero_only = false;
  int threads = 0;  // 0 = hardware concurrency
  bool verbose = false;

  void validate() const;
};

ScenarioReport run_scenario1(const ScenarioConfig& config);
ScenarioReport run_scenario2(const ScenarioConfig& config);
ScenarioReport run_scenario3(const ScenarioConfig& config);
ScenarioReport run_scenario4(const ScenarioConfig& config);
ScenarioReport run_scenario(const ScenarioConfig& config);  // dispatch on scenario_id

// Resolved configuration as a JSON object (embedded in the RunManifest).
std::string scenario_config_json(const ScenarioConfig& config);

}  // namespace lqrlr
