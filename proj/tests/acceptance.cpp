// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. The Monte-Carlo criteria run desk-scale seeded sweeps.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "core/admm.hpp"
#include "core/experiments.hpp"
#include "core/lqr.hpp"
#include "core/rng.hpp"
#include "lqrlr/lqrlr.h"

using namespace lqrlr;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& msg) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += msg;
    }
  }
  void note(const std::string& msg) {
    if (!detail.empty()) detail += "; ";
    detail += msg;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  Matrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = rng.uniform(-scale, scale);
  return M;
}

Matrix random_stable(Eigen::Index n, Rng& rng) {
  Matrix A = random_matrix(n, n, rng);
  A -= (spectral_abscissa(A) + rng.uniform(0.2, 1.5)) * Matrix::Identity(n, n);
  return A;
}

// Test-side Kronecker oracle, independent of the library helpers.
Matrix lyap_oracle(const Matrix& A, const Matrix& W) {
  const Eigen::Index n = A.rows();
  Matrix sys = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index row = i + n * j;
      for (Eigen::Index k = 0; k < n; ++k) {
        sys(row, k + n * j) += A(k, i);
        sys(row, i + n * k) += A(k, j);
      }
    }
  }
  Eigen::VectorXd rhs(n * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) rhs(i + n * j) = -W(i, j);
  Eigen::VectorXd x = sys.partialPivLu().solve(rhs);
  Matrix P(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) P(i, j) = x(i + n * j);
  return P;
}

StateSpaceModel scalar_model(double a, double b1 = 1, double b2 = 1, double q = 1, double r = 1) {
  StateSpaceModel m;
  m.A = Matrix::Constant(1, 1, a);
  m.B1 = Matrix::Constant(1, 1, b1);
  m.B2 = Matrix::Constant(1, 1, b2);
  m.Q = Matrix::Constant(1, 1, q);
  m.R = Matrix::Constant(1, 1, r);
  return m;
}

StateSpaceModel random_model(Eigen::Index n, Eigen::Index m, Rng& rng) {
  StateSpaceModel model;
  model.A = random_matrix(n, n, rng);
  model.B1 = random_matrix(n, m, rng);
  model.B2 = random_matrix(n, m, rng);
  Matrix S = random_matrix(n, n, rng, 0.3);
  model.Q = Matrix::Identity(n, n) + S * S.transpose();
  Matrix T = random_matrix(m, m, rng, 0.3);
  model.R = Matrix::Identity(m, m) + T * T.transpose();
  return model;
}

double nuclear_objective(const Matrix& X, const Matrix& M, double gamma, double rho) {
  return gamma * svd(X).sigma.sum() + 0.5 * rho * (M - X).squaredNorm();
}

std::map<std::string, const AggregateCell*> cell_index(const std::vector<AggregateCell>& cells) {
  std::map<std::string, const AggregateCell*> idx;
  for (const auto& c : cells) {
    idx[std::to_string(c.n_agents) + "|" + fmt_g17(c.param_value) + "|" + c.design] = &c;
  }
  return idx;
}

std::string cell_key(int n, double param, const std::string& design) {
  return std::to_string(n) + "|" + fmt_g17(param) + "|" + design;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Recorded on the first successful run of criterion 9 (seed 9090); the run is
// seed-deterministic, the slack absorbs compiler/libm variation.
constexpr double kScenario4MedianBaseline = 1.0290838538125953;

// ---------------------------------------------------------------------------

Check criterion1_lyapunov() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  int oracle_checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(19));  // 2..20
    Matrix A = random_stable(n, rng);
    Matrix S = random_matrix(n, n, rng);
    Matrix W = 0.5 * (S + S.transpose());
    Matrix P = solve_lyapunov_cont(A, W);
    const double res = (A.transpose() * P + P * A + W).norm();
    const double bound = 1e-10 * (W.norm() + 2.0 * A.norm() * P.norm());
    c.require(res <= bound, "residual " + fmt_g17(res) + " > bound at n=" + std::to_string(n));
    if (n <= 5) {
      ++oracle_checked;
      Matrix Po = lyap_oracle(A, W);
      c.require((P - Po).norm() <= 1e-8 * std::max(1.0, Po.norm()),
                "Kronecker oracle mismatch at n=" + std::to_string(n));
    }
  }
  const double secs = seconds_since(t0);
  c.require(secs < 10.0, "runtime " + fmt_g17(secs) + " s >= 10 s");
  c.note("200 systems, " + std::to_string(oracle_checked) + " oracle-checked, " + fmt_g17(secs) +
         " s");
  return c;
}

Check criterion2_scalar_oracle() {
  Check c;
  const double k_opt = 1.0 + std::sqrt(2.0);
  const auto res = solve_standard_lqr(scalar_model(1));
  c.require(std::abs(res.K(0, 0) - k_opt) <= 1e-8, "k* mismatch");
  c.require(std::abs(res.J - k_opt) <= 1e-8, "J_stand mismatch");
  const auto eval = lqr_cost(scalar_model(1), Matrix::Constant(1, 1, 2.0));
  c.require(std::abs(eval.J - 2.5) <= 1e-10, "J(k=2) mismatch");
  c.note("k* = " + fmt_g17(res.K(0, 0)) + ", J(2) = " + fmt_g17(eval.J));
  return c;
}

Check criterion3_gradient() {
  Check c;
  const double g = lqr_gradient(scalar_model(1), Matrix::Constant(1, 1, 2.0))(0, 0);
  c.require(std::abs(g + 0.5) <= 1e-9, "scalar gradient " + fmt_g17(g) + " != -0.5");

  Rng rng(3003);
  int tested = 0, attempts = 0;
  double worst = 0.0;
  while (tested < 20 && attempts < 600) {
    ++attempts;
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(7));
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.below(static_cast<uint64_t>(n)));
    const auto model = random_model(n, m, rng);
    const Matrix K_opt = solve_care(model).K;
    Matrix K = K_opt + random_matrix(m, n, rng, 0.15);
    if (!is_stabilizing(model, K)) continue;
    if (!(spectral_abscissa(model.closed_loop(K)) < -0.15)) continue;
    if (lqr_cost(model, K).J > 60.0) continue;

    const double h = 1e-6;
    Matrix Gfd(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        Matrix Kp = K, Km = K;
        Kp(i, j) += h;
        Km(i, j) -= h;
        Gfd(i, j) = (lqr_cost(model, Kp).J - lqr_cost(model, Km).J) / (2.0 * h);
      }
    }
    // skip instances with components inside the finite-difference noise band
    bool measurable = true;
    for (Eigen::Index i = 0; i < m && measurable; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double a = std::abs(Gfd(i, j));
        if (a > 1e-8 && a < 1e-2) {
          measurable = false;
          break;
        }
      }
    }
    if (!measurable) continue;

    const Matrix G = lqr_gradient(model, K);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (std::abs(Gfd(i, j)) > 1e-8) {
          const double rel = std::abs(G(i, j) - Gfd(i, j)) / std::abs(Gfd(i, j));
          worst = std::max(worst, rel);
          c.require(rel <= 1e-5, "relative error " + fmt_g17(rel) + " > 1e-5");
        }
      }
    }
    ++tested;
  }
  c.require(tested == 20, "only matched " + std::to_string(tested) + "/20 instances");
  c.note("20 instances, worst relative error " + fmt_g17(worst));
  return c;
}

Check criterion4_prox() {
  Check c;
  Rng rng(4004);
  const double rho = 2.0, gamma = 1.4;  // tau = 0.7
  double worst_margin = 1e300;
  for (int inst = 0; inst < 3; ++inst) {
    Matrix M = random_matrix(3, 4, rng);
    Matrix zero = Matrix::Zero(3, 4);
    Matrix out = klow_step_soft(M, zero, zero, rho, gamma);
    const double f_out = nuclear_objective(out, M, gamma, rho);
    for (int k = 0; k < 10000; ++k) {
      Matrix X = (k % 3 == 0) ? Matrix(random_matrix(3, 4, rng, 2.0))
                              : Matrix(out + random_matrix(3, 4, rng, rng.uniform(0.0, 1.0)));
      worst_margin = std::min(worst_margin, nuclear_objective(X, M, gamma, rho) - f_out);
    }
  }
  c.require(worst_margin >= -1e-9, "a candidate beat the prox by " + fmt_g17(-worst_margin));

  Matrix M = random_matrix(4, 6, rng);
  Matrix zero = Matrix::Zero(4, 6);
  const int r = 2;
  Matrix out = klow_step_hard(M, zero, zero, 1.0, r);
  const Vector sigma = svd(M).sigma;
  double tail = 0.0;
  for (Eigen::Index i = r; i < sigma.size(); ++i) tail += sigma(i) * sigma(i);
  const double lhs = (M - out).squaredNorm();
  c.require(std::abs(lhs - tail) <= 1e-10 * std::max(1.0, tail), "tail identity violated");
  c.note("3x10^4 prox candidates, margin " + fmt_g17(worst_margin) + "; tail gap " +
         fmt_g17(std::abs(lhs - tail)));
  return c;
}

Check criterion5_admm_contract() {
  Check c;
  const double eps = 1e-4;
  int converged = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const AgentLayout layout = generate_layout(5, 10.0, seed);
    auto [model, structure] = build_coupled_model(layout, -1);
    const DesignResult standard = solve_standard_lqr(model);
    for (int variant = 0; variant < 2; ++variant) {
      AdmmConfig cfg;
      cfg.eps_pri = eps;
      cfg.eps_dual = eps;
      if (variant == 0) {
        cfg.variant = Variant::lowrank_hard;
        cfg.rank = 1;
      } else {
        cfg.variant = Variant::lowrank_soft;
        cfg.gamma = 1.0;
      }
      const auto res = admm_solve(model, structure, cfg, {}, &standard);
      if (res.termination != Termination::converged) continue;
      ++converged;
      const auto& last = res.residual_history.back();
      c.require(last.first <= eps,
                "primal residual above eps_pri (seed " + std::to_string(seed) + ")");
      c.require(last.second <= eps,
                "dual residual above eps_dual (seed " + std::to_string(seed) + ")");
      c.require(is_stabilizing(model, res.structured_gain()),
                "structured gain not in F (seed " + std::to_string(seed) + ")");
      c.require(res.J / res.J_stand >= 1.0 - 1e-9,
                "cost ratio below 1 (seed " + std::to_string(seed) + ")");
      if (variant == 0) {
        c.require(numerical_rank(res.K_low) == 1,
                  "hard K_low rank != 1 (seed " + std::to_string(seed) + ")");
      }
    }
  }
  c.require(converged >= 18, "only " + std::to_string(converged) + "/20 runs converged");

  const auto t0 = std::chrono::steady_clock::now();
  const AgentLayout layout10 = generate_layout(10, 10.0, 77);
  auto [model10, structure10] = build_coupled_model(layout10, -1);
  AdmmConfig cfg10;
  cfg10.variant = Variant::lowrank_hard;
  cfg10.rank = 1;
  const auto res10 = admm_solve(model10, structure10, cfg10);
  const double secs = seconds_since(t0);
  c.require(secs <= 60.0, "N=10 solve took " + fmt_g17(secs) + " s > 60 s");
  c.note(std::to_string(converged) + "/20 N=5 runs converged; N=10 hard solve " + fmt_g17(secs) +
         " s, " + std::to_string(res10.iterations) + " iterations");
  return c;
}

Check criterion6_dual_feasibility() {
  Check c;
  const double gamma = 3.0;
  double worst = 0.0;
  for (std::uint64_t seed : {606ull, 607ull}) {
    const AgentLayout layout = generate_layout(5, 10.0, seed);
    auto [model, structure] = build_coupled_model(layout, -1);
    AdmmConfig cfg;
    cfg.variant = Variant::lowrank_soft;
    cfg.gamma = gamma;
    int iterations = 0;
    admm_solve(model, structure, cfg,
               [&](int, const Matrix&, const Matrix&, const Matrix&, const Matrix& dual, double,
                   double) {
                 ++iterations;
                 const double smax = svd(dual).sigma.maxCoeff();
                 worst = std::max(worst, smax);
                 c.require(smax <= gamma + 1e-8,
                           "sigma_max(dual) = " + fmt_g17(smax) + " > gamma + 1e-8");
               });
    c.require(iterations > 0, "observer never fired");
  }
  c.note("max sigma_max(dual) over all iterations " + fmt_g17(worst) + " vs gamma " +
         fmt_g17(gamma));
  return c;
}

Check criterion7_scenario1() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig cfg;
  cfg.scenario_id = 1;
  cfg.agent_counts = {10, 12, 14};
  cfg.trials_outer = 20;
  cfg.seed = 4242;
  cfg.threads = 0;
  const auto report = run_scenario1(cfg);
  const auto idx = cell_index(aggregate(report));

  int points = 0, lowrank_better = 0;
  std::string summary;
  for (int N : cfg.agent_counts) {
    const auto lr = idx.find(cell_key(N, 0.0, "lowrank"));
    const auto sp = idx.find(cell_key(N, 0.0, "sparse"));
    c.require(lr != idx.end() && lr->second->ratio_rows > 0,
              "no low-rank results at N=" + std::to_string(N));
    c.require(sp != idx.end() && sp->second->ratio_rows > 0,
              "no sparse results at N=" + std::to_string(N));
    if (lr == idx.end() || sp == idx.end()) continue;
    ++points;
    if (lr->second->mean_cost_ratio <= sp->second->mean_cost_ratio) ++lowrank_better;
    summary += " N=" + std::to_string(N) + ": " + fmt_g17(lr->second->mean_cost_ratio) + " vs " +
               fmt_g17(sp->second->mean_cost_ratio);
  }
  c.require(points > 0 && lowrank_better >= static_cast<int>(std::ceil(0.9 * points)),
            "low-rank mean ratio better at only " + std::to_string(lowrank_better) + "/" +
                std::to_string(points) + " sweep points");
  const double secs = seconds_since(t0);
  c.require(secs <= 1800.0, "runtime " + fmt_g17(secs) + " s > 30 min");
  c.note("lowrank<=sparse at " + std::to_string(lowrank_better) + "/" + std::to_string(points) +
         " points;" + summary + "; " + fmt_g17(secs) + " s");
  return c;
}

Check criterion8_scenario23() {
  Check c;
  ScenarioConfig cfg;
  cfg.scenario_id = 2;
  cfg.agent_counts = {10, 12};
  cfg.trials_outer = 20;
  cfg.trials_inner = 20;
  cfg.noise_variances = {0.0, 0.1, 0.5, 0.9};
  cfg.seed = 8080;
  cfg.threads = 0;
  const auto report2 = run_scenario2(cfg);
  const auto idx2 = cell_index(aggregate(report2));

  double lr_sum = 0.0, sp_sum = 0.0;
  int cells = 0;
  for (int N : cfg.agent_counts) {
    for (double s2 : {0.1, 0.5, 0.9}) {
      const auto lr = idx2.find(cell_key(N, s2, "lowrank"));
      const auto sp = idx2.find(cell_key(N, s2, "sparse"));
      c.require(lr != idx2.end() && lr->second->attempts > 0,
                "missing low-rank cell at N=" + std::to_string(N));
      c.require(sp != idx2.end() && sp->second->attempts > 0,
                "missing sparse cell at N=" + std::to_string(N));
      if (lr == idx2.end() || sp == idx2.end()) continue;
      lr_sum += lr->second->success_probability;
      sp_sum += sp->second->success_probability;
      ++cells;
    }
    for (const char* design : {"standard", "sparse", "lowrank"}) {
      const auto ctrl = idx2.find(cell_key(N, 0.0, design));
      c.require(ctrl != idx2.end() && ctrl->second->success_probability == 1.0,
                std::string("sigma2=0 control cell not exactly 1 for ") + design);
    }
  }
  const double lr_avg = lr_sum / cells, sp_avg = sp_sum / cells;
  c.require(lr_avg >= sp_avg - 0.05, "low-rank avg success " + fmt_g17(lr_avg) +
                                         " < sparse avg " + fmt_g17(sp_avg) + " - 0.05");

  ScenarioConfig cfg3;
  cfg3.scenario_id = 3;
  cfg3.agent_counts = {10};
  cfg3.trials_outer = 10;
  cfg3.trials_inner = 10;
  cfg3.attack_counts = {0, 3};
  cfg3.seed = 8081;
  cfg3.threads = 0;
  const auto report3 = run_scenario3(cfg3);
  const auto idx3 = cell_index(aggregate(report3));
  for (const char* design : {"standard", "sparse", "lowrank"}) {
    const auto ctrl = idx3.find(cell_key(10, 0.0, design));
    c.require(ctrl != idx3.end() && ctrl->second->success_probability == 1.0,
              std::string("l=0 control cell not exactly 1 for ") + design);
  }
  c.note("noise grid: lowrank avg " + fmt_g17(lr_avg) + ", sparse avg " + fmt_g17(sp_avg) +
         " over " + std::to_string(cells) + " cells; all control cells exactly 1");
  return c;
}

Check criterion9_scenario4() {
  Check c;
  ScenarioConfig cfg;
  cfg.scenario_id = 4;
  cfg.agent_counts = {10};
  cfg.trials_outer = 20;
  cfg.rank_sweep = {1};
  cfg.seed = 9090;
  cfg.threads = 0;
  const auto report = run_scenario4(cfg);
  double median = std::numeric_limits<double>::quiet_NaN();
  int pairs = 0;
  for (const auto& cell : aggregate(report)) {
    if (cell.design == "sparse/lowrank") {
      median = cell.median_ratio;
      pairs = cell.rows;
    }
  }
  c.require(pairs >= 15, "only " + std::to_string(pairs) + " sparse/lowrank pairs");
  c.require(median > 1.0, "median J_sparse/J_lowrank = " + fmt_g17(median) + " <= 1");
  c.require(std::abs(median - kScenario4MedianBaseline) <= 0.02 * kScenario4MedianBaseline,
            "median " + fmt_g17(median) + " drifted from recorded baseline " +
                fmt_g17(kScenario4MedianBaseline));
  c.note("median J_sparse/J_lowrank = " + fmt_g17(median) + " over " + std::to_string(pairs) +
         " pairs (baseline " + fmt_g17(kScenario4MedianBaseline) + ")");
  return c;
}

Check criterion10_determinism() {
  Check c;
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path();

  auto run_csv = [&](int scenario, int threads, const std::string& name) {
    lqrlr_scenario_options opts;
    lqrlr_scenario_options_defaults(&opts, scenario);
    const int agents[] = {5};
    const double sigmas[] = {0.1, 0.5};
    opts.agent_counts = agents;
    opts.agent_counts_len = 1;
    opts.trials_outer = 4;
    opts.trials_inner = 5;
    opts.seed = 30 + static_cast<uint64_t>(scenario);
    if (scenario == 2) {
      opts.noise_variances = sigmas;
      opts.noise_variances_len = 2;
    }
    opts.threads = threads;
    lqrlr_report* rep = nullptr;
    if (lqrlr_scenario_run(&opts, &rep) != LQRLR_OK) return std::string();
    const std::string path = (dir / name).string();
    lqrlr_report_write_csv(rep, path.c_str());
    lqrlr_report_free(rep);
    const std::string body = slurp(path);
    fs::remove(path);
    return body;
  };
  for (int scenario : {1, 2}) {
    const std::string a = run_csv(scenario, 1, "acc_det_t1.csv");
    const std::string b = run_csv(scenario, 4, "acc_det_t4.csv");
    c.require(!a.empty() && a == b, "scenario " + std::to_string(scenario) +
                                        " CSV differs between threads=1 and threads=4");
  }
  c.note("scenario 1 and 2 CSV bodies byte-identical across thread counts {1, 4}");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  struct Entry {
    int id;
    const char* label;
    std::function<Check()> run;
  };
  const std::vector<Entry> entries = {
      {1, "Lyapunov residual bound and Kronecker-oracle agreement", criterion1_lyapunov},
      {2, "scalar analytic oracle (Riccati and fixed-gain cost)", criterion2_scalar_oracle},
      {3, "gradient matches central finite differences", criterion3_gradient},
      {4, "prox correctness (soft shrinkage optimality, hard tail identity)", criterion4_prox},
      {5, "ADMM stopping contract, feasibility, rank and runtime", criterion5_admm_contract},
      {6, "soft-variant dual feasibility after every outer iteration", criterion6_dual_feasibility},
      {7, "scenario 1: low-rank cost increment beats link-matched sparse", criterion7_scenario1},
      {8, "scenarios 2/3: robustness ordering and exact control cells", criterion8_scenario23},
      {9, "scenario 4: median sparse/low-rank cost quotient above 1", criterion9_scenario4},
      {10, "byte-identical CSV across thread counts", criterion10_determinism},
  };

  int failures = 0;
  for (const auto& e : entries) {
    if (argc > 1 && std::atoi(argv[1]) != e.id) continue;
    const Check c = e.run();
    std::printf("[%s] criterion %d: %s%s%s\n", c.ok ? "PASS" : "FAIL", e.id, e.label,
                c.detail.empty() ? "" : " -- ", c.detail.c_str());
    std::fflush(stdout);
    if (!c.ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
