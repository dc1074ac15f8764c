#pragma once

#include <functional>
#include <optional>

#include "core/design.hpp"
#include "core/lqr.hpp"
#include "core/model.hpp"

namespace lqrlr {

enum class Variant { sparse, lowrank_soft, lowrank_hard };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::sparse: return "sparse";
    case Variant::lowrank_soft: return "lowrank-soft";
    case Variant::lowrank_hard: return "lowrank-hard";
  }
  return "unknown";
}

struct AdmmConfig {
  Variant variant = Variant::lowrank_soft;
  double rho = 0.3;
  double gamma = 0.0;              // regularization weight (soft / sparse)
  std::optional<int> rank;         // required for lowrank_hard
  double eps_pri = 1e-4;
  double eps_dual = 1e-4;
  int max_outer = 1000;
  int max_inner = 50;              // Anderson-Moore cap per K-step
  double inner_tol = 1e-6;         // gradient-norm tolerance, relative to 1+||K||
  int backtrack_max_halvings = 20; // step floor 2^-20
  double backtrack_accept_rel = 1e-12;

  void validate(Eigen::Index m, Eigen::Index n) const;
};

struct KStepResult {
  Matrix K;
  int iterations = 0;
  bool hit_cap = false;
  double grad_norm = 0.0;  // augmented-Lagrangian gradient at the returned K
};

// Minimize the augmented Lagrangian over K in F by the Anderson-Moore
// fixed-point iteration with step-halving: at the current K solve
//   2 R Khat L + rho Khat = 2 B1^T P L - Lambda + rho (K_diag + K_low)
// for the candidate and move K <- K + alpha (Khat - K), halving alpha until
// the iterate is stabilizing and the augmented Lagrangian does not increase.
KStepResult k_step(const StateSpaceModel& model, const Matrix& K_diag, const Matrix& K_low,
                   const Matrix& dual, double rho, const Matrix& K_init, const AdmmConfig& cfg);

// K_diag = block_trim(dual/rho + K - K_low).
Matrix kdiag_step(const Matrix& K, const Matrix& K_low, const Matrix& dual, double rho,
                  const BlockStructure& structure);

// Singular value shrinkage by gamma/rho on M = K - K_diag + dual/rho: the
// exact prox of gamma ||X||_* + (rho/2) ||M - X||_F^2.
Matrix klow_step_soft(const Matrix& K, const Matrix& K_diag, const Matrix& dual, double rho,
                      double gamma);

// Best rank-r Frobenius approximation of M = K - K_diag + dual/rho.
Matrix klow_step_hard(const Matrix& K, const Matrix& K_diag, const Matrix& dual, double rho,
                      int rank);

// Element-wise soft threshold by gamma/rho on the off-block-diagonal entries
// of M = K - K_diag + dual/rho; block-diagonal entries pass through.
Matrix ksparse_step(const Matrix& K, const Matrix& K_diag, const Matrix& dual, double rho,
                    double gamma, const BlockStructure& structure);

Matrix dual_step(const Matrix& dual, double rho, const Matrix& K, const Matrix& K_diag,
                 const Matrix& K_low);

// Called after each outer iteration with the fresh iterates and residuals.
using AdmmObserver = std::function<void(int iteration, const Matrix& K, const Matrix& K_diag,
                                        const Matrix& K_low, const Matrix& dual,
                                        double primal_norm, double dual_norm)>;

// Full solver: initialize from the unstructured optimum (K_diag/K_low by
// block trimming, dual zero), loop K-step / trim step / prox step / dual
// ascent until both residuals pass and K_diag + K_low is stabilizing.
// `standard` optionally supplies a precomputed solve_standard_lqr result so
// sweeps do not re-solve the Riccati equation; it must belong to `model`.
DesignResult admm_solve(const StateSpaceModel& model, const BlockStructure& structure,
                        const AdmmConfig& cfg, const AdmmObserver& observer = {},
                        const DesignResult* standard = nullptr);

struct OptimalityReport {
  double primal_residual = 0.0;       // ||K - K_diag - K_low||_F
  double dual_residual = 0.0;         // rho * ||(K_diag+K_low) - previous||_F
  double stationarity_residual = 0.0; // ||grad J(K) + dual||_F
  double stationarity_tol = 0.0;
  bool primal_ok = false;
  bool dual_ok = false;
  bool stationarity_ok = false;
};

OptimalityReport optimality_report(const StateSpaceModel& model, const DesignResult& result,
                                   const AdmmConfig& cfg);

namespace detail {
// Direct solve of 2 R X L + rho X = rhs (the SPD Kronecker system
// 2 L (x) R + rho I); dense Kronecker route for small problems, spectral
// decomposition of L otherwise. Exposed for cross-checking in tests.
Matrix solve_gain_equation(const Matrix& R, const Matrix& L, double rho, const Matrix& rhs,
                           bool force_kron = false);
}  // namespace detail

}  // namespace lqrlr
