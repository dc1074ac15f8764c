#include "core/admm.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

namespace lqrlr {

namespace {

Matrix prox_input(const Matrix& K, const Matrix& K_diag, const Matrix& dual, double rho) {
  if (!(rho > 0.0)) {
    throw Error(Errc::invalid_argument, "prox step: rho must be positive");
  }
  return K - K_diag + dual / rho;
}

double augmented_lagrangian(double J, const Matrix& K, const Matrix& target, const Matrix& dual,
                            double rho) {
  const Matrix E = K - target;
  return J + dual.cwiseProduct(E).sum() + 0.5 * rho * E.squaredNorm();
}

}  // namespace

void AdmmConfig::validate(Eigen::Index m, Eigen::Index n) const {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw Error(Errc::invalid_argument, "config.rho must be positive");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw Error(Errc::invalid_argument, "config.gamma must be non-negative");
  }
  if (!(eps_pri > 0.0) || !(eps_dual > 0.0)) {
    throw Error(Errc::invalid_argument, "config.eps_pri and eps_dual must be positive");
  }
  if (max_outer < 1 || max_inner < 1) {
    throw Error(Errc::invalid_argument, "config iteration caps must be at least 1");
  }
  if (!(inner_tol > 0.0)) {
    throw Error(Errc::invalid_argument, "config.inner_tol must be positive");
  }
  if (variant == Variant::lowrank_hard && !rank) {
    throw Error(Errc::invalid_argument, "variant lowrank-hard requires a rank");
  }
  if (rank && (*rank < 1 || *rank > std::min(m, n))) {
    throw Error(Errc::invalid_argument,
                "config.rank must lie in [1, min(m, n)] = [1, " +
                    std::to_string(std::min(m, n)) + "]");
  }
}

namespace detail {

Matrix solve_gain_equation(const Matrix& R, const Matrix& L, double rho, const Matrix& rhs,
                           bool force_kron) {
  const Eigen::Index m = R.rows(), n = L.rows();
  Matrix X;
  if (force_kron || m * n <= 64) {
    Matrix sys = 2.0 * kron(L, R);
    sys.diagonal().array() += rho;
    Eigen::LDLT<Matrix> ldlt(sys);
    if (ldlt.info() != Eigen::Success) {
      throw Error(Errc::numerical, "k_step: inner Kronecker system is not solvable");
    }
    X = unvec(ldlt.solve(vec(rhs)), m, n);
  } else {
    // 2 R X L + rho X = rhs decouples in the eigenbasis of L: with
    // L = V diag(d) V^T and Y = X V, column j solves (2 d_j R + rho I) y_j.
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (L + L.transpose()));
    if (es.info() != Eigen::Success) {
      throw Error(Errc::eigen_failure, "k_step: eigendecomposition of L failed");
    }
    const Matrix& V = es.eigenvectors();
    const Matrix B = rhs * V;
    Matrix Y(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = std::max(es.eigenvalues()(j), 0.0);  // L is PSD up to roundoff
      Matrix col_sys = 2.0 * d * R;
      col_sys.diagonal().array() += rho;
      Eigen::LDLT<Matrix> ldlt(col_sys);
      if (ldlt.info() != Eigen::Success) {
        throw Error(Errc::numerical, "k_step: inner column system is not solvable");
      }
      Y.col(j) = ldlt.solve(B.col(j));
    }
    X = Y * V.transpose();
  }
  const double res = (2.0 * R * X * L + rho * X - rhs).norm();
  const double scale = rhs.norm() + (2.0 * R.norm() * L.norm() + rho) * X.norm();
  if (res > 1e-8 * std::max(scale, 1e-300)) {
    throw Error(Errc::numerical, "k_step: inner linear solve residual check failed");
  }
  return X;
}

}  // namespace detail

KStepResult k_step(const StateSpaceModel& model, const Matrix& K_diag, const Matrix& K_low,
                   const Matrix& dual, double rho, const Matrix& K_init, const AdmmConfig& cfg) {
  const Matrix target = K_diag + K_low;
  auto eval = try_lqr_cost(model, K_init);
  if (!eval) {
    const double absc = spectral_abscissa(model.closed_loop(K_init));
    throw UnstableError("k_step: K_init is not stabilizing (spectral abscissa " +
                            std::to_string(absc) + ")",
                        absc);
  }

  Matrix K = K_init;
  double la = augmented_lagrangian(eval->J, K, target, dual, rho);
  Matrix best_K = K;
  double best_la = la;
  double grad_norm = 0.0;

  for (int it = 0; it < cfg.max_inner; ++it) {
    const Matrix G =
        lqr_gradient(model, K, *eval) + dual + rho * (K - target);
    grad_norm = G.norm();
    if (grad_norm <= cfg.inner_tol * (1.0 + K.norm())) {
      return KStepResult{K, it, false, grad_norm};
    }

    const Matrix rhs =
        2.0 * model.B1.transpose() * eval->P * eval->L - dual + rho * target;
    const Matrix K_hat = detail::solve_gain_equation(model.R, eval->L, rho, rhs);
    const Matrix dir = K_hat - K;

    bool accepted = false;
    double alpha = 1.0;
    for (int h = 0; h <= cfg.backtrack_max_halvings; ++h, alpha *= 0.5) {
      const Matrix K_cand = K + alpha * dir;
      auto cand = try_lqr_cost(model, K_cand);
      if (!cand) continue;  // left F, halve
      const double la_cand = augmented_lagrangian(cand->J, K_cand, target, dual, rho);
      if (la_cand <= la + cfg.backtrack_accept_rel * std::max(1.0, std::abs(la))) {
        K = K_cand;
        eval = cand;
        la = la_cand;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw Error(Errc::inner_stall,
                  "k_step: backtracking exhausted (alpha < 2^-" +
                      std::to_string(cfg.backtrack_max_halvings) + ") at inner iteration " +
                      std::to_string(it) + ", gradient norm " + std::to_string(grad_norm));
    }
    if (la < best_la) {
      best_la = la;
      best_K = K;
    }
  }

  // Cap reached: hand back the best iterate seen, flagged.
  const auto best_eval = try_lqr_cost(model, best_K);
  const double best_grad =
      (lqr_gradient(model, best_K, *best_eval) + dual + rho * (best_K - target)).norm();
  return KStepResult{best_K, cfg.max_inner, true, best_grad};
}

Matrix kdiag_step(const Matrix& K, const Matrix& K_low, const Matrix& dual, double rho,
                  const BlockStructure& structure) {
  if (!(rho > 0.0)) {
    throw Error(Errc::invalid_argument, "kdiag_step: rho must be positive");
  }
  return structure.block_trim(dual / rho + K - K_low);
}

Matrix klow_step_soft(const Matrix& K, const Matrix& K_diag, const Matrix& dual, double rho,
                      double gamma) {
  const Matrix M = prox_input(K, K_diag, dual, rho);
  if (gamma == 0.0) return M;  // prox of the zero functional
  const double tau = gamma / rho;
  Svd dec = svd(M);
  Vector shrunk = (dec.sigma.array() - tau).max(0.0);
  return dec.U * shrunk.asDiagonal() * dec.V.transpose();
}

Matrix klow_step_hard(const Matrix& K, const Matrix& K_diag, const Matrix& dual, double rho,
                      int rank) {
  const Matrix M = prox_input(K, K_diag, dual, rho);
  const Eigen::Index rmax = std::min(M.rows(), M.cols());
  if (rank < 1 || rank > rmax) {
    throw Error(Errc::invalid_argument,
                "klow_step_hard: rank must lie in [1, " + std::to_string(rmax) + "]");
  }
  Svd dec = svd(M);
  return dec.U.leftCols(rank) * dec.sigma.head(rank).asDiagonal() *
         dec.V.leftCols(rank).transpose();
}

Matrix ksparse_step(const Matrix& K, const Matrix& K_diag, const Matrix& dual, double rho,
                    double gamma, const BlockStructure& structure) {
  const Matrix M = prox_input(K, K_diag, dual, rho);
  const double tau = gamma / rho;
  Matrix out = M;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (structure.block_diagonal(i, j)) continue;  // unpenalized, no communication
      const double v = M(i, j);
      out(i, j) = std::copysign(std::max(std::abs(v) - tau, 0.0), v);
    }
  }
  return out;
}

Matrix dual_step(const Matrix& dual, double rho, const Matrix& K, const Matrix& K_diag,
                 const Matrix& K_low) {
  return dual + rho * (K - K_diag - K_low);
}

DesignResult admm_solve(const StateSpaceModel& model, const BlockStructure& structure,
                        const AdmmConfig& cfg, const AdmmObserver& observer,
                        const DesignResult* standard) {
  model.validate();
  structure.validate(model.inputs(), model.states());
  cfg.validate(model.inputs(), model.states());

  DesignResult init = standard ? *standard : solve_standard_lqr(model);

  DesignResult res;
  res.J_stand = init.J_stand;
  res.K = init.K;
  res.K_diag = structure.block_trim(res.K);
  res.K_low = res.K - res.K_diag;  // primal-feasible split of the initial gain
  res.dual = Matrix::Zero(res.K.rows(), res.K.cols());

  Matrix prev_sum = res.K_diag + res.K_low;
  res.termination = Termination::max_iter;
  res.iterations = cfg.max_outer;

  for (int t = 1; t <= cfg.max_outer; ++t) {
    KStepResult ks;
    try {
      ks = k_step(model, res.K_diag, res.K_low, res.dual, cfg.rho, res.K, cfg);
    } catch (const Error& e) {
      if (e.code() == Errc::inner_stall) {
        throw Error(Errc::inner_stall,
                    std::string(e.what()) + " (outer iteration " + std::to_string(t) + ")");
      }
      throw;
    }
    res.K = ks.K;
    res.inner_cap_hits += ks.hit_cap ? 1 : 0;

    res.K_diag = kdiag_step(res.K, res.K_low, res.dual, cfg.rho, structure);
    switch (cfg.variant) {
      case Variant::sparse:
        res.K_low = ksparse_step(res.K, res.K_diag, res.dual, cfg.rho, cfg.gamma, structure);
        break;
      case Variant::lowrank_soft:
        res.K_low = klow_step_soft(res.K, res.K_diag, res.dual, cfg.rho, cfg.gamma);
        break;
      case Variant::lowrank_hard:
        res.K_low = klow_step_hard(res.K, res.K_diag, res.dual, cfg.rho, *cfg.rank);
        break;
    }
    res.dual = dual_step(res.dual, cfg.rho, res.K, res.K_diag, res.K_low);

    const double primal = (res.K - res.K_diag - res.K_low).norm();
    const Matrix sum = res.K_diag + res.K_low;
    const double dual_norm = (sum - prev_sum).norm();
    prev_sum = sum;
    res.residual_history.emplace_back(primal, dual_norm);
    if (observer) observer(t, res.K, res.K_diag, res.K_low, res.dual, primal, dual_norm);

    if (primal <= cfg.eps_pri && dual_norm <= cfg.eps_dual && is_stabilizing(model, sum)) {
      res.termination = Termination::converged;
      res.iterations = t;
      break;
    }
  }

  const Matrix gain = res.structured_gain();
  if (auto eval = try_lqr_cost(model, gain)) {
    res.J = eval->J;
  } else {
    res.J = std::numeric_limits<double>::infinity();
    res.termination = Termination::infeasible;
  }
  return res;
}

OptimalityReport optimality_report(const StateSpaceModel& model, const DesignResult& result,
                                   const AdmmConfig& cfg) {
  OptimalityReport rep;
  rep.primal_residual = (result.K - result.K_diag - result.K_low).norm();
  rep.dual_residual =
      result.residual_history.empty() ? 0.0 : cfg.rho * result.residual_history.back().second;
  rep.stationarity_residual = (lqr_gradient(model, result.K) + result.dual).norm();
  // K-step post-condition plus one dual update bound the stationarity gap.
  rep.stationarity_tol = cfg.inner_tol * (1.0 + result.K.norm()) + cfg.rho * cfg.eps_dual;
  rep.primal_ok = rep.primal_residual <= cfg.eps_pri;
  rep.dual_ok = rep.dual_residual <= cfg.rho * cfg.eps_dual;
  rep.stationarity_ok = rep.stationarity_residual <= rep.stationarity_tol;
  return rep;
}

}  // namespace lqrlr
