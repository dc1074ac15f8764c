#include "core/lqr.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <string>

namespace lqrlr {

namespace {

using Complex = std::complex<double>;
using MatrixC = Eigen::MatrixXcd;

void check_gain_dims(const StateSpaceModel& model, const Matrix& K, const char* where) {
  if (K.rows() != model.inputs() || K.cols() != model.states()) {
    throw Error(Errc::invalid_argument,
                std::string(where) + ": K must be " + std::to_string(model.inputs()) + "x" +
                    std::to_string(model.states()));
  }
}

// Move the eigenvalue at position k+1 of the triangular T one slot up via a
// unitary similarity, accumulating into U (ztrexc-style adjacent swap).
void swap_adjacent(MatrixC& T, MatrixC& U, Eigen::Index k) {
  const Complex a = T(k, k), b = T(k, k + 1), c = T(k + 1, k + 1);
  const Complex v1 = b, v2 = c - a;
  const double r = std::sqrt(std::norm(v1) + std::norm(v2));
  if (r == 0.0 || std::abs(v2) == 0.0) return;  // equal eigenvalues, order immaterial
  const Complex cs = v1 / r, sn = v2 / r;
  Eigen::Matrix2cd G;
  G << cs, -std::conj(sn), sn, std::conj(cs);
  const Eigen::Index n = T.rows();
  T.block(k, k, 2, n - k) = (G.adjoint() * T.block(k, k, 2, n - k)).eval();
  T.block(0, k, k + 2, 2) = (T.block(0, k, k + 2, 2) * G).eval();
  U.middleCols(k, 2) = (U.middleCols(k, 2) * G).eval();
  T(k + 1, k) = Complex(0.0, 0.0);
}

}  // namespace

std::optional<CostEval> try_lqr_cost(const StateSpaceModel& model, const Matrix& K) {
  check_gain_dims(model, K, "lqr_cost");
  const Matrix Acl = model.closed_loop(K);
  const Matrix Wp = 0.5 * ((model.Q + K.transpose() * model.R * K) +
                           (model.Q + K.transpose() * model.R * K).transpose());
  const Matrix Wl = model.B2 * model.B2.transpose();

  CostEval out;
  if (Acl.rows() <= detail::kLyapKroneckerMaxDim) {
    if (!(spectral_abscissa(Acl) < 0.0)) return std::nullopt;
    out.P = detail::lyapunov_kron(Acl, Wp);
    out.L = detail::lyapunov_kron(Acl.transpose(), Wl);
  } else {
    // One Schur factorization serves the stability test and both equations:
    // Acl = U T U^T gives Acl^T = U T^T U^T.
    const SchurForm schur = real_schur(Acl);
    if (!(schur.abscissa < 0.0)) return std::nullopt;
    out.P = detail::lyapunov_schur(schur, Wp);
    const Matrix Cl = schur.U.transpose() * Wl * schur.U;
    out.L = schur.U * detail::quasi_triangular_lyap_dual(schur.T, Cl) * schur.U.transpose();
  }
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  out.L = 0.5 * (out.L + out.L.transpose()).eval();
  out.J = (model.B2.transpose() * out.P * model.B2).trace();
  return out;
}

CostEval lqr_cost(const StateSpaceModel& model, const Matrix& K) {
  auto eval = try_lqr_cost(model, K);
  if (!eval) {
    const double absc = spectral_abscissa(model.closed_loop(K));
    throw UnstableError(
        "lqr_cost: infinite cost, K is not stabilizing (spectral abscissa " +
            std::to_string(absc) + ")",
        absc);
  }
  return *eval;
}

Matrix lqr_gradient(const StateSpaceModel& model, const Matrix& K, const CostEval& eval) {
  return 2.0 * (model.R * K - model.B1.transpose() * eval.P) * eval.L;
}

Matrix lqr_gradient(const StateSpaceModel& model, const Matrix& K) {
  return lqr_gradient(model, K, lqr_cost(model, K));
}

CareSolution solve_care(const StateSpaceModel& model) {
  const Eigen::Index n = model.states();
  Eigen::LLT<Matrix> R_llt(model.R);
  if (R_llt.info() != Eigen::Success) {
    throw Error(Errc::invalid_argument, "solve_care: R is not positive definite");
  }
  const Matrix S = model.B1 * R_llt.solve(model.B1.transpose());

  Matrix H(2 * n, 2 * n);
  H << model.A, -S, -model.Q, -model.A.transpose();

  Eigen::ComplexSchur<MatrixC> cs(H.cast<Complex>(), /*computeU=*/true);
  if (cs.info() != Eigen::Success) {
    throw Error(Errc::eigen_failure, "solve_care: Schur iteration failed on the Hamiltonian");
  }
  MatrixC T = cs.matrixT();
  MatrixC U = cs.matrixU();

  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (std::abs(T(i, i).real()) < 1e-9) {
      throw Error(Errc::non_stabilizable,
                  "solve_care: Hamiltonian eigenvalue within 1e-9 of the imaginary axis "
                  "(model not stabilizable/detectable)");
    }
  }

  // Reorder so the n stable eigenvalues occupy the leading diagonal; the
  // leading n columns of U then span the stable invariant subspace.
  Eigen::Index front = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (T(i, i).real() < 0.0) {
      for (Eigen::Index k = i; k > front; --k) swap_adjacent(T, U, k - 1);
      ++front;
    }
  }
  if (front != n) {
    throw Error(Errc::non_stabilizable,
                "solve_care: Hamiltonian has " + std::to_string(front) +
                    " stable eigenvalues, expected " + std::to_string(n));
  }

  const MatrixC U1 = U.topLeftCorner(n, n);
  const MatrixC U2 = U.bottomLeftCorner(n, n);
  Eigen::FullPivLU<MatrixC> lu(U1.transpose());
  if (!lu.isInvertible()) {
    throw Error(Errc::non_stabilizable, "solve_care: stable subspace basis is singular");
  }
  const MatrixC Pc = lu.solve(U2.transpose()).transpose();

  if (Pc.imag().norm() > 1e-8 * std::max(1.0, Pc.real().norm())) {
    throw Error(Errc::numerical, "solve_care: solution has a non-negligible imaginary part");
  }
  CareSolution sol;
  sol.P = 0.5 * (Pc.real() + Pc.real().transpose());
  sol.K = R_llt.solve(model.B1.transpose() * sol.P);
  return sol;
}

DesignResult solve_standard_lqr(const StateSpaceModel& model) {
  model.validate();
  const CareSolution care = solve_care(model);
  auto eval = try_lqr_cost(model, care.K);
  if (!eval) {
    throw Error(Errc::non_stabilizable,
                "solve_standard_lqr: Riccati gain failed the stability test");
  }
  DesignResult res;
  res.K = care.K;
  res.K_diag = care.K;  // no block structure: everything is block-diagonal
  res.K_low = Matrix::Zero(care.K.rows(), care.K.cols());
  res.dual = Matrix::Zero(care.K.rows(), care.K.cols());
  res.J = eval->J;
  res.J_stand = eval->J;
  res.iterations = 0;
  res.termination = Termination::converged;
  return res;
}

}  // namespace lqrlr
