#include "core/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <limits>
#include <cmath>
#include <string>
#include <vector>

namespace lqrlr {

namespace {

std::string dim_string(const Matrix& M) {
  return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

void require_square(const Matrix& M, const char* name) {
  if (M.rows() == 0 || M.rows() != M.cols()) {
    throw Error(Errc::invalid_argument,
                std::string(name) + ": expected a non-empty square matrix, got " + dim_string(M));
  }
}

// Diagonal block sizes (1 or 2) of a real quasi-upper-triangular matrix.
std::vector<std::pair<Eigen::Index, Eigen::Index>> schur_blocks(const Matrix& T) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;
  const Eigen::Index n = T.rows();
  Eigen::Index i = 0;
  while (i < n) {
    if (i + 1 < n && T(i + 1, i) != 0.0) {
      blocks.emplace_back(i, 2);
      i += 2;
    } else {
      blocks.emplace_back(i, 1);
      i += 1;
    }
  }
  return blocks;
}

// Solve the small Sylvester system M11^T X + X M22 = RHS (block sizes <= 2)
// via its Kronecker form. Throws on a singular system, which corresponds to
// an eigenvalue pair of the closed loop summing to ~0.
Matrix solve_small_sylvester(const Matrix& M11t, const Matrix& M22, const Matrix& rhs) {
  const Eigen::Index p = rhs.rows(), q = rhs.cols();
  Matrix sys = kron(Matrix::Identity(q, q), M11t) + kron(M22.transpose(), Matrix::Identity(p, p));
  Eigen::FullPivLU<Matrix> lu(sys);
  if (!lu.isInvertible()) {
    throw Error(Errc::numerical,
                "Lyapunov back-substitution hit a singular diagonal block "
                "(eigenvalue pair summing to ~0)");
  }
  return unvec(lu.solve(vec(rhs)), p, q);
}

// Solve T^T Y + Y T + C = 0 with T quasi-upper-triangular (forward sweep).
Matrix quasi_triangular_lyap_upper(const Matrix& T, const Matrix& C) {
  const Eigen::Index n = T.rows();
  const auto blocks = schur_blocks(T);
  Matrix Y = Matrix::Zero(n, n);
  for (const auto& [sj, bj] : blocks) {
    for (const auto& [si, bi] : blocks) {
      Matrix rhs = -C.block(si, sj, bi, bj);
      if (si > 0) rhs -= T.block(0, si, si, bi).transpose() * Y.block(0, sj, si, bj);
      if (sj > 0) rhs -= Y.block(si, 0, bi, sj) * T.block(0, sj, sj, bj);
      Y.block(si, sj, bi, bj) =
          solve_small_sylvester(T.block(si, si, bi, bi).transpose(), T.block(sj, sj, bj, bj), rhs);
    }
  }
  return Y;
}

double relative_residual(const Matrix& Acl, const Matrix& W, const Matrix& P) {
  const double res = (Acl.transpose() * P + P * Acl + W).norm();
  const double scale = W.norm() + 2.0 * Acl.norm() * P.norm();
  return res / std::max(scale, 1e-300);
}

}  // namespace

void require_finite(const Matrix& M, const char* name) {
  if (M.allFinite()) return;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (!std::isfinite(M(i, j))) {
        throw Error(Errc::invalid_argument,
                    std::string(name) + "[" + std::to_string(i) + "," + std::to_string(j) +
                        "]: non-finite entry");
      }
    }
  }
}

double spectral_abscissa(const Matrix& M) {
  require_square(M, "spectral_abscissa");
  require_finite(M, "spectral_abscissa");
  if (M.rows() == 1) return M(0, 0);
  Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw Error(Errc::eigen_failure,
                "eigenvalue iteration failed on a " + dim_string(M) + " matrix");
  }
  return es.eigenvalues().real().maxCoeff();
}

Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

Vector vec(const Matrix& M) {
  return Eigen::Map<const Vector>(M.data(), M.size());
}

Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Svd svd(const Matrix& M) {
  require_finite(M, "svd");
  Eigen::JacobiSVD<Matrix> dec(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    throw Error(Errc::eigen_failure, "SVD failed to converge on a " + dim_string(M) + " matrix");
  }
  return Svd{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

SchurForm real_schur(const Matrix& A) {
  require_square(A, "real_schur");
  Eigen::RealSchur<Matrix> rs(A, /*computeU=*/true);
  if (rs.info() != Eigen::Success) {
    throw Error(Errc::eigen_failure,
                "Schur iteration failed on a " + dim_string(A) + " matrix");
  }
  SchurForm out{rs.matrixT(), rs.matrixU(), 0.0};
  double absc = -std::numeric_limits<double>::infinity();
  for (const auto& [s, b] : schur_blocks(out.T)) {
    const double re = (b == 1) ? out.T(s, s) : 0.5 * (out.T(s, s) + out.T(s + 1, s + 1));
    absc = std::max(absc, re);
  }
  out.abscissa = absc;
  return out;
}

namespace detail {

Matrix lyapunov_kron(const Matrix& Acl, const Matrix& W) {
  const Eigen::Index n = Acl.rows();
  const Matrix At = Acl.transpose();
  const Matrix I = Matrix::Identity(n, n);
  Matrix sys = kron(I, At) + kron(At, I);
  Eigen::FullPivLU<Matrix> lu(sys);
  if (!lu.isInvertible()) {
    throw Error(Errc::numerical,
                "Kronecker Lyapunov system singular (eigenvalue pair summing to ~0)");
  }
  return unvec(lu.solve(-vec(W)), n, n);
}

Matrix lyapunov_schur(const SchurForm& schur, const Matrix& W) {
  const Matrix C = schur.U.transpose() * W * schur.U;
  const Matrix Y = quasi_triangular_lyap_upper(schur.T, C);
  return schur.U * Y * schur.U.transpose();
}

Matrix quasi_triangular_lyap_dual(const Matrix& T, const Matrix& C) {
  const Eigen::Index n = T.rows();
  const auto blocks = schur_blocks(T);
  Matrix Y = Matrix::Zero(n, n);
  for (auto jt = blocks.rbegin(); jt != blocks.rend(); ++jt) {
    const auto [sj, bj] = *jt;
    const Eigen::Index ej = sj + bj;
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
      const auto [si, bi] = *it;
      const Eigen::Index ei = si + bi;
      Matrix rhs = -C.block(si, sj, bi, bj);
      if (ei < n) rhs -= T.block(si, ei, bi, n - ei) * Y.block(ei, sj, n - ei, bj);
      if (ej < n) rhs -= Y.block(si, ej, bi, n - ej) * T.block(sj, ej, bj, n - ej).transpose();
      Y.block(si, sj, bi, bj) =
          solve_small_sylvester(T.block(si, si, bi, bi), T.block(sj, sj, bj, bj).transpose(), rhs);
    }
  }
  return Y;
}

}  // namespace detail

Matrix solve_lyapunov_cont(const Matrix& Acl, const Matrix& W) {
  require_square(Acl, "solve_lyapunov_cont: Acl");
  require_finite(Acl, "Acl");
  require_finite(W, "W");
  if (W.rows() != Acl.rows() || W.cols() != Acl.cols()) {
    throw Error(Errc::invalid_argument, "solve_lyapunov_cont: W must match Acl (" +
                                            dim_string(Acl) + " vs " + dim_string(W) + ")");
  }
  if ((W - W.transpose()).norm() > 1e-8 * std::max(1.0, W.norm())) {
    throw Error(Errc::invalid_argument, "solve_lyapunov_cont: W is not symmetric");
  }
  const Matrix Ws = 0.5 * (W + W.transpose());

  Matrix P;
  if (Acl.rows() <= detail::kLyapKroneckerMaxDim) {
    const double absc = spectral_abscissa(Acl);
    if (!(absc < 0.0)) {
      throw UnstableError("solve_lyapunov_cont: unstable closed loop (spectral abscissa " +
                              std::to_string(absc) + ")",
                          absc);
    }
    P = detail::lyapunov_kron(Acl, Ws);
  } else {
    const SchurForm schur = real_schur(Acl);
    if (!(schur.abscissa < 0.0)) {
      throw UnstableError("solve_lyapunov_cont: unstable closed loop (spectral abscissa " +
                              std::to_string(schur.abscissa) + ")",
                          schur.abscissa);
    }
    P = detail::lyapunov_schur(schur, Ws);
  }
  P = 0.5 * (P + P.transpose()).eval();

  // Loose guard against silent blow-ups; the tight 1e-10 contract is asserted
  // by the test suite.
  if (relative_residual(Acl, Ws, P) > 1e-8) {
    throw Error(Errc::numerical, "solve_lyapunov_cont: residual check failed (near-singular system)");
  }
  return P;
}

Matrix solve_lyapunov_dual(const Matrix& Acl, const Matrix& W) {
  return solve_lyapunov_cont(Acl.transpose(), W);
}

}  // namespace lqrlr
