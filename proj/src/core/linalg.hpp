#pragma once

#include <Eigen/Dense>

#include "core/errors.hpp"

namespace lqrlr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Throws Errc::invalid_argument naming `name` and the first offending entry.
void require_finite(const Matrix& M, const char* name);

// max over eigenvalues of Re(lambda(M)); M square with finite entries.
double spectral_abscissa(const Matrix& M);

Matrix kron(const Matrix& A, const Matrix& B);
Vector vec(const Matrix& M);  // column-stacking
Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols);

struct Svd {
  Matrix U;      // m x k, orthonormal columns
  Vector sigma;  // k, non-negative, descending
  Matrix V;      // n x k, orthonormal columns
};

// Thin SVD, M = U * diag(sigma) * V^T.
Svd svd(const Matrix& M);

// Real Schur decomposition A = U T U^T with the spectral abscissa read off
// the quasi-triangular diagonal. Shared by the Lyapunov and cost paths so a
// single factorization serves P, L and the stability check.
struct SchurForm {
  Matrix T;
  Matrix U;
  double abscissa;
};
SchurForm real_schur(const Matrix& A);

// Solve Acl^T P + P Acl + W = 0 for stable Acl and symmetric W.
// P is symmetrized on return. Throws UnstableError when Acl is not stable.
Matrix solve_lyapunov_cont(const Matrix& Acl, const Matrix& W);

// Solve Acl L + L Acl^T + W = 0; equals solve_lyapunov_cont(Acl^T, W).
Matrix solve_lyapunov_dual(const Matrix& Acl, const Matrix& W);

namespace detail {

// Dimension at or below which the dense Kronecker route is used in production.
inline constexpr Eigen::Index kLyapKroneckerMaxDim = 8;

// The two routes behind solve_lyapunov_cont; both satisfy the same residual
// contract and are cross-checked in tests. No stability check here.
Matrix lyapunov_kron(const Matrix& Acl, const Matrix& W);
Matrix lyapunov_schur(const SchurForm& schur, const Matrix& W);

// Solve T Y + Y T^T + C = 0 for quasi-upper-triangular T (used for the dual
// equation Acl L + L Acl^T + W = 0 after rotating into the Schur basis).
Matrix quasi_triangular_lyap_dual(const Matrix& T, const Matrix& C);

}  // namespace detail

}  // namespace lqrlr
