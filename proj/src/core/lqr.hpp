#pragma once

#include <optional>

#include "core/design.hpp"
#include "core/model.hpp"

namespace lqrlr {

// Cost of a fixed stabilizing gain together with the two Lyapunov solutions
// behind it: Acl^T P + P Acl + Q + K^T R K = 0 and Acl L + L Acl^T + B2 B2^T = 0,
// J = tr(B2^T P B2).
struct CostEval {
  double J = 0.0;
  Matrix P;
  Matrix L;
};

// Throws UnstableError (carrying the abscissa) when K is not in F.
CostEval lqr_cost(const StateSpaceModel& model, const Matrix& K);

// Non-throwing variant for hot loops (line searches): nullopt when K is not
// stabilizing.
std::optional<CostEval> try_lqr_cost(const StateSpaceModel& model, const Matrix& K);

// dJ/dK = 2 (R K - B1^T P) L, with P and L as in CostEval.
Matrix lqr_gradient(const StateSpaceModel& model, const Matrix& K);
Matrix lqr_gradient(const StateSpaceModel& model, const Matrix& K, const CostEval& eval);

// Stabilizing solution of A^T P + P A - P B1 R^-1 B1^T P + Q = 0, extracted
// from the stable invariant subspace of the 2n x 2n Hamiltonian, and the
// optimal unstructured gain K = R^-1 B1^T P.
struct CareSolution {
  Matrix P;
  Matrix K;
};
CareSolution solve_care(const StateSpaceModel& model);

// Unstructured (gamma = 0) optimum packaged as a DesignResult: K_diag = K,
// K_low = 0, J = J_stand.
DesignResult solve_standard_lqr(const StateSpaceModel& model);

}  // namespace lqrlr
