#pragma once

#include <utility>
#include <vector>

#include "core/linalg.hpp"

namespace lqrlr {

enum class Termination { converged, max_iter, infeasible };

inline const char* termination_name(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iter: return "max_iter";
    case Termination::infeasible: return "infeasible";
  }
  return "unknown";
}

// Outcome of a gain synthesis. For structured (ADMM) designs the deliverable
// gain is K_diag + K_low and J is its LQR cost; K is the last smooth iterate.
struct DesignResult {
  Matrix K;
  Matrix K_diag;
  Matrix K_low;
  Matrix dual;  // Lambda
  double J = 0.0;
  double J_stand = 0.0;
  int iterations = 0;
  std::vector<std::pair<double, double>> residual_history;  // (primal, dual) norms
  Termination termination = Termination::converged;
  int inner_cap_hits = 0;  // Anderson-Moore runs that exhausted max_inner

  Matrix structured_gain() const { return K_diag + K_low; }
};

}  // namespace lqrlr
