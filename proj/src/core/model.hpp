#pragma once

#include <optional>
#include <vector>

#include "core/linalg.hpp"

namespace lqrlr {

// Continuous-time plant
//   xdot = A x + B1 u + B2 w,   u = -K x,
// with quadratic weights Q (states) and R (inputs). C and D describe an
// output equation; they are carried for completeness but enter no cost.
struct StateSpaceModel {
  Matrix A;   // n x n
  Matrix B1;  // n x m
  Matrix B2;  // n x l
  Matrix Q;   // n x n, symmetric PSD
  Matrix R;   // m x m, symmetric PD
  std::optional<Matrix> C;
  std::optional<Matrix> D;

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B1.cols(); }
  Eigen::Index disturbances() const { return B2.cols(); }

  // Dimension compatibility, finiteness, Q PSD and R PD (to the documented
  // tolerances). Throws Errc::invalid_argument with the offending field.
  void validate() const;

  Matrix closed_loop(const Matrix& K) const { return A - B1 * K; }
};

// Partition of inputs and states into agents. Entry (i, j) of a gain K is
// block-diagonal iff input i and state j belong to the same agent;
// off-block-diagonal entries represent communication between agents.
struct BlockStructure {
  std::vector<int> input_groups;  // size m, agent index per input
  std::vector<int> state_groups;  // size n, agent index per state
  int agent_count = 0;

  void validate(Eigen::Index m, Eigen::Index n) const;

  bool block_diagonal(Eigen::Index input, Eigen::Index state) const {
    return input_groups[static_cast<size_t>(input)] == state_groups[static_cast<size_t>(state)];
  }

  // Zero every off-block-diagonal entry, keep block-diagonal entries verbatim.
  Matrix block_trim(const Matrix& K) const;

  int states_of_agent(int agent) const;
  int inputs_of_agent(int agent) const;

  // Everything belongs to one agent: block_trim becomes the identity map.
  static BlockStructure single_agent(Eigen::Index m, Eigen::Index n);
};

// K in F iff max Re(lambda(A - B1 K)) < -margin (margin 0 by default; a
// positive margin is a scenario-level option, never applied implicitly).
bool is_stabilizing(const StateSpaceModel& model, const Matrix& K, double margin = 0.0);

}  // namespace lqrlr
