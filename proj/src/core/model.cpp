#include "core/model.hpp"

#include <Eigen/Eigenvalues>

#include <string>

namespace lqrlr {

namespace {

void check_dims(const Matrix& M, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (M.rows() != rows || M.cols() != cols) {
    throw Error(Errc::invalid_argument,
                std::string(name) + ": expected " + std::to_string(rows) + "x" +
                    std::to_string(cols) + ", got " + std::to_string(M.rows()) + "x" +
                    std::to_string(M.cols()));
  }
}

void check_symmetric(const Matrix& M, const char* name) {
  if ((M - M.transpose()).norm() > 1e-10 * std::max(1.0, M.norm())) {
    throw Error(Errc::invalid_argument, std::string(name) + ": not symmetric");
  }
}

}  // namespace

void StateSpaceModel::validate() const {
  const Eigen::Index n = states(), m = inputs(), l = disturbances();
  if (n < 1 || m < 1 || l < 1) {
    throw Error(Errc::invalid_argument, "model: n, m, l must all be positive");
  }
  check_dims(A, n, n, "A");
  check_dims(B1, n, m, "B1");
  check_dims(B2, n, l, "B2");
  check_dims(Q, n, n, "Q");
  check_dims(R, m, m, "R");
  require_finite(A, "A");
  require_finite(B1, "B1");
  require_finite(B2, "B2");
  require_finite(Q, "Q");
  require_finite(R, "R");

  check_symmetric(Q, "Q");
  Eigen::SelfAdjointEigenSolver<Matrix> eq(0.5 * (Q + Q.transpose()), Eigen::EigenvaluesOnly);
  if (eq.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, Q.norm())) {
    throw Error(Errc::invalid_argument, "Q: not positive semidefinite");
  }

  check_symmetric(R, "R");
  Eigen::SelfAdjointEigenSolver<Matrix> er(0.5 * (R + R.transpose()), Eigen::EigenvaluesOnly);
  if (!(er.eigenvalues().minCoeff() > 0.0)) {
    throw Error(Errc::invalid_argument, "R: not positive definite");
  }

  if (C) {
    require_finite(*C, "C");
    if (C->cols() != n) {
      throw Error(Errc::invalid_argument, "C: expected " + std::to_string(n) + " columns");
    }
  }
  if (D) {
    require_finite(*D, "D");
    if (!C) throw Error(Errc::invalid_argument, "D given without C");
    if (D->rows() != C->rows() || D->cols() != m) {
      throw Error(Errc::invalid_argument, "D: expected " + std::to_string(C->rows()) + "x" +
                                              std::to_string(m));
    }
  }
}

void BlockStructure::validate(Eigen::Index m, Eigen::Index n) const {
  if (agent_count < 1) {
    throw Error(Errc::invalid_argument, "structure: agent_count must be positive");
  }
  if (static_cast<Eigen::Index>(input_groups.size()) != m) {
    throw Error(Errc::invalid_argument, "structure.input_groups: expected " + std::to_string(m) +
                                            " entries, got " + std::to_string(input_groups.size()));
  }
  if (static_cast<Eigen::Index>(state_groups.size()) != n) {
    throw Error(Errc::invalid_argument, "structure.state_groups: expected " + std::to_string(n) +
                                            " entries, got " + std::to_string(state_groups.size()));
  }
  std::vector<bool> owns(static_cast<size_t>(agent_count), false);
  for (size_t i = 0; i < input_groups.size(); ++i) {
    const int g = input_groups[i];
    if (g < 0 || g >= agent_count) {
      throw Error(Errc::invalid_argument,
                  "structure.input_groups[" + std::to_string(i) + "]: agent index out of range");
    }
    owns[static_cast<size_t>(g)] = true;
  }
  for (size_t j = 0; j < state_groups.size(); ++j) {
    const int g = state_groups[j];
    if (g < 0 || g >= agent_count) {
      throw Error(Errc::invalid_argument,
                  "structure.state_groups[" + std::to_string(j) + "]: agent index out of range");
    }
    owns[static_cast<size_t>(g)] = true;
  }
  for (int a = 0; a < agent_count; ++a) {
    if (!owns[static_cast<size_t>(a)]) {
      throw Error(Errc::invalid_argument,
                  "structure: agent " + std::to_string(a) + " owns no input and no state");
    }
  }
}

Matrix BlockStructure::block_trim(const Matrix& K) const {
  Matrix out = Matrix::Zero(K.rows(), K.cols());
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      if (block_diagonal(i, j)) out(i, j) = K(i, j);
    }
  }
  return out;
}

int BlockStructure::states_of_agent(int agent) const {
  int c = 0;
  for (int g : state_groups)
    if (g == agent) ++c;
  return c;
}

int BlockStructure::inputs_of_agent(int agent) const {
  int c = 0;
  for (int g : input_groups)
    if (g == agent) ++c;
  return c;
}

BlockStructure BlockStructure::single_agent(Eigen::Index m, Eigen::Index n) {
  BlockStructure s;
  s.input_groups.assign(static_cast<size_t>(m), 0);
  s.state_groups.assign(static_cast<size_t>(n), 0);
  s.agent_count = 1;
  return s;
}

bool is_stabilizing(const StateSpaceModel& model, const Matrix& K, double margin) {
  if (K.rows() != model.inputs() || K.cols() != model.states()) {
    throw Error(Errc::invalid_argument,
                "is_stabilizing: K must be " + std::to_string(model.inputs()) + "x" +
                    std::to_string(model.states()) + ", got " + std::to_string(K.rows()) + "x" +
                    std::to_string(K.cols()));
  }
  return spectral_abscissa(model.closed_loop(K)) < -margin;
}

}  // namespace lqrlr
