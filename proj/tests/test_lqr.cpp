#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "core/lqr.hpp"
#include "core/rng.hpp"

using namespace lqrlr;

namespace {

StateSpaceModel scalar_model(double a, double b1 = 1, double b2 = 1, double q = 1, double r = 1) {
  StateSpaceModel m;
  m.A = Matrix::Constant(1, 1, a);
  m.B1 = Matrix::Constant(1, 1, b1);
  m.B2 = Matrix::Constant(1, 1, b2);
  m.Q = Matrix::Constant(1, 1, q);
  m.R = Matrix::Constant(1, 1, r);
  return m;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  Matrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = rng.uniform(-scale, scale);
  return M;
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

// A stabilizing gain in the vicinity of (but not at) the optimum.
Matrix random_stabilizing_gain(const StateSpaceModel& model, Rng& rng) {
  const Matrix K_opt = solve_care(model).K;
  for (int attempt = 0; attempt < 50; ++attempt) {
    Matrix K = K_opt + random_matrix(K_opt.rows(), K_opt.cols(), rng, 0.15);
    if (is_stabilizing(model, K)) return K;
  }
  return K_opt;
}

Matrix fd_gradient(const StateSpaceModel& model, const Matrix& K, double h = 1e-6) {
  Matrix G(K.rows(), K.cols());
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      Matrix Kp = K, Km = K;
      Kp(i, j) += h;
      Km(i, j) -= h;
      G(i, j) = (lqr_cost(model, Kp).J - lqr_cost(model, Km).J) / (2.0 * h);
    }
  }
  return G;
}

}  // namespace

TEST_CASE("scalar cost oracle") {
  const auto model = scalar_model(1);
  const auto eval = lqr_cost(model, Matrix::Constant(1, 1, 2.0));
  CHECK(eval.J == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(eval.P(0, 0) == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(eval.L(0, 0) == doctest::Approx(0.5).epsilon(1e-10));

  const double k_opt = 1.0 + std::sqrt(2.0);
  CHECK(lqr_cost(model, Matrix::Constant(1, 1, k_opt)).J ==
        doctest::Approx(k_opt).epsilon(1e-10));
}

TEST_CASE("unstable gain raises an error carrying the abscissa") {
  const auto model = scalar_model(1);
  try {
    lqr_cost(model, Matrix::Constant(1, 1, 0.5));
    FAIL("expected UnstableError");
  } catch (const UnstableError& e) {
    CHECK(e.abscissa() == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("scalar gradient oracle") {
  const auto model = scalar_model(1);
  CHECK(lqr_gradient(model, Matrix::Constant(1, 1, 2.0))(0, 0) ==
        doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(std::abs(lqr_gradient(model, Matrix::Constant(1, 1, 1.0 + std::sqrt(2.0)))(0, 0)) <=
        1e-10);
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(101);
  int tested = 0, attempts = 0;
  while (tested < 20 && attempts < 400) {
    ++attempts;
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(7));  // 2..8
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.below(static_cast<uint64_t>(n)));
    const auto model = random_model(n, m, rng);
    Matrix K = random_stabilizing_gain(model, rng);
    // keep away from the stability boundary, where the cost blows up and the
    // finite-difference oracle loses its own accuracy
    if (!(spectral_abscissa(model.closed_loop(K)) < -0.15)) continue;
    if (lqr_cost(model, K).J > 60.0) continue;
    Matrix Gfd = fd_gradient(model, K);
    // components inside the central-difference noise band (eps * J / h) can't
    // be measured to 1e-5 relative by the oracle itself; skip such instances
    bool measurable = true;
    for (Eigen::Index i = 0; i < Gfd.size(); ++i) {
      const double a = std::abs(Gfd(i / Gfd.cols(), i % Gfd.cols()));
      if (a > 1e-8 && a < 1e-2) measurable = false;
    }
    if (!measurable) continue;
    Matrix G = lqr_gradient(model, K);
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
      for (Eigen::Index j = 0; j < G.cols(); ++j) {
        if (std::abs(Gfd(i, j)) > 1e-8) {
          CHECK(std::abs(G(i, j) - Gfd(i, j)) <= 1e-5 * std::abs(Gfd(i, j)));
        }
      }
    }
    ++tested;
  }
  CHECK(tested == 20);
}

TEST_CASE("standard LQR scalar oracles") {
  const auto res = solve_standard_lqr(scalar_model(1));
  const double k_opt = 1.0 + std::sqrt(2.0);
  CHECK(res.K(0, 0) == doctest::Approx(k_opt).epsilon(1e-8));
  CHECK(res.J == doctest::Approx(k_opt).epsilon(1e-8));
  CHECK(res.J_stand == res.J);
  CHECK(res.termination == Termination::converged);
  CHECK(res.K_low.norm() == 0.0);
  CHECK((res.K - res.K_diag - res.K_low).norm() == 0.0);

  const auto res0 = solve_standard_lqr(scalar_model(0));
  CHECK(res0.K(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(res0.J == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("standard LQR fails cleanly on a non-stabilizable model") {
  auto model = scalar_model(1, /*b1=*/0);
  try {
    solve_standard_lqr(model);
    FAIL("expected non-stabilizable error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_stabilizable);
  }
}

TEST_CASE("optimum beats random stabilizing perturbations") {
  Rng rng(202);
  const auto model = random_model(4, 2, rng);
  const auto res = solve_standard_lqr(model);
  int tried = 0;
  while (tried < 100) {
    Matrix K = res.K + random_matrix(2, 4, rng, 0.08);
    if (!is_stabilizing(model, K)) continue;
    CHECK(lqr_cost(model, K).J >= res.J - 1e-9 * res.J);
    ++tried;
  }
}

TEST_CASE("gradient vanishes at the Riccati optimum") {
  Rng rng(303);
  for (int rep = 0; rep < 5; ++rep) {
    const auto model = random_model(5, 2, rng);
    const auto res = solve_standard_lqr(model);
    CHECK(lqr_gradient(model, res.K).norm() <= 1e-6 * (1.0 + res.K.norm()));
  }
}

TEST_CASE("cost eval P agrees with the Riccati solution at the optimum") {
  Rng rng(404);
  const auto model = random_model(6, 3, rng);
  const auto care = solve_care(model);
  const auto eval = lqr_cost(model, care.K);
  CHECK((eval.P - care.P).norm() <= 1e-8 * std::max(1.0, care.P.norm()));
}

TEST_CASE("cost is invariant under consistent agent permutation") {
  Rng rng(505);
  const Eigen::Index n = 6, m = 3;
  const auto model = random_model(n, m, rng);
  Matrix K = random_stabilizing_gain(model, rng);
  const double J = lqr_cost(model, K).J;

  Eigen::PermutationMatrix<Eigen::Dynamic> Ps(n), Pin(m);
  Ps.setIdentity();
  Pin.setIdentity();
  for (Eigen::Index i = n - 1; i > 0; --i) {
    std::swap(Ps.indices()(i), Ps.indices()(static_cast<Eigen::Index>(rng.below(i + 1))));
  }
  for (Eigen::Index i = m - 1; i > 0; --i) {
    std::swap(Pin.indices()(i), Pin.indices()(static_cast<Eigen::Index>(rng.below(i + 1))));
  }
  StateSpaceModel perm;
  perm.A = Ps.transpose() * model.A * Ps;
  perm.B1 = Ps.transpose() * model.B1 * Pin;
  perm.B2 = Ps.transpose() * model.B2;
  perm.Q = Ps.transpose() * model.Q * Ps;
  perm.R = Pin.transpose() * model.R * Pin;
  Matrix Kp = Pin.transpose() * K * Ps;
  CHECK(lqr_cost(perm, Kp).J == doctest::Approx(J).epsilon(1e-10));
}
