#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "lqrtd/lqr.hpp"
#include "lqrtd/lyapunov.hpp"
#include "lqrtd/matops.hpp"
#include "lqrtd/simulate.hpp"
#include "test_util.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace lqrtd;

namespace {

LqrInstance five_state(double gamma = 0.9) {
  return LqrInstance{MatrixXd::Identity(5, 5), MatrixXd::Identity(5, 5),
                     0.1 * MatrixXd::Identity(5, 5), 0.1 * MatrixXd::Identity(5, 5), gamma};
}

LqrInstance dean3(double gamma = 0.98) {
  MatrixXd A(3, 3);
  A << 1.01, 0.01, 0, 0.01, 1.01, 0.01, 0, 0.01, 1.01;
  return LqrInstance{A, MatrixXd::Identity(3, 3), 1e-3 * MatrixXd::Identity(3, 3),
                     MatrixXd::Identity(3, 3), gamma};
}

}  // namespace

TEST_CASE("closed loop assembly") {
  const LqrInstance inst = five_state();
  CHECK((closed_loop(inst, LinearPolicy{-0.5 * MatrixXd::Identity(5, 5)}) -
         0.5 * MatrixXd::Identity(5, 5))
            .norm() == 0.0);

  // the diagonal experiment family: K = diag(-(1-rho), ..., -(1-0.01))
  VectorXd k(5);
  k << -0.5, -0.5, -0.5, -0.5, -0.99;
  const MatrixXd L = closed_loop(inst, LinearPolicy{MatrixXd(k.asDiagonal())});
  VectorXd expect(5);
  expect << 0.5, 0.5, 0.5, 0.5, 0.01;
  CHECK((L - MatrixXd(expect.asDiagonal())).norm() <= 1e-15);

  LqrInstance no_input = inst;
  no_input.B = MatrixXd::Zero(5, 5);
  CHECK((closed_loop(no_input, LinearPolicy{MatrixXd::Identity(5, 5)}) - inst.A).norm() == 0.0);

  CHECK_THROWS_AS(closed_loop(inst, LinearPolicy{MatrixXd::Zero(2, 5)}), DimMismatchError);
}

TEST_CASE("value matrix geometric closed form") {
  const double rho = 0.7, gamma = 0.9;
  LqrInstance inst = five_state(gamma);
  inst.A = rho * MatrixXd::Identity(5, 5);
  inst.B = MatrixXd::Zero(5, 5);
  const QuadraticValue v = value_matrix(inst, LinearPolicy{MatrixXd::Zero(5, 5)});
  CHECK((v.P - inst.Q / (1.0 - gamma * rho * rho)).norm() <= 1e-9 * v.P.norm());
  CHECK(v.eta == doctest::Approx(9.0));
}

TEST_CASE("value matrix requires a discounted-stable loop") {
  LqrInstance inst = five_state(0.9);
  // L = 1.2 I: sqrt(0.9) * 1.2 > 1
  CHECK_THROWS_AS(value_matrix(inst, LinearPolicy{0.2 * MatrixXd::Identity(5, 5)}),
                  DiscountedUnstableError);
}

TEST_CASE("value matrix residual oracle") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    LqrInstance inst{testutil::random_stable(4, 0.9, 200 + s), testutil::random_matrix(4, 2, 300 + s),
                     testutil::random_spd(4, 400 + s), testutil::random_spd(2, 500 + s), 0.9};
    const MatrixXd K = -0.1 * testutil::random_matrix(2, 4, 600 + s);
    const MatrixXd L = closed_loop(inst, LinearPolicy{K});
    if (spectral_radius(std::sqrt(inst.gamma) * L) >= 1.0 - 1e-6) {
      continue;
    }
    const QuadraticValue v = value_matrix(inst, LinearPolicy{K});
    const MatrixXd S = inst.Q + K.transpose() * inst.R * K;
    const double res =
        (inst.gamma * L.transpose() * v.P * L - v.P + S).norm();
    CHECK(res <= 1e-9 * S.norm());
  }
}

TEST_CASE("stationary covariance") {
  VectorXd d(4);
  d << 0.1, 0.5, 0.9, 0.01;
  const MatrixXd P = stationary_covariance(MatrixXd(d.asDiagonal()));
  for (int i = 0; i < 4; ++i) {
    CHECK(P(i, i) == doctest::Approx(1.0 / (1.0 - d[i] * d[i])).epsilon(1e-12));
  }

  CHECK((stationary_covariance(MatrixXd::Zero(3, 3)) - MatrixXd::Identity(3, 3)).norm() <= 1e-12);

  for (std::uint64_t s = 0; s < 10; ++s) {
    const MatrixXd L = testutil::random_stable(5, 0.85, 700 + s);
    const MatrixXd Pinf = stationary_covariance(L);
    CHECK(min_eig_sym(Pinf) >= 1.0 - 1e-9);
    // P_inf - I = L P_inf L'
    CHECK((Pinf - MatrixXd::Identity(5, 5) - L * Pinf * L.transpose()).norm() <=
          1e-9 * Pinf.norm());
  }
  CHECK_THROWS_AS(stationary_covariance(MatrixXd::Identity(2, 2)), UnstableError);
}

TEST_CASE("value evaluation") {
  QuadraticValue v{MatrixXd::Identity(2, 2), 9.0};
  CHECK(value_eval(v, VectorXd::Zero(2)) == doctest::Approx(-18.0));
  VectorXd x(2);
  x << 1, 1;
  CHECK(value_eval(v, x) == doctest::Approx(-20.0));

  // invariant to replacing P by its symmetric part
  QuadraticValue w{testutil::random_spd(3, 801), 4.0};
  const MatrixXd g = testutil::random_matrix(3, 3, 802);
  const QuadraticValue w_skewed{w.P + 0.5 * (g - g.transpose()), 4.0};
  const VectorXd y = testutil::random_matrix(3, 1, 803);
  CHECK(value_eval(w, y) == doctest::Approx(value_eval(w_skewed, y)).epsilon(1e-12));

  CHECK_THROWS_AS(value_eval(v, VectorXd::Zero(3)), DimMismatchError);
}

TEST_CASE("qfunction blocks decouple when B = 0") {
  LqrInstance inst = dean3();
  inst.A *= 0.5;  // make sqrt(gamma) A stable
  inst.B = MatrixXd::Zero(3, 3);
  const LinearPolicy pol{MatrixXd::Zero(3, 3)};
  const MatrixXd M = qfunction_matrix(inst, pol);
  const MatrixXd P = value_matrix(inst, pol).P;
  CHECK((M.topLeftCorner(3, 3) - (inst.Q + inst.gamma * inst.A.transpose() * P * inst.A)).norm() <=
        1e-10);
  CHECK(M.topRightCorner(3, 3).norm() <= 1e-12);
  CHECK((M.bottomRightCorner(3, 3) - inst.R).norm() <= 1e-12);
}

TEST_CASE("qfunction scalar hand computation") {
  // a = b = q = r = 1, gamma = 0.5, K = -0.5: P solves
  // 0.5 * 0.25 P - P + (1 + 0.25) = 0  =>  P = 10/7.
  LqrInstance inst{MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1),
                   MatrixXd::Ones(1, 1), 0.5};
  const LinearPolicy pol{-0.5 * MatrixXd::Ones(1, 1)};
  CHECK(value_matrix(inst, pol).P(0, 0) == doctest::Approx(10.0 / 7.0).epsilon(1e-12));
  const MatrixXd M = qfunction_matrix(inst, pol);
  CHECK(M(0, 0) == doctest::Approx(12.0 / 7.0).epsilon(1e-12));
  CHECK(M(0, 1) == doctest::Approx(5.0 / 7.0).epsilon(1e-12));
  CHECK(M(1, 0) == doctest::Approx(5.0 / 7.0).epsilon(1e-12));
  CHECK(M(1, 1) == doctest::Approx(12.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("exact policy iteration reaches the Riccati gain and is monotone") {
  const LqrInstance inst = dean3();
  const DareSolution opt = solve_dare(inst.A, inst.B, inst.Q, inst.R, inst.gamma);

  MatrixXd K = 0.6 * MatrixXd::Identity(3, 3) - inst.A;
  double j_prev = cost_discounted(inst, LinearPolicy{K});
  for (int it = 0; it < 50; ++it) {
    K = improved_gain(qfunction_matrix(inst, LinearPolicy{K}), inst.n());
    const double j = cost_discounted(inst, LinearPolicy{K});
    CHECK(j <= j_prev + 1e-10);
    j_prev = j;
  }
  CHECK((K - opt.K).norm() <= 1e-8);
}

TEST_CASE("discounted cost conventions") {
  LqrInstance inst{MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2),
                   MatrixXd::Identity(2, 2), 0.5};
  CHECK(cost_discounted(inst, LinearPolicy{MatrixXd::Zero(2, 2)}) == doctest::Approx(2.0));

  const LqrInstance dean = dean3();
  CHECK(std::isinf(cost_discounted(dean, LinearPolicy{MatrixXd::Zero(3, 3)})));

  // optimality of the Riccati gain against random stabilizing policies
  const DareSolution opt = solve_dare(dean.A, dean.B, dean.Q, dean.R, dean.gamma);
  const double j_star = cost_discounted(dean, LinearPolicy{opt.K});
  int tested = 0;
  for (std::uint64_t s = 0; tested < 100 && s < 1000; ++s) {
    const double scale = 0.02 * static_cast<double>(s % 5 + 1);
    const MatrixXd K = opt.K + scale * testutil::random_matrix(3, 3, 900 + s);
    const double j = cost_discounted(dean, LinearPolicy{K});
    if (std::isfinite(j)) {
      ++tested;
      CHECK(j >= j_star - 1e-10);
    }
  }
  CHECK(tested == 100);
}

TEST_CASE("average cost conventions") {
  LqrInstance inst{MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2),
                   MatrixXd::Identity(2, 2), 0.5};
  CHECK(cost_average(inst, LinearPolicy{MatrixXd::Zero(2, 2)}) == doctest::Approx(2.0));

  const LqrInstance dean = dean3();
  CHECK(std::isinf(cost_average(dean, LinearPolicy{MatrixXd::Zero(3, 3)})));
}

TEST_CASE("average cost matches the long-run simulated time average") {
  const LqrInstance inst = dean3();
  const MatrixXd K0 = 0.6 * MatrixXd::Identity(3, 3) - inst.A;
  const LinearPolicy pol{K0};
  const double j = cost_average(inst, pol);

  const Trajectory traj = rollout_policy(inst, pol, 1000000, 20240601);
  double acc = 0.0;
  for (const auto& t : traj.transitions) {
    acc += -t.r;  // reward is the negated cost
  }
  acc /= static_cast<double>(traj.transitions.size());
  CHECK(acc == doctest::Approx(j).epsilon(0.01));
}

TEST_CASE("Bellman residual on random states") {
  const LqrInstance inst = five_state();
  const LinearPolicy pol{-0.5 * MatrixXd::Identity(5, 5)};
  const MatrixXd L = closed_loop(inst, pol);
  const QuadraticValue v = value_matrix(inst, pol);
  lqrtd::GaussianStream g(424242);
  for (int i = 0; i < 100; ++i) {
    const VectorXd x = g.vec(5);
    const VectorXd lx = L * x;
    // E[V(x')] = -(Lx)'P(Lx) - Tr(P) - eta Tr(P)
    const double ev_next = -lx.dot(v.P * lx) - (1.0 + v.eta) * v.P.trace();
    const double lhs = value_eval(v, x);
    const double rhs = inst.reward(x, pol.K * x) + inst.gamma * ev_next;
    CHECK(std::abs(lhs - rhs) <= 1e-8);
  }
}
