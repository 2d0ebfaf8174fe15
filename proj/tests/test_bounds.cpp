#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "lqrtd/bounds.hpp"
#include "lqrtd/experiments.hpp"
#include "lqrtd/lqr.hpp"
#include "lqrtd/lyapunov.hpp"
#include "lqrtd/matops.hpp"
#include "lqrtd/simulate.hpp"
#include "test_util.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace lqrtd;

namespace {

// Test-side re-evaluation of the covariance sample-size inequality, kept
// independent of the search in the library.
bool covariance_requirement_holds(std::int64_t N, double tau, double q, double beta_coeff,
                                  double rho, double delta, double second_moment) {
  const double t = std::log(2.0 * beta_coeff * static_cast<double>(N) / delta);
  if (t <= 0.0) return false;
  const double inner =
      std::max(1024.0 * second_moment / (tau * tau * q * q),
               32.0 / (q * q) * std::log(4.0 / (delta * (1.0 - rho)) * t));
  return static_cast<double>(N) >= 1.0 / (1.0 - rho) * t * (inner + 1.0);
}

bool contractive_requirement_holds(std::int64_t N, double ell, double L_up, double B, int n,
                                   double beta_coeff, double rho, double delta) {
  const double t = std::log(2.0 * beta_coeff * static_cast<double>(N) / delta);
  if (t <= 0.0) return false;
  const double inner = std::max(65536.0 * std::pow(B, 6) * (L_up / ell) * n,
                                512.0 * std::pow(B, 4) *
                                    std::log(4.0 / (delta * (1.0 - rho)) * t));
  return static_cast<double>(N) >= 1.0 / (1.0 - rho) * t * (inner + 1.0);
}

bool lstd_requirement_holds(std::int64_t N, double gamma_tilde, double delta, double rhs) {
  const double t = std::log(gamma_tilde * static_cast<double>(N) / delta);
  if (t <= 1.0) return false;
  return static_cast<double>(N) / (t * std::log(t)) >= rhs;
}

// Exact total-variation distance between N(0, var1) and N(0, var2) in 1-D.
double gaussian_tv_1d(double var1, double var2) {
  if (var1 > var2) std::swap(var1, var2);
  if (var2 - var1 <= 1e-14 * var2) return 0.0;
  const double s1 = std::sqrt(var1);
  const double s2 = std::sqrt(var2);
  const double xstar = std::sqrt(2.0 * var1 * var2 * std::log(s2 / s1) / (var2 - var1));
  const auto normal_cdf = [](double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); };
  return 2.0 * (normal_cdf(xstar / s1) - normal_cdf(xstar / s2));
}

}  // namespace

TEST_CASE("beta mixing bound hand evaluations") {
  // scalar L = 0.5 at rate 0.75: resolvent norm 3, P_inf = 4/3
  const MixingBound mb = beta_mixing_bound(0.5 * MatrixXd::Ones(1, 1), 0.75);
  const double expect = 1.5 * std::sqrt(4.0 / 3.0 + 1.0 / (1.0 - 0.75 * 0.75));
  CHECK(mb.beta_coeff() == doctest::Approx(expect).epsilon(1e-12));
  CHECK(mb.beta_coeff() == doctest::Approx(2.8536).epsilon(1e-3));
  CHECK(mb.rate == 0.75);
  CHECK(mb.n == 1);

  // L = 0: resolvent norm 1, P_inf = I
  const MixingBound zero = beta_mixing_bound(MatrixXd::Zero(3, 3), 0.5);
  CHECK(zero.beta_coeff() ==
        doctest::Approx(0.5 * std::sqrt(3.0 + 3.0 / (1.0 - 0.25))).epsilon(1e-12));

  CHECK_THROWS_AS(beta_mixing_bound(0.9 * MatrixXd::Identity(2, 2), 0.8), RateTooSmallError);
}

TEST_CASE("small ball constants for the feature map") {
  const SmallBall iso = small_ball_lqr(MatrixXd::Identity(3, 3));
  CHECK(iso.tau == doctest::Approx(1.0));
  CHECK(iso.q == doctest::Approx(1.0 / 324.0));

  MatrixXd d(2, 2);
  d.setZero();
  d.diagonal() << 4.0, 9.0;
  CHECK(small_ball_lqr(d).tau == doctest::Approx(4.0));

  CHECK_THROWS_AS(small_ball_lqr(-MatrixXd::Identity(2, 2)), NotPdError);
}

TEST_CASE("small ball probability validated by Monte Carlo") {
  // P_inf = I, n = 2: the worst direction still clears the 1/324 floor by a
  // wide margin. 10^6 stationary draws, 50 random unit directions.
  const double tau = 1.0;
  GaussianStream g(8601);
  const int n_draws = 1000000;
  Eigen::MatrixXd phis(3, n_draws);
  for (int i = 0; i < n_draws; ++i) {
    phis.col(i) = feature_phi(g.vec(2), 0.0).entries;
  }
  double worst = 1.0;
  for (int dir = 0; dir < 50; ++dir) {
    const VectorXd v = g.vec(3).normalized();
    int hits = 0;
    for (int i = 0; i < n_draws; ++i) {
      hits += std::abs(v.dot(phis.col(i))) >= tau ? 1 : 0;
    }
    worst = std::min(worst, static_cast<double>(hits) / n_draws);
  }
  CHECK(worst >= 1.0 / 324.0);
}

TEST_CASE("feature second moment closed form") {
  CHECK(feature_second_moment(MatrixXd::Identity(2, 2), 0.0, 2) == doctest::Approx(8.0));
  // isotropic case equals E||X||^4 = n (n + 2)
  for (int n = 1; n <= 6; ++n) {
    CHECK(feature_second_moment(MatrixXd::Identity(n, n), 0.0, n) ==
          doctest::Approx(static_cast<double>(n) * (n + 2)));
  }

  // Monte Carlo agreement for a random positive-definite stationary covariance
  const MatrixXd P = testutil::random_spd(3, 8701);
  const double eta = 4.0;
  const double closed = feature_second_moment(P, eta, 3);
  const Eigen::LLT<MatrixXd> chol(P);
  GaussianStream g(8702);
  double acc = 0.0;
  const int n_draws = 1000000;
  for (int i = 0; i < n_draws; ++i) {
    const VectorXd x = chol.matrixL() * g.vec(3);
    const double x2 = x.squaredNorm();
    acc += x2 * x2 + 2.0 * eta * x2 + eta * eta * 3.0;
  }
  CHECK(acc / n_draws == doctest::Approx(closed).epsilon(0.01));
}

TEST_CASE("covariance sample-size requirement: minimality and monotonicity") {
  // beta_coeff 2 is stored as gamma_tilde 4
  const MixingBound mix{4.0, 0.5, 2};
  const SmallBall sb{1.0, 1.0 / 324.0};
  const std::int64_t N = required_trajectory_length(sb, 8.0, mix, 0.1);
  CHECK(N == 48669094196LL);
  CHECK(covariance_requirement_holds(N, sb.tau, sb.q, 2.0, 0.5, 0.1, 8.0));
  CHECK(!covariance_requirement_holds(N - 1, sb.tau, sb.q, 2.0, 0.5, 0.1, 8.0));

  // nonincreasing in the small-ball probability
  std::int64_t prev = -1;
  for (double q : {0.01, 0.1, 0.5}) {
    const std::int64_t nq = required_trajectory_length({1.0, q}, 8.0, mix, 0.1);
    CHECK(covariance_requirement_holds(nq, 1.0, q, 2.0, 0.5, 0.1, 8.0));
    CHECK(!covariance_requirement_holds(nq - 1, 1.0, q, 2.0, 0.5, 0.1, 8.0));
    if (prev > 0) CHECK(nq <= prev);
    prev = nq;
  }
  CHECK(required_trajectory_length({1.0, 0.01}, 8.0, mix, 0.1) == 4236216934LL);
  CHECK(required_trajectory_length({1.0, 0.5}, 8.0, mix, 0.1) == 1156746LL);

  // nondecreasing in the mixing rate
  prev = -1;
  for (double rho : {0.1, 0.5, 0.9}) {
    const MixingBound m{4.0, rho, 2};
    const std::int64_t nr = required_trajectory_length(sb, 8.0, m, 0.1);
    if (prev > 0) CHECK(nr >= prev);
    prev = nr;
  }
  CHECK(required_trajectory_length(sb, 8.0, MixingBound{4.0, 0.9, 2}, 0.1) == 257678199693LL);

  // the cap turns an astronomically large requirement into an error
  CHECK_THROWS_AS(required_trajectory_length({1e-8, 1e-4}, 1e6, mix, 1e-3, 1000000),
                  NoSolutionError);
}

TEST_CASE("contractive sample-size requirement") {
  const double delta = 0.1;
  std::int64_t prev = -1;
  const std::int64_t frozen[] = {5011201LL, 10405436LL, 21575487LL, 44677475LL};
  int idx = 0;
  for (int n : {2, 4, 8, 16}) {
    const MixingBound mix{4.0, 0.5, n};  // beta_coeff 2
    const ContractiveRequirement req =
        required_trajectory_length_contractive(1.0, 1.0, 1.0, mix, delta);
    CHECK(req.N == frozen[idx++]);
    CHECK(contractive_requirement_holds(req.N, 1.0, 1.0, 1.0, n, 2.0, 0.5, delta));
    CHECK(!contractive_requirement_holds(req.N - 1, 1.0, 1.0, 1.0, n, 2.0, 0.5, delta));
    CHECK(req.eig_floor == doctest::Approx(1.0 / 128.0));
    if (prev > 0) {
      const double ratio = static_cast<double>(req.N) / static_cast<double>(prev);
      CHECK(ratio == doctest::Approx(2.0).epsilon(0.10));  // linear in n up to log factors
    }
    prev = req.N;
  }
  CHECK_THROWS_AS(
      required_trajectory_length_contractive(0.0, 1.0, 1.0, MixingBound{4.0, 0.5, 2}, 0.1),
      ConfigError);
}

TEST_CASE("value-estimation sample requirement on the diagonal family") {
  const LqrInstance inst = diag_family_instance();
  const LinearPolicy pol = diag_family_policy(0.5);
  const MatrixXd L = closed_loop(inst, pol);
  const MatrixXd p_inf = stationary_covariance(L);
  const MixingBound mix = beta_mixing_bound(L, default_decay_rate(L));
  const double eta = 9.0;

  const std::int64_t N = lstd_requirement_lqr(p_inf, eta, mix, 0.1);
  CHECK(N == 71999LL);
  const double rhs = std::max(std::pow(p_inf.trace(), 2), eta * eta * 5.0) /
                     ((1.0 - mix.rate) * std::pow(min_eig_sym(p_inf), 2));
  CHECK(lstd_requirement_holds(N, mix.gamma_tilde, 0.1, rhs));
  CHECK(!lstd_requirement_holds(N - 1, mix.gamma_tilde, 0.1, rhs));

  // doubling the trace at fixed smallest eigenvalue roughly quadruples N
  MatrixXd p1 = MatrixXd::Identity(2, 2);
  p1(0, 0) = 100.0;
  MatrixXd p2 = MatrixXd::Identity(2, 2);
  p2(0, 0) = 201.0;  // doubles the trace, keeps lambda_min = 1
  const MixingBound m2{4.0, 0.5, 2};
  const double ratio = static_cast<double>(lstd_requirement_lqr(p2, 0.0, m2, 0.1)) /
                       static_cast<double>(lstd_requirement_lqr(p1, 0.0, m2, 0.1));
  CHECK(ratio >= 3.0);
  CHECK(ratio <= 5.0);

  // smaller delta cannot shrink the requirement
  CHECK(lstd_requirement_lqr(p_inf, eta, mix, 0.01) > N);
}

TEST_CASE("error predictor scalings") {
  const MatrixXd p = testutil::random_spd(4, 8801);
  const double eta = 9.0;
  CHECK(lstd_error_prediction(p, eta, 1000, 4) ==
        doctest::Approx(2.0 * lstd_error_prediction(p, eta, 4000, 4)).epsilon(1e-12));

  // the badly conditioned diagonal family predicts larger errors
  const LqrInstance inst = diag_family_instance();
  const auto pred_at = [&](double rho) {
    const MatrixXd p_inf = stationary_covariance(closed_loop(inst, diag_family_policy(rho)));
    return lstd_error_prediction(p_inf, eta, 1000, 5);
  };
  CHECK(pred_at(0.9) > pred_at(0.5));
  CHECK(pred_at(0.5) > pred_at(0.1));

  // growth with the state dimension on isotropic covariances
  CHECK(lstd_error_prediction(MatrixXd::Identity(6, 6), eta, 1000, 6) >
        lstd_error_prediction(MatrixXd::Identity(2, 2), eta, 1000, 2));
}

TEST_CASE("condition number") {
  CHECK(condition_number(MatrixXd::Identity(4, 4)) == doctest::Approx(1.0));

  const LqrInstance inst = diag_family_instance();
  const MatrixXd p_inf = stationary_covariance(closed_loop(inst, diag_family_policy(0.9)));
  CHECK(condition_number(p_inf) ==
        doctest::Approx((1.0 - 0.01 * 0.01) / (1.0 - 0.81)).epsilon(1e-10));

  const MatrixXd p = testutil::random_spd(3, 8901);
  CHECK(condition_number(3.7 * p) == doctest::Approx(condition_number(p)).epsilon(1e-12));

  CHECK_THROWS_AS(condition_number(MatrixXd::Zero(2, 2)), NotPdError);
}

TEST_CASE("marginal-vs-stationary total variation sits under the mixing bound") {
  // scalar L = 0.5: the 1-D marginals are N(0, P_k), so the total-variation
  // distance to N(0, P_inf) is computable in closed form and must sit below
  // the certified envelope beta_coeff * rho^k.
  const MatrixXd L = 0.5 * MatrixXd::Ones(1, 1);
  const MixingBound mb = beta_mixing_bound(L, 0.75);
  const double p_inf = stationary_covariance(L)(0, 0);
  CHECK(p_inf == doctest::Approx(4.0 / 3.0));

  const double tv1 = gaussian_tv_1d(finite_gramian(L, 1)(0, 0), p_inf);
  CHECK(tv1 == doctest::Approx(0.0693).epsilon(0.02));  // sanity pin for the formula

  for (int k = 1; k <= 30; ++k) {
    const double var_k = finite_gramian(L, k)(0, 0);
    const double tv = gaussian_tv_1d(var_k, p_inf);
    CHECK(tv <= mb.beta_coeff() * std::pow(mb.rate, k));
  }
}

TEST_CASE("empirical eigenvalue floor at the required trajectory length") {
  // At the sample size the requirement prescribes (explicit constant 1), the
  // scaled feature gramian should clear tau^2 q / 8 in nearly every trial.
  const LqrInstance inst = diag_family_instance();
  const double eta = 9.0;
  for (double rho : {0.1, 0.5, 0.9}) {
    const LinearPolicy pol = diag_family_policy(rho);
    const MatrixXd L = closed_loop(inst, pol);
    const MatrixXd p_inf = stationary_covariance(L);
    const MixingBound mix = beta_mixing_bound(L, default_decay_rate(L));
    const std::int64_t N = lstd_requirement_lqr(p_inf, eta, mix, 0.1);
    const SmallBall sb = small_ball_lqr(p_inf);
    const double floor = sb.tau * sb.tau * sb.q / 8.0;

    int cleared = 0;
    for (int trial = 0; trial < 20; ++trial) {
      GaussianStream noise(derive_seed(9000 + static_cast<int>(rho * 10), trial));
      VectorXd x = noise.vec(5);  // x_1 = W_0 from the all-zero start
      MatrixXd gram = MatrixXd::Zero(15, 15);
      VectorXd f(15);
      for (std::int64_t k = 0; k < N; ++k) {
        // svec(x x' + eta I) unrolled to keep the long accumulation cheap
        int idx = 0;
        for (int i = 0; i < 5; ++i) {
          f[idx++] = x[i] * x[i] + eta;
          for (int j = i + 1; j < 5; ++j) {
            f[idx++] = std::sqrt(2.0) * x[i] * x[j];
          }
        }
        gram.selfadjointView<Eigen::Lower>().rankUpdate(f);
        x = L.diagonal().cwiseProduct(x) + noise.vec(5);
      }
      gram = MatrixXd(gram.selfadjointView<Eigen::Lower>());
      if (min_eig_sym(gram / static_cast<double>(N)) >= floor) {
        ++cleared;
      }
    }
    CHECK(cleared >= 18);  // 90% of 20 trials
  }
}
