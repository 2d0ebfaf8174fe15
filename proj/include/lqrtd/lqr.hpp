#pragma once

#include <Eigen/Dense>

#include "lqrtd/errors.hpp"

namespace lqrtd {

// Closed loops with spectral radius above 1 - kStabilityMargin are treated as
// unstable; marginally stable loops make the Lyapunov solves ill-conditioned.
inline constexpr double kStabilityMargin = 1e-9;

/// X_{k+1} = A X_k + B U_k + W_k with W_k ~ N(0, I) and rewards
/// r(x, u) = -(x'Qx + u'Ru).
struct LqrInstance {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  double gamma = 0.0;

  int n() const { return static_cast<int>(A.rows()); }
  int n_inputs() const { return static_cast<int>(B.cols()); }

  double reward(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    return -(x.dot(Q * x) + u.dot(R * u));
  }

  // Checks dimensions, symmetry/positive-definiteness of Q and R, and
  // gamma in (0, 1]. Throws on violation.
  void validate() const;
};

struct LinearPolicy {
  Eigen::MatrixXd K;  // u = K x
};

/// V(x) = -x' P x - eta * Tr(P) with eta = gamma / (1 - gamma).
struct QuadraticValue {
  Eigen::MatrixXd P;
  double eta = 0.0;
};

Eigen::MatrixXd closed_loop(const LqrInstance& inst, const LinearPolicy& pol);

/// P_pi from (sqrt(g)L)' P (sqrt(g)L) - P + (Q + K'RK) = 0; requires
/// sqrt(gamma) * (A + BK) stable and gamma < 1.
QuadraticValue value_matrix(const LqrInstance& inst, const LinearPolicy& pol);

/// P_inf from L P L' - P + I = 0 (so P_inf >= I).
Eigen::MatrixXd stationary_covariance(const Eigen::MatrixXd& L);

double value_eval(const QuadraticValue& v, const Eigen::VectorXd& x);

/// One-step Q-function matrix for the policy:
///   [[Q + g A'P A,  g A'P B ],
///    [g B'P A,      R + g B'P B]]
/// with P the value matrix of the policy. The induced improvement
/// K' = -P22^{-1} P12' is the exact policy-iteration update.
Eigen::MatrixXd qfunction_matrix(const LqrInstance& inst, const LinearPolicy& pol);

/// K' = -P22^{-1} P12' for an (n+ni) x (n+ni) Q-function matrix.
Eigen::MatrixXd improved_gain(const Eigen::MatrixXd& qmat, int n);

/// J(K) = gamma/(1-gamma) * Tr(P_K): the expected discounted cost from
/// x0 = 0 under unit process noise. Returns +infinity when sqrt(gamma) *
/// (A + BK) is not stable (the experiment scoring convention).
double cost_discounted(const LqrInstance& inst, const LinearPolicy& pol);

/// J(K) = Tr((Q + K'RK) P_inf(A + BK)); +infinity when A + BK is unstable.
double cost_average(const LqrInstance& inst, const LinearPolicy& pol);

}  // namespace lqrtd
