#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lqrtd/lqr.hpp"
#include "lqrtd/simulate.hpp"

namespace lqrtd {

struct LstdEstimate {
  Eigen::MatrixXd P_hat;          // symmetric estimate of the value matrix
  Eigen::Index effective_rank = 0;  // rank used by the pseudo-inverse solve
  double min_eig_cov = 0.0;       // lambda_min((1/N) Phi' Phi), clamped at 0
};

/// LSTD value-matrix estimator:
///   w = (sum phi_k (phi_k - g phi_{k+1})')^+ (sum phi_k r_k).
/// Rewards are negative quadratics, so the Bellman solution is -svec(P_pi);
/// the returned P_hat = smat(-w) estimates P_pi directly.
LstdEstimate lstd(std::span<const Transition> data, double gamma, double eta);
LstdEstimate lstd(const Trajectory& traj, double gamma, double eta);

/// LSTD-Q on (x, u, r, x') tuples for the policy u = Kx. Returns the
/// (n+ni) x (n+ni) cost-quadratic matrix, which for consistent data
/// approaches
///   [[Q + g A'PA, g A'PB], [g B'PA, R + g B'PB]].
Eigen::MatrixXd lstdq(std::span<const Transition> data, const Eigen::MatrixXd& K,
                      double gamma, double eta);

enum class CostMode { Discounted, Average };

struct LspiOutcome {
  std::optional<Eigen::MatrixXd> final_gain;  // empty on failure
  int iterations = 0;
  std::vector<Eigen::MatrixXd> gain_history;  // K_0, K_1, ...

  bool failed() const { return !final_gain.has_value(); }
};

/// Policy iteration with LSTD-Q evaluation and K <- -P22^{-1} P12' improvement.
/// The instance is consulted only to score stability (sqrt(gamma)(A+BK) in
/// discounted mode, A+BK in average mode); an unstable iterate marks the run
/// failed, matching the +infinity cost convention.
LspiOutcome lspi(const LqrInstance& inst, std::span<const Transition> data,
                 const Eigen::MatrixXd& K0, double gamma, CostMode mode,
                 double tol = 1e-6, int max_iter = 100);

/// Same loop with a caller-supplied Q-matrix estimator; lspi() passes LSTD-Q,
/// tests can pass the analytic qfunction_matrix to recover exact policy
/// iteration.
LspiOutcome lspi_with_estimator(const LqrInstance& inst,
                                const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& qmat,
                                const Eigen::MatrixXd& K0, double gamma, CostMode mode,
                                double tol = 1e-6, int max_iter = 100);

struct SysIdEstimate {
  Eigen::MatrixXd A_hat;
  Eigen::MatrixXd B_hat;
  Eigen::Index rank = 0;
  bool rank_deficient = false;
};

/// Ordinary least squares of x_{k+1} against [x_k; u_k]; minimum-norm fit
/// with the rank deficiency surfaced in the result.
SysIdEstimate ols_sysid(std::span<const Transition> data);

/// Certainty-equivalent gain: solve the Riccati equation for (A_hat, B_hat)
/// as if exact (gamma in discounted mode, gamma = 1 in average mode).
/// Returns nullopt when the estimated model is not stabilizable.
std::optional<Eigen::MatrixXd> nominal_controller(const Eigen::MatrixXd& A_hat,
                                                  const Eigen::MatrixXd& B_hat,
                                                  const Eigen::MatrixXd& Q,
                                                  const Eigen::MatrixXd& R, double gamma,
                                                  CostMode mode);

/// lambda_min((1/N) Phi' Phi) over a feature list, clamped below at 0.
double empirical_min_eig(const std::vector<SymVec>& features);

}  // namespace lqrtd
