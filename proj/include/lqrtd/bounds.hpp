#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lqrtd/errors.hpp"

namespace lqrtd {

/// Mixing certificate for a stable closed loop L:
///   gamma_tilde = ||Phi_{rho^{-1} L}||_Hinf * sqrt(Tr(P_inf) + n/(1-rho^2)),
/// the constant appearing in the sample-size requirement. The beta-mixing
/// coefficient itself is bounded by half of it: beta(k) <= (gamma_tilde/2) rho^k.
struct MixingBound {
  double gamma_tilde = 0.0;
  double rate = 0.0;
  int n = 0;

  double beta_coeff() const { return 0.5 * gamma_tilde; }
};

/// Small-ball pair: inf over unit directions of P{ |<v, phi(X)>| >= tau } >= q.
struct SmallBall {
  double tau = 0.0;
  double q = 0.0;
};

struct BoundReport {
  MixingBound mixing;
  SmallBall smallball;
  double second_moment = 0.0;      // E ||phi(X)||^2 under the stationary law
  std::int64_t required_N = 0;     // sample-size requirement (see note field)
  double predicted_rel_error = 0.0;  // error predictor evaluated at required_N
  double delta = 0.0;
  double kappa = 0.0;              // condition number of P_inf
  std::string note;                // which formulas / constants produced this
};

inline constexpr std::int64_t kRequiredNCap = 1'000'000'000'000LL;  // 1e12

/// Plug-in beta-mixing bound for the LTI system driven by unit Gaussian
/// noise. Requires rho in (spectral_radius(L), 1).
MixingBound beta_mixing_bound(const Eigen::MatrixXd& L, double rho, int grid = 4096);

/// LQR feature small ball: tau = lambda_min(P_inf), q = 1/324.
SmallBall small_ball_lqr(const Eigen::MatrixXd& P_inf);

/// E ||phi(X)||^2 = 2 ||P_inf||_F^2 + Tr(P_inf)^2 + 2 eta Tr(P_inf) + eta^2 n.
double feature_second_moment(const Eigen::MatrixXd& P_inf, double eta, int n);

/// Smallest integer N satisfying the self-referential covariance requirement
///   N >= (1/(1-rho)) log(2 Gamma N / delta) *
///        (max{1024 E||X||^2 / (tau^2 q^2),
///             (32/q^2) log((4/(delta(1-rho))) log(2 Gamma N / delta))} + 1),
/// with Gamma = mixing.beta_coeff(). Throws NoSolutionError above the cap.
std::int64_t required_trajectory_length(const SmallBall& sb, double second_moment,
                                        const MixingBound& mixing, double delta,
                                        std::int64_t cap = kRequiredNCap);

struct ContractiveRequirement {
  std::int64_t N = 0;
  double eig_floor = 0.0;  // guaranteed lambda_min floor ell / (128 B^4)
};

/// Moment-contractive variant: max{65536 B^6 (L/ell) n, 512 B^4 log(...)}.
ContractiveRequirement required_trajectory_length_contractive(double ell, double L_upper,
                                                              double B_ratio,
                                                              const MixingBound& mixing,
                                                              double delta,
                                                              std::int64_t cap = kRequiredNCap);

/// Smallest N with N / (log(gt N/delta) loglog(gt N/delta)) >=
/// C * max{Tr(P_inf)^2, eta^2 n} / ((1-rho) lambda_min^2(P_inf)).
/// The absolute constant C is explicit (the source display hides it).
std::int64_t lstd_requirement_lqr(const Eigen::MatrixXd& P_inf, double eta,
                                  const MixingBound& mixing, double delta, double C = 1.0,
                                  std::int64_t cap = kRequiredNCap);

/// Order-of-magnitude relative-error predictor (polylog factors set to 1):
///   C * eta sqrt(||P_inf||) max{Tr(P_inf), eta sqrt(n)} / (sqrt(N) lambda_min^2(P_inf)).
double lstd_error_prediction(const Eigen::MatrixXd& P_inf, double eta, std::int64_t N,
                             int n, double C = 1.0);

/// kappa(P_inf) = ||P_inf||_2 / lambda_min(P_inf).
double condition_number(const Eigen::MatrixXd& P_inf);

}  // namespace lqrtd
