#pragma once

#include <Eigen/Dense>

#include "lqrtd/errors.hpp"

namespace lqrtd {

enum class LyapForm {
  AXAt,  // solve L P L^T - P + S = 0
  AtXA,  // solve L^T P L - P + S = 0
};

/// Discrete Lyapunov solve. Exact vectorized solve of (I - L (x) L) vec(P) =
/// vec(S) up to n = 40, doubling accumulation above. The residual is checked
/// against 1e-9 * ||S||_F on every call.
Eigen::MatrixXd solve_dlyap(const Eigen::MatrixXd& L, const Eigen::MatrixXd& S,
                            LyapForm form = LyapForm::AXAt);

struct DareSolution {
  Eigen::MatrixXd P;  // fixed point of the Riccati recursion on (sqrt(g)A, sqrt(g)B)
  Eigen::MatrixXd K;  // K = -(R + g B'PB)^{-1} g B'PA
  int iterations = 0;
};

/// Discounted discrete algebraic Riccati equation via value iteration on the
/// scaled pair (sqrt(gamma) A, sqrt(gamma) B). gamma = 1 gives the
/// average-cost equation. Stops at relative change 1e-12, at most 1e5
/// iterations; throws NoConvergenceError past that or on blow-up, and
/// UnstabilizableError when the resulting closed loop is not stable.
DareSolution solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                        double gamma);

/// P_k = sum_{t=0}^{k-1} L^t (L^t)^T, evaluated by binary decomposition of k.
Eigen::MatrixXd finite_gramian(const Eigen::MatrixXd& L, long long k);

/// Max over `grid` uniformly spaced points of the unit circle of
/// ||(zI - A/rho)^{-1}||_2. A lower approximation of the true H-infinity
/// norm of the resolvent; nondecreasing under grid refinement by integer
/// factors.
double hinf_resolvent_norm(const Eigen::MatrixXd& A, double rho, int grid = 4096);

/// Certificate for ||A^k|| <= gamma_coeff * rate^k.
struct DecayCertificate {
  double gamma_coeff = 0.0;  // H-infinity norm of the resolvent of A/rate
  double rate = 0.0;         // in (spectral_radius(A), 1)
  int grid_points = 0;
};

/// Builds the certificate with gamma_coeff = hinf_resolvent_norm(A, rho,
/// grid) and verifies ||A^k||_2 <= gamma_coeff * rho^k + 1e-9 for k = 0..50
/// before returning (the grid gives a lower approximation of the H-infinity
/// norm, so the decay property is confirmed a posteriori).
DecayCertificate spectral_decay_bound(const Eigen::MatrixXd& A, double rho, int grid = 4096);

/// Midpoint convention rho = (1 + spectral_radius(A)) / 2 for the decay rate,
/// used wherever a rate is not supplied explicitly.
double default_decay_rate(const Eigen::MatrixXd& A);

}  // namespace lqrtd
