#include "lqrtd/lqr.hpp"

#include <cmath>
#include <limits>

#include "lqrtd/lyapunov.hpp"
#include "lqrtd/matops.hpp"

namespace lqrtd {

void LqrInstance::validate() const {
  const int nn = n();
  if (A.cols() != nn || B.rows() != nn) {
    throw DimMismatchError("LqrInstance: A must be square and rows(B) = n");
  }
  if (Q.rows() != nn || Q.cols() != nn || R.rows() != n_inputs() || R.cols() != n_inputs()) {
    throw DimMismatchError("LqrInstance: cost matrix dimensions do not conform");
  }
  if (min_eig_sym(Q) <= 0.0) {
    throw NotPdError("LqrInstance: Q must be positive definite");
  }
  if (n_inputs() > 0 && min_eig_sym(R) <= 0.0) {
    throw NotPdError("LqrInstance: R must be positive definite");
  }
  if (gamma <= 0.0 || gamma > 1.0) {
    throw ConfigError("LqrInstance: gamma must lie in (0, 1]");
  }
}

Eigen::MatrixXd closed_loop(const LqrInstance& inst, const LinearPolicy& pol) {
  if (pol.K.rows() != inst.n_inputs() || pol.K.cols() != inst.n()) {
    throw DimMismatchError("closed_loop: gain dimensions do not conform");
  }
  return inst.A + inst.B * pol.K;
}

QuadraticValue value_matrix(const LqrInstance& inst, const LinearPolicy& pol) {
  if (inst.gamma >= 1.0) {
    throw ConfigError("value_matrix: needs gamma < 1");
  }
  const Eigen::MatrixXd L = closed_loop(inst, pol);
  const double sg = std::sqrt(inst.gamma);
  if (spectral_radius(sg * L) >= 1.0 - kStabilityMargin) {
    throw DiscountedUnstableError("value_matrix: sqrt(gamma) * (A + BK) is not stable");
  }
  QuadraticValue v;
  v.eta = inst.gamma / (1.0 - inst.gamma);
  const Eigen::MatrixXd S = inst.Q + pol.K.transpose() * inst.R * pol.K;
  v.P = solve_dlyap(sg * L, S, LyapForm::AtXA);
  return v;
}

Eigen::MatrixXd stationary_covariance(const Eigen::MatrixXd& L) {
  if (spectral_radius(L) >= 1.0 - kStabilityMargin) {
    throw UnstableError("stationary_covariance: L is not stable");
  }
  return solve_dlyap(L, Eigen::MatrixXd::Identity(L.rows(), L.cols()), LyapForm::AXAt);
}

double value_eval(const QuadraticValue& v, const Eigen::VectorXd& x) {
  if (x.size() != v.P.rows()) {
    throw DimMismatchError("value_eval: state dimension does not match");
  }
  const Eigen::MatrixXd Ps = symmetrize(v.P);
  return -x.dot(Ps * x) - v.eta * Ps.trace();
}

Eigen::MatrixXd qfunction_matrix(const LqrInstance& inst, const LinearPolicy& pol) {
  const QuadraticValue v = value_matrix(inst, pol);  // propagates DiscountedUnstable
  const int n = inst.n();
  const int ni = inst.n_inputs();
  const double g = inst.gamma;
  Eigen::MatrixXd M(n + ni, n + ni);
  M.topLeftCorner(n, n) = inst.Q + g * inst.A.transpose() * v.P * inst.A;
  M.topRightCorner(n, ni) = g * inst.A.transpose() * v.P * inst.B;
  M.bottomLeftCorner(ni, n) = M.topRightCorner(n, ni).transpose();
  M.bottomRightCorner(ni, ni) = inst.R + g * inst.B.transpose() * v.P * inst.B;
  return symmetrize(M);
}

Eigen::MatrixXd improved_gain(const Eigen::MatrixXd& qmat, int n) {
  const Eigen::Index ni = qmat.rows() - n;
  if (ni < 0 || qmat.rows() != qmat.cols()) {
    throw DimMismatchError("improved_gain: bad Q-matrix dimensions");
  }
  const Eigen::MatrixXd P22 = qmat.bottomRightCorner(ni, ni);
  const Eigen::MatrixXd P12 = qmat.topRightCorner(n, ni);
  return -P22.ldlt().solve(P12.transpose());
}

double cost_discounted(const LqrInstance& inst, const LinearPolicy& pol) {
  const Eigen::MatrixXd L = closed_loop(inst, pol);
  const double sg = std::sqrt(inst.gamma);
  if (spectral_radius(sg * L) >= 1.0 - kStabilityMargin) {
    return std::numeric_limits<double>::infinity();
  }
  const QuadraticValue v = value_matrix(inst, pol);
  return v.eta * v.P.trace();
}

double cost_average(const LqrInstance& inst, const LinearPolicy& pol) {
  const Eigen::MatrixXd L = closed_loop(inst, pol);
  if (spectral_radius(L) >= 1.0 - kStabilityMargin) {
    return std::numeric_limits<double>::infinity();
  }
  const Eigen::MatrixXd Pinf = stationary_covariance(L);
  return ((inst.Q + pol.K.transpose() * inst.R * pol.K) * Pinf).trace();
}

}  // namespace lqrtd
