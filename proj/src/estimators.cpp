#include "lqrtd/estimators.hpp"

#include <cmath>

#include "lqrtd/lyapunov.hpp"
#include "lqrtd/matops.hpp"

namespace lqrtd {

namespace {

void check_finite(std::span<const Transition> data) {
  for (const auto& t : data) {
    if (!t.x.allFinite() || !t.u.allFinite() || !std::isfinite(t.r) || !t.x_next.allFinite()) {
      throw NonFiniteError("estimator input contains non-finite values");
    }
  }
}

}  // namespace

LstdEstimate lstd(std::span<const Transition> data, double gamma, double eta) {
  if (data.empty()) {
    throw ConfigError("lstd: empty data");
  }
  check_finite(data);
  const int n = static_cast<int>(data.front().x.size());
  const int d = SymVec::dim_from_n(n);
  const auto N = static_cast<double>(data.size());

  Eigen::MatrixXd A_mat = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& t : data) {
    const Eigen::VectorXd f = feature_phi(t.x, eta).entries;
    const Eigen::VectorXd fp = feature_phi(t.x_next, eta).entries;
    A_mat.noalias() += f * (f - gamma * fp).transpose();
    cov.noalias() += f * f.transpose();
    b.noalias() += t.r * f;
  }

  const PinvSolution sol = pinv_solve(A_mat, b);

  LstdEstimate out;
  // Rewards are -(x'Qx + u'Ru), so smat(w) converges to -P_pi; flip the sign
  // to return the value matrix itself.
  out.P_hat = symmetrize(-smat(sol.x));
  out.effective_rank = sol.effective_rank;
  out.min_eig_cov = std::max(0.0, min_eig_sym(cov / N));
  return out;
}

LstdEstimate lstd(const Trajectory& traj, double gamma, double eta) {
  if (!traj.finite) {
    throw NonFiniteError("lstd: trajectory diverged");
  }
  return lstd(std::span<const Transition>(traj.transitions), gamma, eta);
}

Eigen::MatrixXd lstdq(std::span<const Transition> data, const Eigen::MatrixXd& K,
                      double gamma, double eta) {
  if (data.empty()) {
    throw ConfigError("lstdq: empty data");
  }
  check_finite(data);
  const Eigen::Index n = data.front().x.size();
  const Eigen::Index ni = data.front().u.size();
  const int d = SymVec::dim_from_n(static_cast<int>(n + ni));

  Eigen::MatrixXd A_mat = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  for (const auto& t : data) {
    const Eigen::VectorXd f = feature_phi_q(t.x, t.u, K, eta).entries;
    const Eigen::VectorXd fp = feature_phi_q(t.x_next, K * t.x_next, K, eta).entries;
    A_mat.noalias() += f * (f - gamma * fp).transpose();
    b.noalias() += t.r * f;
  }
  const PinvSolution sol = pinv_solve(A_mat, b);
  return symmetrize(-smat(sol.x));  // same sign convention as lstd
}

LspiOutcome lspi_with_estimator(const LqrInstance& inst,
                                const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& qmat,
                                const Eigen::MatrixXd& K0, double gamma, CostMode mode,
                                double tol, int max_iter) {
  if (K0.rows() != inst.n_inputs() || K0.cols() != inst.n()) {
    throw DimMismatchError("lspi: K0 dimensions do not conform");
  }
  const double scale = (mode == CostMode::Discounted) ? std::sqrt(gamma) : 1.0;
  const auto stable = [&](const Eigen::MatrixXd& K) {
    return spectral_radius(scale * (inst.A + inst.B * K)) < 1.0 - kStabilityMargin;
  };

  LspiOutcome out;
  out.gain_history.push_back(K0);
  if (!stable(K0)) {
    return out;  // failed before the first evaluation (e.g. K0 = 0 on an
                 // instance where sqrt(gamma) A is already unstable)
  }
  Eigen::MatrixXd K = K0;
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::MatrixXd M = qmat(K);
    const Eigen::MatrixXd K_next = improved_gain(M, inst.n());
    out.iterations = it;
    out.gain_history.push_back(K_next);
    if (!stable(K_next)) {
      return out;  // failure: score +infinity downstream
    }
    const double step = (K_next - K).norm();
    K = K_next;
    if (step <= tol) {
      break;
    }
  }
  out.final_gain = K;
  return out;
}

LspiOutcome lspi(const LqrInstance& inst, std::span<const Transition> data,
                 const Eigen::MatrixXd& K0, double gamma, CostMode mode, double tol,
                 int max_iter) {
  const double eta = gamma / (1.0 - gamma);
  return lspi_with_estimator(
      inst, [&](const Eigen::MatrixXd& K) { return lstdq(data, K, gamma, eta); }, K0, gamma,
      mode, tol, max_iter);
}

SysIdEstimate ols_sysid(std::span<const Transition> data) {
  if (data.empty()) {
    throw ConfigError("ols_sysid: empty data");
  }
  check_finite(data);
  const Eigen::Index n = data.front().x.size();
  const Eigen::Index ni = data.front().u.size();
  const Eigen::Index N = static_cast<Eigen::Index>(data.size());

  Eigen::MatrixXd Z(N, n + ni);  // rows [x_k' u_k']
  Eigen::MatrixXd Y(N, n);       // rows x_{k+1}'
  for (Eigen::Index k = 0; k < N; ++k) {
    Z.row(k).head(n) = data[k].x;
    Z.row(k).tail(ni) = data[k].u;
    Y.row(k) = data[k].x_next;
  }
  const PinvMatrixSolution sol = pinv_solve(Z, Y);

  SysIdEstimate out;
  out.A_hat = sol.X.topRows(n).transpose();
  out.B_hat = sol.X.bottomRows(ni).transpose();
  out.rank = sol.effective_rank;
  out.rank_deficient = sol.effective_rank < n + ni;
  return out;
}

std::optional<Eigen::MatrixXd> nominal_controller(const Eigen::MatrixXd& A_hat,
                                                  const Eigen::MatrixXd& B_hat,
                                                  const Eigen::MatrixXd& Q,
                                                  const Eigen::MatrixXd& R, double gamma,
                                                  CostMode mode) {
  const double g = (mode == CostMode::Discounted) ? gamma : 1.0;
  try {
    return solve_dare(A_hat, B_hat, Q, R, g).K;
  } catch (const UnstabilizableError&) {
    return std::nullopt;
  } catch (const NoConvergenceError&) {
    return std::nullopt;  // divergent Riccati iteration on a bad model
  }
}

double empirical_min_eig(const std::vector<SymVec>& features) {
  if (features.empty()) {
    throw ConfigError("empirical_min_eig: empty feature list");
  }
  const Eigen::Index d = features.front().entries.size();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& f : features) {
    cov.noalias() += f.entries * f.entries.transpose();
  }
  cov /= static_cast<double>(features.size());
  return std::max(0.0, min_eig_sym(cov));
}

}  // namespace lqrtd
