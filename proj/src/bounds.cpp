#include "lqrtd/bounds.hpp"

#include <cmath>
#include <functional>

#include "lqrtd/lqr.hpp"
#include "lqrtd/lyapunov.hpp"
#include "lqrtd/matops.hpp"

namespace lqrtd {

namespace {

double check_pd_min_eig(const Eigen::MatrixXd& P, const char* who) {
  const double m = min_eig_sym(P);
  if (m <= 0.0) {
    throw NotPdError(std::string(who) + ": matrix is not positive definite");
  }
  return m;
}

// Smallest N in [1, cap] satisfying `ok`, by doubling, bisection, and a
// downward walk; throws when no N under the cap qualifies.
std::int64_t minimal_satisfying_n(const std::function<bool(std::int64_t)>& ok,
                                  std::int64_t cap) {
  std::int64_t hi = 1;
  while (!ok(hi)) {
    if (hi >= cap) {
      throw NoSolutionError("required N exceeds the configured cap");
    }
    hi = std::min(cap, hi * 2);
  }
  std::int64_t lo = hi / 2;  // ok(lo) false (or lo == 0)
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  while (hi > 1 && ok(hi - 1)) {
    --hi;
  }
  return hi;
}

}  // namespace

MixingBound beta_mixing_bound(const Eigen::MatrixXd& L, double rho, int grid) {
  if (rho >= 1.0) {
    throw RateTooSmallError("beta_mixing_bound: rho must be < 1");
  }
  const double hinf = hinf_resolvent_norm(L, rho, grid);  // throws RateTooSmall
  const int n = static_cast<int>(L.rows());
  const Eigen::MatrixXd P_inf = stationary_covariance(L);
  MixingBound mb;
  mb.gamma_tilde = hinf * std::sqrt(P_inf.trace() + n / (1.0 - rho * rho));
  mb.rate = rho;
  mb.n = n;
  return mb;
}

SmallBall small_ball_lqr(const Eigen::MatrixXd& P_inf) {
  SmallBall sb;
  sb.tau = check_pd_min_eig(P_inf, "small_ball_lqr");
  sb.q = 1.0 / 324.0;
  return sb;
}

double feature_second_moment(const Eigen::MatrixXd& P_inf, double eta, int n) {
  check_pd_min_eig(P_inf, "feature_second_moment");
  if (P_inf.rows() != n) {
    throw DimMismatchError("feature_second_moment: n does not match P_inf");
  }
  const double tr = P_inf.trace();
  return 2.0 * P_inf.squaredNorm() + tr * tr + 2.0 * eta * tr + eta * eta * n;
}

std::int64_t required_trajectory_length(const SmallBall& sb, double second_moment,
                                        const MixingBound& mixing, double delta,
                                        std::int64_t cap) {
  if (delta <= 0.0 || delta >= 1.0) {
    throw ConfigError("required_trajectory_length: delta must lie in (0, 1)");
  }
  if (sb.tau <= 0.0 || sb.q <= 0.0 || sb.q > 1.0) {
    throw ConfigError("required_trajectory_length: bad small-ball pair");
  }
  const double gamma_c = mixing.beta_coeff();
  const double rho = mixing.rate;
  const double moment_term = 1024.0 * second_moment / (sb.tau * sb.tau * sb.q * sb.q);

  const auto ok = [&](std::int64_t N) {
    const double t = std::log(2.0 * gamma_c * static_cast<double>(N) / delta);
    if (t <= 0.0) {
      return false;
    }
    const double log_arg = 4.0 / (delta * (1.0 - rho)) * t;
    if (log_arg <= 0.0) {
      return false;
    }
    const double inner = std::max(moment_term, 32.0 / (sb.q * sb.q) * std::log(log_arg));
    return static_cast<double>(N) >= 1.0 / (1.0 - rho) * t * (inner + 1.0);
  };
  return minimal_satisfying_n(ok, cap);
}

ContractiveRequirement required_trajectory_length_contractive(double ell, double L_upper,
                                                              double B_ratio,
                                                              const MixingBound& mixing,
                                                              double delta, std::int64_t cap) {
  if (!(0.0 < ell && ell <= L_upper)) {
    throw ConfigError("required_trajectory_length_contractive: need 0 < ell <= L");
  }
  if (B_ratio < 1.0) {
    throw ConfigError("required_trajectory_length_contractive: need B >= 1");
  }
  if (delta <= 0.0 || delta >= 1.0) {
    throw ConfigError("required_trajectory_length_contractive: delta must lie in (0, 1)");
  }
  const double gamma_c = mixing.beta_coeff();
  const double rho = mixing.rate;
  const double b4 = std::pow(B_ratio, 4.0);
  const double moment_term = 65536.0 * std::pow(B_ratio, 6.0) * (L_upper / ell) * mixing.n;

  const auto ok = [&](std::int64_t N) {
    const double t = std::log(2.0 * gamma_c * static_cast<double>(N) / delta);
    if (t <= 0.0) {
      return false;
    }
    const double log_arg = 4.0 / (delta * (1.0 - rho)) * t;
    if (log_arg <= 0.0) {
      return false;
    }
    const double inner = std::max(moment_term, 512.0 * b4 * std::log(log_arg));
    return static_cast<double>(N) >= 1.0 / (1.0 - rho) * t * (inner + 1.0);
  };

  ContractiveRequirement out;
  out.N = minimal_satisfying_n(ok, cap);
  out.eig_floor = ell / (128.0 * b4);
  return out;
}

std::int64_t lstd_requirement_lqr(const Eigen::MatrixXd& P_inf, double eta,
                                  const MixingBound& mixing, double delta, double C,
                                  std::int64_t cap) {
  if (delta <= 0.0 || delta >= 1.0) {
    throw ConfigError("lstd_requirement_lqr: delta must lie in (0, 1)");
  }
  const double lam_min = check_pd_min_eig(P_inf, "lstd_requirement_lqr");
  const double tr = P_inf.trace();
  const int n = static_cast<int>(P_inf.rows());
  const double rhs =
      C * std::max(tr * tr, eta * eta * n) / ((1.0 - mixing.rate) * lam_min * lam_min);
  const double gt = mixing.gamma_tilde;

  const auto ok = [&](std::int64_t N) {
    const double t = std::log(gt * static_cast<double>(N) / delta);
    if (t <= 1.0) {
      return false;  // loglog not yet positive
    }
    return static_cast<double>(N) / (t * std::log(t)) >= rhs;
  };
  return minimal_satisfying_n(ok, cap);
}

double lstd_error_prediction(const Eigen::MatrixXd& P_inf, double eta, std::int64_t N,
                             int n, double C) {
  if (N < 1) {
    throw ConfigError("lstd_error_prediction: N must be >= 1");
  }
  const double lam_min = check_pd_min_eig(P_inf, "lstd_error_prediction");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(P_inf), Eigen::EigenvaluesOnly);
  const double op_norm = es.eigenvalues().maxCoeff();
  const double tr = P_inf.trace();
  return C * eta * std::sqrt(op_norm) * std::max(tr, eta * std::sqrt(static_cast<double>(n))) /
         (std::sqrt(static_cast<double>(N)) * lam_min * lam_min);
}

double condition_number(const Eigen::MatrixXd& P_inf) {
  const double lam_min = check_pd_min_eig(P_inf, "condition_number");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(P_inf), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff() / lam_min;
}

}  // namespace lqrtd
