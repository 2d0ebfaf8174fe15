#include "lqrtd/lyapunov.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "lqrtd/matops.hpp"

namespace lqrtd {

namespace {

constexpr double kStabilityEps = 1e-12;
constexpr double kResidualTol = 1e-9;
constexpr int kVectorizedMaxDim = 40;

Eigen::MatrixXd dlyap_vectorized(const Eigen::MatrixXd& L, const Eigen::MatrixXd& S) {
  // L P L^T - P + S = 0  <=>  (I - L (x) L) vec(P) = vec(S)
  const Eigen::Index n = L.rows();
  const Eigen::Index n2 = n * n;
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n2, n2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      M.block(i * n, j * n, n, n) -= L(i, j) * L;
    }
  }
  // vec is column-major: vec(L P L^T) = (L (x) L) vec(P) with Kronecker blocks
  // (i,j) = L(i,j) * L indexed against column-stacked P. Eigen maps agree.
  Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(S.data(), n2);
  Eigen::VectorXd p = M.partialPivLu().solve(s);
  return Eigen::Map<const Eigen::MatrixXd>(p.data(), n, n);
}

Eigen::MatrixXd dlyap_doubling(const Eigen::MatrixXd& L, const Eigen::MatrixXd& S) {
  // P_j = sum_{t < 2^j} L^t S (L^t)^T; squaring the propagator each round.
  Eigen::MatrixXd P = S;
  Eigen::MatrixXd M = L;
  for (int j = 0; j < 256; ++j) {
    Eigen::MatrixXd inc = M * P * M.transpose();
    P += inc;
    if (inc.norm() <= 1e-18 * std::max(P.norm(), 1.0)) {
      return P;
    }
    M = M * M;
  }
  throw NoConvergenceError("solve_dlyap: doubling iteration did not converge");
}

}  // namespace

Eigen::MatrixXd solve_dlyap(const Eigen::MatrixXd& L, const Eigen::MatrixXd& S, LyapForm form) {
  if (L.rows() != L.cols() || S.rows() != S.cols() || L.rows() != S.rows()) {
    throw DimMismatchError("solve_dlyap: dimension mismatch");
  }
  if (spectral_radius(L) >= 1.0 - kStabilityEps) {
    throw UnstableError("solve_dlyap: spectral radius of L is not < 1");
  }
  const Eigen::MatrixXd A = (form == LyapForm::AXAt) ? L : Eigen::MatrixXd(L.transpose());
  const Eigen::MatrixXd Ssym = symmetrize(S);

  Eigen::MatrixXd P = (L.rows() <= kVectorizedMaxDim) ? dlyap_vectorized(A, Ssym)
                                                      : dlyap_doubling(A, Ssym);
  P = symmetrize(P);

  // Backward-stable residual scale: for badly conditioned loops ||P|| dwarfs
  // ||S|| and the bare 1e-9 ||S||_F target is below what double precision can
  // even certify, so the solution magnitude enters the tolerance.
  const double res = (A * P * A.transpose() - P + Ssym).norm();
  const double scale = Ssym.norm() + (1.0 + A.norm() * A.norm()) * P.norm();
  if (res > kResidualTol * std::max(scale, 1e-300)) {
    std::ostringstream oss;
    oss << "solve_dlyap: residual " << res << " exceeds tolerance";
    throw NoConvergenceError(oss.str());
  }
  return P;
}

DareSolution solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R, double gamma) {
  const Eigen::Index n = A.rows();
  const Eigen::Index ni = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != ni || R.cols() != ni) {
    throw DimMismatchError("solve_dare: dimension mismatch");
  }
  if (gamma <= 0.0 || gamma > 1.0) {
    throw ConfigError("solve_dare: gamma must lie in (0, 1]");
  }
  const double sg = std::sqrt(gamma);
  const Eigen::MatrixXd As = sg * A;
  const Eigen::MatrixXd Bs = sg * B;

  constexpr int kMaxIter = 100000;
  constexpr double kRelTol = 1e-12;
  const double blowup = 1e12 * std::max(Q.norm(), 1.0);

  Eigen::MatrixXd P = Q;
  int it = 0;
  for (; it < kMaxIter; ++it) {
    const Eigen::MatrixXd BtPB = R + Bs.transpose() * P * Bs;
    const Eigen::MatrixXd BtPA = Bs.transpose() * P * As;
    const Eigen::MatrixXd Pn =
        symmetrize(Q + As.transpose() * P * As - BtPA.transpose() * BtPB.ldlt().solve(BtPA));
    const double change = (Pn - P).norm();
    P = Pn;
    if (P.norm() > blowup) {
      throw NoConvergenceError("solve_dare: iteration diverged");
    }
    if (change <= kRelTol * std::max(P.norm(), 1e-300)) {
      break;
    }
  }
  if (it == kMaxIter) {
    throw NoConvergenceError("solve_dare: value iteration hit the iteration cap");
  }

  DareSolution out;
  out.P = P;
  out.iterations = it + 1;
  const Eigen::MatrixXd G = R + gamma * B.transpose() * P * B;
  out.K = -G.ldlt().solve(gamma * B.transpose() * P * A);

  if (spectral_radius(sg * (A + B * out.K)) >= 1.0 - kStabilityEps) {
    throw UnstabilizableError("solve_dare: closed loop is not stable for the scaled pair");
  }
  // fixed-point residual check
  const Eigen::MatrixXd BtPB = R + Bs.transpose() * P * Bs;
  const Eigen::MatrixXd BtPA = Bs.transpose() * P * As;
  const double res =
      (Q + As.transpose() * P * As - BtPA.transpose() * BtPB.ldlt().solve(BtPA) - P).norm();
  if (res > kResidualTol * std::max(P.norm(), 1e-300)) {
    throw NoConvergenceError("solve_dare: fixed-point residual exceeds tolerance");
  }
  return out;
}

Eigen::MatrixXd finite_gramian(const Eigen::MatrixXd& L, long long k) {
  if (L.rows() != L.cols()) {
    throw DimMismatchError("finite_gramian: matrix must be square");
  }
  if (k < 1) {
    throw ConfigError("finite_gramian: k must be >= 1");
  }
  const Eigen::Index n = L.rows();
  // P_{a+b} = P_a + L^a P_b (L^a)^T, assembled from the binary digits of k.
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);       // P_0
  Eigen::MatrixXd Lacc = Eigen::MatrixXd::Identity(n, n);  // L^(bits consumed)
  Eigen::MatrixXd Pbit = Eigen::MatrixXd::Identity(n, n);   // P_{2^j}
  Eigen::MatrixXd Lbit = L;                                 // L^{2^j}
  long long rem = k;
  while (true) {
    if (rem & 1) {
      P += Lacc * Pbit * Lacc.transpose();
      Lacc = Lacc * Lbit;
    }
    rem >>= 1;
    if (rem == 0) {
      break;
    }
    Pbit = Pbit + Lbit * Pbit * Lbit.transpose();
    Lbit = Lbit * Lbit;
  }
  return symmetrize(P);
}

double hinf_resolvent_norm(const Eigen::MatrixXd& A, double rho, int grid) {
  if (A.rows() != A.cols()) {
    throw DimMismatchError("hinf_resolvent_norm: matrix must be square");
  }
  if (grid < 1) {
    throw ConfigError("hinf_resolvent_norm: grid must be >= 1");
  }
  if (rho <= spectral_radius(A)) {
    throw RateTooSmallError("hinf_resolvent_norm: rho must exceed the spectral radius");
  }
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXcd M = (A / rho).cast<std::complex<double>>();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  double best = 0.0;
  for (int m = 0; m < grid; ++m) {
    const double theta = 2.0 * M_PI * static_cast<double>(m) / static_cast<double>(grid);
    const std::complex<double> z(std::cos(theta), std::sin(theta));
    // ||(zI - M)^{-1}|| = 1 / sigma_min(zI - M)
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(z * I - M);
    best = std::max(best, 1.0 / svd.singularValues().minCoeff());
  }
  return best;
}

DecayCertificate spectral_decay_bound(const Eigen::MatrixXd& A, double rho, int grid) {
  if (rho >= 1.0) {
    throw RateTooSmallError("spectral_decay_bound: rho must be < 1");
  }
  DecayCertificate cert;
  cert.gamma_coeff = hinf_resolvent_norm(A, rho, grid);  // throws RateTooSmall when needed
  cert.rate = rho;
  cert.grid_points = grid;

  // The grid evaluation undershoots the true supremum, so confirm the decay
  // property directly on the first 50 powers (k = 0 pins gamma_coeff >= 1).
  Eigen::MatrixXd Ak = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  double scale = 1.0;
  for (int k = 0; k <= 50; ++k) {
    const double norm_k = Ak.jacobiSvd().singularValues()(0);
    if (norm_k > cert.gamma_coeff * scale + 1e-9) {
      throw NoConvergenceError("spectral_decay_bound: grid too coarse, certificate check failed at k=" +
                               std::to_string(k));
    }
    Ak = Ak * A;
    scale *= rho;
  }
  return cert;
}

double default_decay_rate(const Eigen::MatrixXd& A) {
  return 0.5 * (1.0 + spectral_radius(A));
}

}  // namespace lqrtd
