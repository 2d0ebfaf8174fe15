#pragma once

#include <Eigen/Dense>

#include "lqrtd/errors.hpp"

namespace lqrtd {

inline constexpr double kSymTol = 1e-10;
inline constexpr double kDefaultRankTol = 1e-10;

/// Inner-product-preserving vectorization of a symmetric n x n matrix.
///
/// Ordering convention: row-major upper triangle, off-diagonal entries
/// scaled by sqrt(2) so that dot(svec(M1), svec(M2)) == Tr(M1 * M2).
struct SymVec {
  Eigen::VectorXd entries;
  int n = 0;

  static int dim_from_n(int n) { return n * (n + 1) / 2; }

  // Inverse of dim_from_n; throws BadLengthError when d != n(n+1)/2 for
  // every integer n.
  static int n_from_dim(Eigen::Index d);
};

SymVec svec(const Eigen::MatrixXd& M, double sym_tol = kSymTol);

Eigen::MatrixXd smat(const SymVec& v);
Eigen::MatrixXd smat(const Eigen::VectorXd& entries);

/// (M + M^T)/2.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M);

/// max |lambda_i(A)| over the (possibly complex) eigenvalues.
double spectral_radius(const Eigen::MatrixXd& A);

/// Smallest eigenvalue of a symmetric matrix (symmetry checked to sym_tol,
/// relative Frobenius).
double min_eig_sym(const Eigen::MatrixXd& S, double sym_tol = kSymTol);

struct PinvSolution {
  Eigen::VectorXd x;
  Eigen::Index effective_rank = 0;
};

struct PinvMatrixSolution {
  Eigen::MatrixXd X;
  Eigen::Index effective_rank = 0;
};

/// Minimum-norm least-squares solution of A x = b. Singular values below
/// rank_tol * sigma_max are truncated; the effective rank is reported
/// rather than raised as an error.
PinvSolution pinv_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                        double rank_tol = kDefaultRankTol);

PinvMatrixSolution pinv_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              double rank_tol = kDefaultRankTol);

}  // namespace lqrtd
