#include "lqrtd/matops.hpp"

#include <cmath>

namespace lqrtd {

namespace {
const double kSqrt2 = std::sqrt(2.0);

void check_symmetric(const Eigen::MatrixXd& M, double sym_tol, const char* who) {
  if (M.rows() != M.cols()) {
    throw NonSymmetricError(std::string(who) + ": matrix is not square");
  }
  const double denom = std::max(M.norm(), 1e-300);
  if ((M - M.transpose()).norm() > sym_tol * denom) {
    throw NonSymmetricError(std::string(who) + ": matrix is not symmetric to tolerance");
  }
}
}  // namespace

int SymVec::n_from_dim(Eigen::Index d) {
  // d = n(n+1)/2  =>  n = (-1 + sqrt(1 + 8d)) / 2
  const auto n = static_cast<Eigen::Index>(std::floor((std::sqrt(1.0 + 8.0 * static_cast<double>(d)) - 1.0) / 2.0 + 0.5));
  if (n < 1 || n * (n + 1) / 2 != d) {
    throw BadLengthError("smat: length " + std::to_string(d) + " is not n(n+1)/2 for any integer n");
  }
  return static_cast<int>(n);
}

SymVec svec(const Eigen::MatrixXd& M, double sym_tol) {
  check_symmetric(M, sym_tol, "svec");
  const Eigen::MatrixXd S = symmetrize(M);  // wash out round-off below the tolerance
  const int n = static_cast<int>(S.rows());
  SymVec out;
  out.n = n;
  out.entries.resize(SymVec::dim_from_n(n));
  Eigen::Index k = 0;
  for (int i = 0; i < n; ++i) {
    out.entries[k++] = S(i, i);
    for (int j = i + 1; j < n; ++j) {
      out.entries[k++] = kSqrt2 * S(i, j);
    }
  }
  return out;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& entries) {
  const int n = SymVec::n_from_dim(entries.size());
  Eigen::MatrixXd M(n, n);
  Eigen::Index k = 0;
  for (int i = 0; i < n; ++i) {
    M(i, i) = entries[k++];
    for (int j = i + 1; j < n; ++j) {
      M(i, j) = entries[k] / kSqrt2;
      M(j, i) = M(i, j);
      ++k;
    }
  }
  return M;
}

Eigen::MatrixXd smat(const SymVec& v) { return smat(v.entries); }

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M) {
  return 0.5 * (M + M.transpose());
}

double spectral_radius(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) {
    throw DimMismatchError("spectral_radius: matrix must be square");
  }
  if (A.size() == 0) {
    return 0.0;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eig_sym(const Eigen::MatrixXd& S, double sym_tol) {
  check_symmetric(S, sym_tol, "min_eig_sym");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(S), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

PinvSolution pinv_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double rank_tol) {
  if (A.rows() != b.size()) {
    throw DimMismatchError("pinv_solve: rows(A) != size(b)");
  }
  auto sol = pinv_solve(A, Eigen::MatrixXd(b), rank_tol);
  return {Eigen::VectorXd(sol.X.col(0)), sol.effective_rank};
}

PinvMatrixSolution pinv_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double rank_tol) {
  if (A.rows() != B.rows()) {
    throw DimMismatchError("pinv_solve: rows(A) != rows(B)");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(rank_tol);
  PinvMatrixSolution out;
  out.effective_rank = svd.rank();
  out.X = svd.solve(B);
  return out;
}

}  // namespace lqrtd
