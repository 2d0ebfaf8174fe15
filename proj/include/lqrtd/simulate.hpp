#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lqrtd/lqr.hpp"
#include "lqrtd/matops.hpp"

namespace lqrtd {

struct Transition {
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  double r = 0.0;
  Eigen::VectorXd x_next;
};

/// Ordered transitions (x_k, u_k, r_k, x_{k+1}), k = 1..N, generated from
/// X_0 = 0 (the first recorded state is x_1 = noise_scale * W_0). Same
/// (instance, policy, length, seed, noise_scale) reproduces the trajectory
/// bit for bit.
struct Trajectory {
  std::vector<Transition> transitions;
  std::uint64_t seed = 0;
  double noise_scale = 1.0;
  bool finite = true;  // false once some state norm exceeds 1e100
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Stable seed derivation for named sub-streams; (base, a, b) -> 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Standard normal stream over a seeded mt19937_64 (Box-Muller on explicit
/// 53-bit uniforms, so the draw sequence is fixed by the seed alone).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

  double next();
  Eigen::VectorXd vec(int n);

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Closed-loop rollout u_k = K x_k with process noise W_k ~ N(0, noise_scale^2 I).
Trajectory rollout_policy(const LqrInstance& inst, const LinearPolicy& pol, int length,
                          std::uint64_t seed, double noise_scale = 1.0);

/// Exploration rollout with inputs u_k ~ N(0, I) drawn from a stream
/// independent of the process noise. input_seed overrides the derived input
/// sub-seed (the noise stream is untouched by it).
Trajectory rollout_explore(const LqrInstance& inst, int length, std::uint64_t seed,
                           double noise_scale = 1.0,
                           std::optional<std::uint64_t> input_seed = std::nullopt);

/// phi(x) = svec(x x' + eta I).
SymVec feature_phi(const Eigen::VectorXd& x, double eta);

/// phi(x, u) = svec([x;u][x;u]' + eta [I;K][I;K]').
SymVec feature_phi_q(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                     const Eigen::MatrixXd& K, double eta);

/// psi(x) = E[phi(X_{k+1}) | X_k = x] = svec(L x x' L' + (1 + eta) I).
SymVec feature_psi(const Eigen::VectorXd& x, const Eigen::MatrixXd& L, double eta);

/// Index sets I_(j) = { k in [1, N] : (k - 1) mod a = j - 1 }, j = 1..a.
/// Indices are 1-based, matching the transition numbering k = 1..N.
std::vector<std::vector<int>> block_partition(int N, int a);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace lqrtd
