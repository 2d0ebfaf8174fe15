#include "lqrtd/simulate.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lqrtd {

namespace {

constexpr std::uint64_t kNoiseStreamTag = 0x6e6f697365ULL;  // "noise"
constexpr std::uint64_t kInputStreamTag = 0x696e707574ULL;  // "input"
constexpr double kDivergenceNorm = 1e100;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = base;
  std::uint64_t h = splitmix64(s);
  s = h ^ a;
  h = splitmix64(s);
  s = h ^ b;
  return splitmix64(s);
}

double GaussianStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller on 53-bit uniforms; u1 kept strictly positive for the log.
  const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Eigen::VectorXd GaussianStream::vec(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    v[i] = next();
  }
  return v;
}

namespace {

// Common rollout core; `input` is null for closed-loop rollouts.
Trajectory rollout_impl(const LqrInstance& inst, const LinearPolicy* pol, int length,
                        std::uint64_t seed, double noise_scale, GaussianStream* input) {
  if (length < 1) {
    throw ConfigError("rollout: length must be >= 1");
  }
  const int n = inst.n();
  const int ni = inst.n_inputs();

  GaussianStream noise(derive_seed(seed, kNoiseStreamTag));

  Trajectory traj;
  traj.seed = seed;
  traj.noise_scale = noise_scale;
  traj.transitions.reserve(length);

  // X_0 = 0, so the first recorded state is x_1 = noise_scale * W_0.
  Eigen::VectorXd x = noise_scale * noise.vec(n);
  for (int k = 1; k <= length; ++k) {
    Transition t;
    t.x = x;
    t.u = input != nullptr ? input->vec(ni) : Eigen::VectorXd(pol->K * x);
    t.r = inst.reward(t.x, t.u);
    t.x_next = inst.A * t.x + inst.B * t.u + noise_scale * noise.vec(n);
    x = t.x_next;
    if (traj.finite && (!x.allFinite() || x.norm() > kDivergenceNorm)) {
      traj.finite = false;
    }
    traj.transitions.push_back(std::move(t));
  }
  return traj;
}

}  // namespace

Trajectory rollout_policy(const LqrInstance& inst, const LinearPolicy& pol, int length,
                          std::uint64_t seed, double noise_scale) {
  if (pol.K.rows() != inst.n_inputs() || pol.K.cols() != inst.n()) {
    throw DimMismatchError("rollout_policy: gain dimensions do not conform");
  }
  return rollout_impl(inst, &pol, length, seed, noise_scale, nullptr);
}

Trajectory rollout_explore(const LqrInstance& inst, int length, std::uint64_t seed,
                           double noise_scale, std::optional<std::uint64_t> input_seed) {
  GaussianStream input(input_seed.value_or(derive_seed(seed, kInputStreamTag)));
  return rollout_impl(inst, nullptr, length, seed, noise_scale, &input);
}

SymVec feature_phi(const Eigen::VectorXd& x, double eta) {
  if (eta < 0.0) {
    throw ConfigError("feature_phi: eta must be >= 0");
  }
  Eigen::MatrixXd M = x * x.transpose();
  M.diagonal().array() += eta;
  return svec(M);
}

SymVec feature_phi_q(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                     const Eigen::MatrixXd& K, double eta) {
  const Eigen::Index n = x.size();
  const Eigen::Index ni = u.size();
  if (K.rows() != ni || K.cols() != n) {
    throw DimMismatchError("feature_phi_q: gain dimensions do not conform");
  }
  Eigen::VectorXd z(n + ni);
  z << x, u;
  Eigen::MatrixXd M = z * z.transpose();
  if (eta != 0.0) {
    Eigen::MatrixXd IK(n + ni, n);
    IK.topRows(n) = Eigen::MatrixXd::Identity(n, n);
    IK.bottomRows(ni) = K;
    M += eta * IK * IK.transpose();
  }
  return svec(M);
}

SymVec feature_psi(const Eigen::VectorXd& x, const Eigen::MatrixXd& L, double eta) {
  if (L.rows() != L.cols() || L.cols() != x.size()) {
    throw DimMismatchError("feature_psi: dimensions do not conform");
  }
  const Eigen::VectorXd lx = L * x;
  Eigen::MatrixXd M = lx * lx.transpose();
  M.diagonal().array() += 1.0 + eta;
  return svec(M);
}

std::vector<std::vector<int>> block_partition(int N, int a) {
  if (a < 1 || a > N) {
    throw BadBlockCountError("block_partition: need 1 <= a <= N");
  }
  std::vector<std::vector<int>> sets(a);
  for (int j = 0; j < a; ++j) {
    for (int k = j + 1; k <= N; k += a) {
      sets[j].push_back(k);
    }
  }
  return sets;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("write_trajectory_csv: cannot open " + path);
  }
  if (traj.transitions.empty()) {
    throw Error("write_trajectory_csv: empty trajectory");
  }
  const Eigen::Index n = traj.transitions.front().x.size();
  const Eigen::Index ni = traj.transitions.front().u.size();
  out << "k";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < ni; ++i) out << ",u" << i;
  out << ",r";
  for (Eigen::Index i = 0; i < n; ++i) out << ",xn" << i;
  out << "\n";
  int k = 1;
  for (const auto& t : traj.transitions) {
    out << k++;
    for (Eigen::Index i = 0; i < n; ++i) out << "," << format_double(t.x[i]);
    for (Eigen::Index i = 0; i < ni; ++i) out << "," << format_double(t.u[i]);
    out << "," << format_double(t.r);
    for (Eigen::Index i = 0; i < n; ++i) out << "," << format_double(t.x_next[i]);
    out << "\n";
  }
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("read_trajectory_csv: cannot open " + path);
  }
  std::string header;
  if (!std::getline(in, header)) {
    throw Error("read_trajectory_csv: missing header");
  }
  int n = 0, ni = 0;
  {
    std::stringstream ss(header);
    std::string col;
    while (std::getline(ss, col, ',')) {
      if (col.rfind("xn", 0) == 0) continue;
      if (col.rfind('x', 0) == 0) ++n;
      if (col.rfind('u', 0) == 0) ++ni;
    }
  }
  Trajectory traj;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // k, implicit by position
    Transition t;
    t.x.resize(n);
    t.u.resize(ni);
    t.x_next.resize(n);
    for (int i = 0; i < n; ++i) {
      std::getline(ss, cell, ',');
      t.x[i] = std::stod(cell);
    }
    for (int i = 0; i < ni; ++i) {
      std::getline(ss, cell, ',');
      t.u[i] = std::stod(cell);
    }
    std::getline(ss, cell, ',');
    t.r = std::stod(cell);
    for (int i = 0; i < n; ++i) {
      std::getline(ss, cell, ',');
      t.x_next[i] = std::stod(cell);
    }
    if (!t.x_next.allFinite() || t.x_next.norm() > kDivergenceNorm) {
      traj.finite = false;
    }
    traj.transitions.push_back(std::move(t));
  }
  return traj;
}

}  // namespace lqrtd
