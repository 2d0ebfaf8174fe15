#include "lqrtd/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "lqrtd/estimators.hpp"
#include "lqrtd/lyapunov.hpp"
#include "lqrtd/matops.hpp"
#include "lqrtd/simulate.hpp"

namespace lqrtd {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_double(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  return std::stod(s);
}

// json value for a possibly infinite metric ("inf" keeps the failure marker
// printable; plain doubles otherwise).
json metric_to_json(double v) {
  if (std::isinf(v)) {
    return json(v > 0 ? "inf" : "-inf");
  }
  return json(v);
}

double metric_from_json(const json& j) {
  if (j.is_string()) {
    return parse_double(j.get<std::string>());
  }
  return j.get<double>();
}

CostMode parse_mode(const std::string& mode) {
  if (mode == "discounted") return CostMode::Discounted;
  if (mode == "average") return CostMode::Average;
  throw ConfigError("unknown cost mode: " + mode);
}

void require(bool cond, const std::string& msg) {
  if (!cond) {
    throw ConfigError(msg);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  require(version == 1, "config: unsupported version");
  require(experiment == "synthetic-diag" || experiment == "synthetic-random" ||
              experiment == "lspi-compare" || experiment == "bounds",
          "config: unknown experiment '" + experiment + "'");
  require(num_trials >= 1, "config: num_trials must be >= 1");
  require(gamma > 0.0 && gamma < 1.0, "config: gamma must lie in (0, 1)");
  require(mode == "discounted" || mode == "average", "config: bad mode '" + mode + "'");
  require(format == "csv" || format == "json", "config: format must be csv or json");
  require(!rho_list.empty(), "config: rho_list must be nonempty");
  for (double r : rho_list) {
    require(r > 0.0 && r < 1.0, "config: rho values must lie in (0, 1)");
  }
  require(!prefix_list.empty(), "config: prefix_list must be nonempty");
  for (std::size_t i = 0; i < prefix_list.size(); ++i) {
    require(prefix_list[i] >= 1, "config: prefixes must be >= 1");
    require(i == 0 || prefix_list[i] > prefix_list[i - 1],
            "config: prefix_list must be strictly increasing");
  }
  require(!timesteps_list.empty(), "config: timesteps_list must be nonempty");
  for (std::size_t i = 0; i < timesteps_list.size(); ++i) {
    require(timesteps_list[i] >= 1, "config: timesteps must be >= 1");
    require(i == 0 || timesteps_list[i] > timesteps_list[i - 1],
            "config: timesteps_list must be strictly increasing");
  }
  require(rollout_length >= 1, "config: rollout_length must be >= 1");
  require(instance_pool >= 1, "config: instance_pool must be >= 1");
  require(delta > 0.0 && delta < 1.0, "config: delta must lie in (0, 1)");
  require(bound_constant > 0.0, "config: bound_constant must be positive");
  require(bounds_rho > 0.0 && bounds_rho < 1.0, "config: bounds_rho must lie in (0, 1)");
  require(!output_path.empty(), "config: output_path must be set");
}

void ExperimentConfig::apply_paper_scale() {
  paper_scale = true;
  num_trials = 100;
  instance_pool = 1000;
}

ExperimentConfig ExperimentConfig::defaults_for(const std::string& experiment) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  if (experiment == "lspi-compare") {
    cfg.gamma = 0.98;
    cfg.output_path = "lspi_compare.csv";
  } else if (experiment == "synthetic-diag") {
    cfg.output_path = "synthetic_diag.csv";
  } else if (experiment == "synthetic-random") {
    cfg.output_path = "synthetic_random.csv";
  } else if (experiment == "bounds") {
    cfg.format = "json";
    cfg.output_path = "bound_report.json";
  }
  return cfg;
}

std::string ExperimentConfig::to_json_string() const {
  json j;
  j["version"] = version;
  j["experiment"] = experiment;
  j["base_seed"] = base_seed;
  j["num_trials"] = num_trials;
  j["gamma"] = gamma;
  j["mode"] = mode;
  j["rho_list"] = rho_list;
  j["prefix_list"] = prefix_list;
  j["timesteps_list"] = timesteps_list;
  j["rollout_length"] = rollout_length;
  j["instance_pool"] = instance_pool;
  j["paper_scale"] = paper_scale;
  j["format"] = format;
  j["output_path"] = output_path;
  j["delta"] = delta;
  j["bound_constant"] = bound_constant;
  j["bounds_rho"] = bounds_rho;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  require(j.is_object(), "config: top level must be a JSON object");
  require(j.contains("experiment"), "config: missing 'experiment'");

  ExperimentConfig cfg = defaults_for(j["experiment"].get<std::string>());
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "version") cfg.version = value.get<int>();
      else if (key == "experiment") cfg.experiment = value.get<std::string>();
      else if (key == "base_seed") cfg.base_seed = value.get<std::uint64_t>();
      else if (key == "num_trials") cfg.num_trials = value.get<int>();
      else if (key == "gamma") cfg.gamma = value.get<double>();
      else if (key == "mode") cfg.mode = value.get<std::string>();
      else if (key == "rho_list") cfg.rho_list = value.get<std::vector<double>>();
      else if (key == "prefix_list") cfg.prefix_list = value.get<std::vector<int>>();
      else if (key == "timesteps_list") cfg.timesteps_list = value.get<std::vector<int>>();
      else if (key == "rollout_length") cfg.rollout_length = value.get<int>();
      else if (key == "instance_pool") cfg.instance_pool = value.get<int>();
      else if (key == "paper_scale") cfg.paper_scale = value.get<bool>();
      else if (key == "format") cfg.format = value.get<std::string>();
      else if (key == "output_path") cfg.output_path = value.get<std::string>();
      else if (key == "delta") cfg.delta = value.get<double>();
      else if (key == "bound_constant") cfg.bound_constant = value.get<double>();
      else if (key == "bounds_rho") cfg.bounds_rho = value.get<double>();
      else throw ConfigError("config: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad field type: ") + e.what());
  }
  if (cfg.paper_scale) {
    cfg.apply_paper_scale();
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config: cannot open " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

// ---------------------------------------------------------------------------
// canonical instances
// ---------------------------------------------------------------------------

LqrInstance diag_family_instance(double gamma) {
  LqrInstance inst;
  inst.A = Eigen::MatrixXd::Identity(5, 5);
  inst.B = Eigen::MatrixXd::Identity(5, 5);
  inst.Q = 0.1 * Eigen::MatrixXd::Identity(5, 5);
  inst.R = 0.1 * Eigen::MatrixXd::Identity(5, 5);
  inst.gamma = gamma;
  return inst;
}

LinearPolicy diag_family_policy(double rho) {
  Eigen::VectorXd d(5);
  d << rho, rho, rho, rho, 0.01;
  return LinearPolicy{Eigen::MatrixXd((d.array() - 1.0).matrix().asDiagonal())};
}

LqrInstance dean_instance(double gamma) {
  LqrInstance inst;
  inst.A.resize(3, 3);
  inst.A << 1.01, 0.01, 0.00,
            0.01, 1.01, 0.01,
            0.00, 0.01, 1.01;
  inst.B = Eigen::MatrixXd::Identity(3, 3);
  inst.Q = 1e-3 * Eigen::MatrixXd::Identity(3, 3);
  inst.R = Eigen::MatrixXd::Identity(3, 3);
  inst.gamma = gamma;
  return inst;
}

RandomInstanceSelection select_random_instance(double rho, int pool, std::uint64_t seed) {
  GaussianStream stream(derive_seed(seed, 0x706f6f6cULL /* "pool" */));
  std::vector<std::pair<double, Eigen::MatrixXd>> stable;
  stable.reserve(pool);
  int discarded = 0;
  for (int i = 0; i < pool; ++i) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(5, 5);
    A.diagonal().setConstant(rho);
    for (int r = 0; r < 5; ++r) {
      for (int c = r + 1; c < 5; ++c) {
        A(r, c) = std::clamp(stream.next(), -1.0, 1.0);
      }
    }
    if (spectral_radius(A) >= 1.0 - kStabilityMargin) {
      ++discarded;  // cannot happen for triangular draws with rho < 1, kept for safety
      continue;
    }
    stable.emplace_back(condition_number(stationary_covariance(A)), A);
  }
  if (stable.empty()) {
    throw NoStableInstanceError("select_random_instance: every draw was unstable");
  }
  std::sort(stable.begin(), stable.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const auto& med = stable[(stable.size() - 1) / 2];

  RandomInstanceSelection out;
  out.A = med.second;
  out.kappa = med.first;
  out.discarded = discarded;
  out.pool = pool;
  return out;
}

// ---------------------------------------------------------------------------
// experiment drivers
// ---------------------------------------------------------------------------

namespace {

// Shared prefix protocol: roll one trajectory per trial, estimate on each
// prefix, record the relative Frobenius error against the exact value matrix.
void run_prefix_protocol(const ExperimentConfig& cfg, const LqrInstance& inst,
                         const LinearPolicy& pol, const std::string& param,
                         std::uint64_t rho_tag, std::vector<TrialRecord>& records) {
  const double eta = inst.gamma / (1.0 - inst.gamma);
  const Eigen::MatrixXd P_pi = value_matrix(inst, pol).P;
  const double p_norm = P_pi.norm();
  const int n_max = cfg.prefix_list.back();

  for (int t = 0; t < cfg.num_trials; ++t) {
    const std::uint64_t seed = derive_seed(cfg.base_seed, rho_tag, static_cast<std::uint64_t>(t));
    const Trajectory traj = rollout_policy(inst, pol, n_max, seed);
    for (int np : cfg.prefix_list) {
      const std::span<const Transition> prefix(traj.transitions.data(),
                                               static_cast<std::size_t>(np));
      const LstdEstimate est = lstd(prefix, inst.gamma, eta);
      records.push_back({cfg.experiment, "lstd", param, np, seed, "rel_error",
                         (est.P_hat - P_pi).norm() / p_norm});
    }
  }
}

}  // namespace

std::vector<TrialRecord> run_synthetic_diag(const ExperimentConfig& cfg) {
  cfg.validate();
  require(cfg.experiment == "synthetic-diag", "run_synthetic_diag: wrong experiment");
  const LqrInstance inst = diag_family_instance(cfg.gamma);
  std::vector<TrialRecord> records;
  for (std::size_t ri = 0; ri < cfg.rho_list.size(); ++ri) {
    run_prefix_protocol(cfg, inst, diag_family_policy(cfg.rho_list[ri]),
                        format_double(cfg.rho_list[ri]), 100 + ri, records);
  }
  return records;
}

std::vector<TrialRecord> run_synthetic_random(const ExperimentConfig& cfg) {
  cfg.validate();
  require(cfg.experiment == "synthetic-random", "run_synthetic_random: wrong experiment");
  std::vector<TrialRecord> records;
  for (std::size_t ri = 0; ri < cfg.rho_list.size(); ++ri) {
    const double rho = cfg.rho_list[ri];
    const std::uint64_t sel_seed = derive_seed(cfg.base_seed, 200 + ri, 0);
    const RandomInstanceSelection sel = select_random_instance(rho, cfg.instance_pool, sel_seed);

    const std::string param = format_double(rho);
    records.push_back({cfg.experiment, "instance", param, 0, sel_seed, "kappa_median", sel.kappa});
    records.push_back({cfg.experiment, "instance", param, 0, sel_seed, "discard_rate",
                       static_cast<double>(sel.discarded) / static_cast<double>(sel.pool)});

    // B = K = 0: the closed loop is the sampled A itself.
    LqrInstance inst = diag_family_instance(cfg.gamma);
    inst.A = sel.A;
    inst.B = Eigen::MatrixXd::Zero(5, 5);
    run_prefix_protocol(cfg, inst, LinearPolicy{Eigen::MatrixXd::Zero(5, 5)}, param, 300 + ri,
                        records);
  }
  return records;
}

std::vector<TrialRecord> run_lspi_compare(const ExperimentConfig& cfg) {
  cfg.validate();
  require(cfg.experiment == "lspi-compare", "run_lspi_compare: wrong experiment");
  const LqrInstance inst = dean_instance(cfg.gamma);
  const CostMode mode = parse_mode(cfg.mode);
  const auto evaluate = [&](const Eigen::MatrixXd& K) {
    return mode == CostMode::Discounted ? cost_discounted(inst, LinearPolicy{K})
                                        : cost_average(inst, LinearPolicy{K});
  };
  const DareSolution opt =
      solve_dare(inst.A, inst.B, inst.Q, inst.R, mode == CostMode::Discounted ? cfg.gamma : 1.0);
  const double j_star = evaluate(opt.K);
  const Eigen::MatrixXd K0 = 0.6 * Eigen::MatrixXd::Identity(3, 3) - inst.A;

  const int max_ts = cfg.timesteps_list.back();
  const int n_rollouts = (max_ts + cfg.rollout_length - 1) / cfg.rollout_length;

  std::vector<TrialRecord> records;
  for (int t = 0; t < cfg.num_trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(cfg.base_seed, 400, static_cast<std::uint64_t>(t));
    std::vector<Transition> data;
    data.reserve(static_cast<std::size_t>(n_rollouts) * cfg.rollout_length);
    for (int l = 0; l < n_rollouts; ++l) {
      const Trajectory roll = rollout_explore(inst, cfg.rollout_length,
                                              derive_seed(trial_seed, static_cast<std::uint64_t>(l)));
      data.insert(data.end(), roll.transitions.begin(), roll.transitions.end());
    }

    for (int ts : cfg.timesteps_list) {
      const std::span<const Transition> d(data.data(), static_cast<std::size_t>(ts));

      const LspiOutcome out = lspi(inst, d, K0, cfg.gamma, mode);
      const double j_lspi = out.failed() ? kInf : evaluate(*out.final_gain);
      const double rel_lspi = std::isfinite(j_lspi) ? (j_lspi - j_star) / j_star : kInf;
      records.push_back({cfg.experiment, "lspi", cfg.mode, ts, trial_seed, "rel_error", rel_lspi});
      records.push_back({cfg.experiment, "lspi", cfg.mode, ts, trial_seed, "stable",
                         std::isfinite(j_lspi) ? 1.0 : 0.0});

      const SysIdEstimate sys = ols_sysid(d);
      const auto k_nom = nominal_controller(sys.A_hat, sys.B_hat, inst.Q, inst.R, cfg.gamma, mode);
      const double j_nom = k_nom.has_value() ? evaluate(*k_nom) : kInf;
      const double rel_nom = std::isfinite(j_nom) ? (j_nom - j_star) / j_star : kInf;
      records.push_back({cfg.experiment, "nominal", cfg.mode, ts, trial_seed, "rel_error", rel_nom});
      records.push_back({cfg.experiment, "nominal", cfg.mode, ts, trial_seed, "stable",
                         std::isfinite(j_nom) ? 1.0 : 0.0});
    }
  }
  return records;
}

BoundReport bound_report_cmd(const ExperimentConfig& cfg) {
  cfg.validate();
  const LqrInstance inst = diag_family_instance(cfg.gamma);
  const LinearPolicy pol = diag_family_policy(cfg.bounds_rho);
  const Eigen::MatrixXd L = closed_loop(inst, pol);
  const Eigen::MatrixXd P_inf = stationary_covariance(L);
  const double eta = inst.gamma / (1.0 - inst.gamma);
  const double rate = default_decay_rate(L);

  BoundReport report;
  report.mixing = beta_mixing_bound(L, rate);
  report.smallball = small_ball_lqr(P_inf);
  report.second_moment = feature_second_moment(P_inf, eta, inst.n());
  report.required_N =
      lstd_requirement_lqr(P_inf, eta, report.mixing, cfg.delta, cfg.bound_constant);
  report.predicted_rel_error =
      lstd_error_prediction(P_inf, eta, report.required_N, inst.n(), cfg.bound_constant);
  report.delta = cfg.delta;
  report.kappa = condition_number(P_inf);
  report.note =
      "mixing: resolvent grid bound at rate (1+rho(L))/2, beta(k) <= (gamma_tilde/2) rho^k; "
      "small ball: tau = lambda_min(P_inf), q = 1/324; required_N: smallest N with "
      "N/(log(gamma_tilde N/delta) loglog(...)) >= C max(Tr^2, eta^2 n)/((1-rho) lambda_min^2), "
      "C = " +
      format_double(cfg.bound_constant) + "; predictor: 1/sqrt(N) form with polylog = 1";
  return report;
}

// ---------------------------------------------------------------------------
// aggregation
// ---------------------------------------------------------------------------

double percentile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw ConfigError("percentile: empty sample");
  }
  require(q >= 0.0 && q <= 1.0, "percentile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());  // +inf sorts above all finite values
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double w = pos - static_cast<double>(lo);
  if (hi == lo || w == 0.0) {
    return values[lo];
  }
  if (std::isinf(values[hi])) {
    return values[hi];
  }
  return (1.0 - w) * values[lo] + w * values[hi];
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records) {
  using Key = std::tuple<std::string, std::string, std::string, int>;
  std::map<Key, std::vector<double>> errors;
  std::map<Key, std::pair<int, int>> stability;  // stable count, total

  for (const auto& r : records) {
    const Key key{r.experiment, r.method, r.param, r.timesteps};
    if (r.metric == "rel_error") {
      errors[key].push_back(r.value);
    } else if (r.metric == "stable") {
      auto& [cnt, tot] = stability[key];
      cnt += r.value > 0.5 ? 1 : 0;
      tot += 1;
    }
  }

  std::vector<AggregateRow> rows;
  for (const auto& [key, vals] : errors) {
    AggregateRow row;
    std::tie(row.experiment, row.method, row.param, row.timesteps) = key;
    row.p25 = percentile(vals, 0.25);
    row.median = percentile(vals, 0.50);
    row.p75 = percentile(vals, 0.75);
    const auto it = stability.find(key);
    if (it != stability.end()) {
      row.frequency_stable =
          static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
    } else {
      // no explicit stability metric: fall back to the fraction of finite scores
      int finite = 0;
      for (double v : vals) finite += std::isfinite(v) ? 1 : 0;
      row.frequency_stable = static_cast<double>(finite) / static_cast<double>(vals.size());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

namespace {

json record_to_json(const TrialRecord& r) {
  json j;
  j["experiment"] = r.experiment;
  j["method"] = r.method;
  j["param"] = r.param;
  j["timesteps"] = r.timesteps;
  j["seed"] = r.seed;
  j["metric"] = r.metric;
  j["value"] = metric_to_json(r.value);
  return j;
}

TrialRecord record_from_json(const json& j) {
  TrialRecord r;
  r.experiment = j.at("experiment").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.param = j.at("param").get<std::string>();
  r.timesteps = j.at("timesteps").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.metric = j.at("metric").get<std::string>();
  r.value = metric_from_json(j.at("value"));
  return r;
}

}  // namespace

void emit_report(const std::vector<TrialRecord>& records, const std::string& path,
                 const std::string& format) {
  require(!records.empty(), "emit_report: no records");
  std::ofstream out(path);
  if (!out) {
    throw Error("emit_report: cannot open " + path);
  }
  if (format == "csv") {
    out << "experiment,method,param,timesteps,seed,metric,value\n";
    for (const auto& r : records) {
      out << r.experiment << ',' << r.method << ',' << r.param << ',' << r.timesteps << ','
          << r.seed << ',' << r.metric << ',' << format_double(r.value) << '\n';
    }
  } else if (format == "json") {
    json j = json::array();
    for (const auto& r : records) {
      j.push_back(record_to_json(r));
    }
    out << j.dump(2) << '\n';
  } else {
    throw ConfigError("emit_report: unknown format " + format);
  }
}

void emit_aggregate(const std::vector<AggregateRow>& rows, const std::string& path,
                    const std::string& format) {
  std::ofstream out(path);
  if (!out) {
    throw Error("emit_aggregate: cannot open " + path);
  }
  if (format == "csv") {
    out << "experiment,method,param,timesteps,p25,median,p75,frequency_stable\n";
    for (const auto& r : rows) {
      out << r.experiment << ',' << r.method << ',' << r.param << ',' << r.timesteps << ','
          << format_double(r.p25) << ',' << format_double(r.median) << ','
          << format_double(r.p75) << ',' << format_double(r.frequency_stable) << '\n';
    }
  } else if (format == "json") {
    json j = json::array();
    for (const auto& r : rows) {
      json row;
      row["experiment"] = r.experiment;
      row["method"] = r.method;
      row["param"] = r.param;
      row["timesteps"] = r.timesteps;
      row["p25"] = metric_to_json(r.p25);
      row["median"] = metric_to_json(r.median);
      row["p75"] = metric_to_json(r.p75);
      row["frequency_stable"] = r.frequency_stable;
      j.push_back(std::move(row));
    }
    out << j.dump(2) << '\n';
  } else {
    throw ConfigError("emit_aggregate: unknown format " + format);
  }
}

std::vector<TrialRecord> read_records_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("read_records_json: cannot open " + path);
  }
  json j;
  in >> j;
  std::vector<TrialRecord> records;
  for (const auto& item : j) {
    records.push_back(record_from_json(item));
  }
  return records;
}

std::vector<TrialRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("read_records_csv: cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw Error("read_records_csv: missing header");
  }
  std::vector<TrialRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    TrialRecord r;
    std::string cell;
    std::getline(ss, r.experiment, ',');
    std::getline(ss, r.method, ',');
    std::getline(ss, r.param, ',');
    std::getline(ss, cell, ',');
    r.timesteps = std::stoi(cell);
    std::getline(ss, cell, ',');
    r.seed = std::stoull(cell);
    std::getline(ss, r.metric, ',');
    std::getline(ss, cell, ',');
    r.value = parse_double(cell);
    records.push_back(std::move(r));
  }
  return records;
}

std::string bound_report_to_json(const BoundReport& report,
                                 const std::vector<int>& prediction_grid,
                                 const Eigen::MatrixXd& P_inf, double eta, double C) {
  json j;
  j["mixing"] = {{"gamma_tilde", report.mixing.gamma_tilde},
                 {"rate", report.mixing.rate},
                 {"n", report.mixing.n}};
  j["smallball"] = {{"tau", report.smallball.tau}, {"q", report.smallball.q}};
  j["second_moment"] = report.second_moment;
  j["required_N"] = report.required_N;
  j["predicted_rel_error"] = report.predicted_rel_error;
  j["delta"] = report.delta;
  j["kappa"] = report.kappa;
  j["note"] = report.note;
  json preds = json::array();
  for (int n_val : prediction_grid) {
    preds.push_back({{"N", n_val},
                     {"predicted_rel_error",
                      lstd_error_prediction(P_inf, eta, n_val, static_cast<int>(P_inf.rows()), C)}});
  }
  j["predictions"] = std::move(preds);
  return j.dump(2);
}

BoundReport bound_report_from_json(const std::string& text) {
  json j = json::parse(text);
  BoundReport report;
  report.mixing.gamma_tilde = j.at("mixing").at("gamma_tilde").get<double>();
  report.mixing.rate = j.at("mixing").at("rate").get<double>();
  report.mixing.n = j.at("mixing").at("n").get<int>();
  report.smallball.tau = j.at("smallball").at("tau").get<double>();
  report.smallball.q = j.at("smallball").at("q").get<double>();
  report.second_moment = j.at("second_moment").get<double>();
  report.required_N = j.at("required_N").get<std::int64_t>();
  report.predicted_rel_error = j.at("predicted_rel_error").get<double>();
  report.delta = j.at("delta").get<double>();
  report.kappa = j.at("kappa").get<double>();
  report.note = j.at("note").get<std::string>();
  return report;
}

std::string derive_companion_path(const std::string& path, const std::string& tag) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of("/\\");
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + tag;
  }
  return path.substr(0, dot) + tag + path.substr(dot);
}

}  // namespace lqrtd
