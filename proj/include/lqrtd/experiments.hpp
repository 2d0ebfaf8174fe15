#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lqrtd/bounds.hpp"
#include "lqrtd/lqr.hpp"

namespace lqrtd {

/// Configuration for the experiment harness. Loaded from / saved to a
/// versioned JSON document; every field has a default mirroring the source
/// experiments at desk scale.
struct ExperimentConfig {
  int version = 1;
  std::string experiment;  // synthetic-diag | synthetic-random | lspi-compare | bounds
  std::uint64_t base_seed = 1776;
  int num_trials = 20;
  double gamma = 0.9;
  std::string mode = "discounted";  // lspi-compare: discounted | average
  std::vector<double> rho_list = {0.1, 0.5, 0.9};
  std::vector<int> prefix_list = {100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
  std::vector<int> timesteps_list = {250, 500, 1000, 2000, 3000};
  int rollout_length = 20;
  int instance_pool = 200;
  bool paper_scale = false;
  std::string format = "csv";  // csv | json
  std::string output_path = "results.csv";
  // bounds subcommand
  double delta = 0.1;
  double bound_constant = 1.0;
  double bounds_rho = 0.5;

  void validate() const;           // throws ConfigError
  void apply_paper_scale();        // trials 100, pool 1000 (the full protocol)
  std::string to_json_string() const;

  static ExperimentConfig defaults_for(const std::string& experiment);
  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_string(const std::string& text);
};

struct TrialRecord {
  std::string experiment;
  std::string method;  // lstd | lspi | nominal
  std::string param;   // rho for synthetic, objective mode for lspi-compare
  int timesteps = 0;
  std::uint64_t seed = 0;
  std::string metric;  // rel_error | stable
  double value = 0.0;  // +infinity encodes the failure score
};

struct AggregateRow {
  std::string experiment;
  std::string method;
  std::string param;
  int timesteps = 0;
  double p25 = 0.0;
  double median = 0.0;
  double p75 = 0.0;
  double frequency_stable = 0.0;
};

// ---- canonical instances ----

/// n = 5, A = B = I, Q = R = 0.1 I, discount 0.9.
LqrInstance diag_family_instance(double gamma = 0.9);

/// K = diag(-(1-rho), ..., -(1-rho), -(1-0.01)), so A + BK = diag(rho, ..., rho, 0.01).
LinearPolicy diag_family_policy(double rho);

/// The 3-state benchmark instance: A = [[1.01,.01,0],[.01,1.01,.01],[0,.01,1.01]],
/// B = I, Q = 1e-3 I, R = I.
LqrInstance dean_instance(double gamma = 0.98);

struct RandomInstanceSelection {
  Eigen::MatrixXd A;      // the median-kappa stable draw
  double kappa = 0.0;     // its condition number
  int discarded = 0;      // unstable draws thrown away
  int pool = 0;           // total draws
};

/// Draws `pool` upper-triangular matrices (diagonal rho, strictly-upper
/// entries clip(N(0,1), -1, 1)), discards unstable ones, and returns the
/// stable draw with median kappa(P_inf(A)).
RandomInstanceSelection select_random_instance(double rho, int pool, std::uint64_t seed);

// ---- experiment drivers ----

std::vector<TrialRecord> run_synthetic_diag(const ExperimentConfig& cfg);
std::vector<TrialRecord> run_synthetic_random(const ExperimentConfig& cfg);
std::vector<TrialRecord> run_lspi_compare(const ExperimentConfig& cfg);

/// Theory constants for the diag-family instance at cfg.bounds_rho: mixing
/// bound at the midpoint rate, LQR small ball, feature second moment, the
/// sample-size requirement, and the error predictor at that N.
BoundReport bound_report_cmd(const ExperimentConfig& cfg);

// ---- aggregation and serialization ----

/// Percentile with linear interpolation; +infinity sorts above every finite
/// value, matching the failure-score convention.
double percentile(std::vector<double> values, double q);

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records);

/// Writes records at `path` in the requested format ("csv" writes the exact
/// column set experiment,method,param,timesteps,seed,metric,value with "inf"
/// for the failure marker; "json" mirrors it).
void emit_report(const std::vector<TrialRecord>& records, const std::string& path,
                 const std::string& format);

void emit_aggregate(const std::vector<AggregateRow>& rows, const std::string& path,
                    const std::string& format);

std::vector<TrialRecord> read_records_json(const std::string& path);
std::vector<TrialRecord> read_records_csv(const std::string& path);

std::string bound_report_to_json(const BoundReport& report,
                                 const std::vector<int>& prediction_grid,
                                 const Eigen::MatrixXd& P_inf, double eta, double C);
BoundReport bound_report_from_json(const std::string& text);

/// "results.csv" -> "results.agg.csv"; used for the aggregate companion file.
std::string derive_companion_path(const std::string& path, const std::string& tag);

}  // namespace lqrtd
